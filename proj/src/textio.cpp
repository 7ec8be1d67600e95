#include "kdet/textio.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "kdet/error.hpp"

namespace kdet {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')
        return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
            return false;
    return true;
}

// A matrix literal with the line it came from, parsed only once the owning
// block closes and the ring is available for element parsing.
struct Lit {
    std::string text;
    int line = 0;
};

struct Parser {
    Document doc;
    std::string file;
    bool have_ring = false;

    [[noreturn]] void fail(int line, const std::string& msg) const {
        std::ostringstream os;
        os << file << ":" << line << ": " << msg;
        throw ParseError(os.str());
    }

    long parse_int(const std::string& tok, int line, const std::string& what) {
        size_t pos = 0;
        long v = 0;
        try {
            v = std::stol(tok, &pos);
        } catch (const std::exception&) {
            fail(line, "bad " + what + " '" + tok + "'");
        }
        if (pos != tok.size()) fail(line, "bad " + what + " '" + tok + "'");
        return v;
    }

    Matrix matrix_of(const Lit& lit) {
        try {
            return parse_matrix(doc.ring, lit.text);
        } catch (const ParseError& e) {
            fail(lit.line, e.what());
        } catch (const DomainError& e) {
            fail(lit.line, e.what());
        }
    }

    void register_name(const std::string& name, ItemKind kind, int line) {
        if (!valid_name(name)) fail(line, "bad item name '" + name + "'");
        if (doc.has(name))
            fail(line, "duplicate name '" + name +
                           "' (one namespace per file)");
        doc.items.emplace_back(kind, name);
    }

    // ---- pending blocks --------------------------------------------------

    struct PendingComplex {
        std::string name;
        int line = 0;
        std::map<int, std::pair<int, int>> ranks;  // degree -> (rank, line)
        std::map<int, Lit> diffs;                  // degree -> literal
    };
    struct PendingMap {
        std::string name;
        int line = 0;
        std::string dom, cod;
        std::map<int, Lit> comps;
    };
    struct PendingSes {
        std::string name;
        int line = 0;
        std::string inc, proj;
        int inc_line = 0, proj_line = 0;
    };
    struct PendingScenario {
        std::string name;
        int line = 0;
        std::map<std::string, std::pair<std::string, int>> parts;
        std::map<int, Lit> hsub, hquot, hconn;
        bool any_witness = false;
    };

    std::optional<PendingComplex> cur_complex;
    std::optional<PendingMap> cur_map;
    std::optional<PendingSes> cur_ses;
    std::optional<PendingScenario> cur_scenario;

    const Complex& complex_ref(const std::string& name, int line) {
        auto it = doc.complexes.find(name);
        if (it == doc.complexes.end())
            fail(line, "unknown complex '" + name + "'");
        return it->second;
    }
    const ChainMap& map_ref(const std::string& name, int line) {
        auto it = doc.maps.find(name);
        if (it == doc.maps.end()) fail(line, "unknown map '" + name + "'");
        return it->second;
    }
    const Ses& ses_ref(const std::string& name, int line) {
        auto it = doc.seqs.find(name);
        if (it == doc.seqs.end()) fail(line, "unknown ses '" + name + "'");
        return it->second;
    }

    void close_block() {
        if (cur_complex) close_complex();
        if (cur_map) close_map();
        if (cur_ses) close_ses();
        if (cur_scenario) close_scenario();
    }

    void close_complex() {
        PendingComplex p = std::move(*cur_complex);
        cur_complex.reset();
        if (p.ranks.empty()) {
            if (!p.diffs.empty())
                fail(p.diffs.begin()->second.line,
                     "differential in a complex with no declared degrees");
            doc.complexes.emplace(p.name, zero_complex(doc.ring));
            return;
        }
        int lo = p.ranks.begin()->first;
        int hi = p.ranks.rbegin()->first;
        std::vector<int> ranks;
        for (int i = lo; i <= hi; ++i) {
            auto it = p.ranks.find(i);
            ranks.push_back(it == p.ranks.end() ? 0 : it->second.first);
        }
        std::vector<Matrix> diffs;
        for (int i = lo; i < hi; ++i) {
            auto it = p.diffs.find(i);
            if (it == p.diffs.end())
                diffs.emplace_back(doc.ring, ranks[static_cast<size_t>(i + 1 - lo)],
                                   ranks[static_cast<size_t>(i - lo)]);
            else
                diffs.push_back(matrix_of(it->second));
        }
        for (const auto& [deg, lit] : p.diffs)
            if (deg < lo || deg >= hi)
                fail(lit.line, "differential at degree " + std::to_string(deg) +
                                   " outside the declared degrees");
        try {
            doc.complexes.emplace(p.name,
                                  make_complex(doc.ring, lo, ranks, diffs));
        } catch (const DomainError& e) {
            fail(p.line, "complex '" + p.name + "': " + e.what());
        }
    }

    void close_map() {
        PendingMap p = std::move(*cur_map);
        cur_map.reset();
        const Complex& dom = complex_ref(p.dom, p.line);
        const Complex& cod = complex_ref(p.cod, p.line);
        std::map<int, Matrix> comps;
        for (const auto& [deg, lit] : p.comps)
            comps.emplace(deg, matrix_of(lit));
        try {
            doc.maps.emplace(p.name, make_chain_map(dom, cod, comps));
        } catch (const DomainError& e) {
            fail(p.line, "map '" + p.name + "': " + e.what());
        }
    }

    void close_ses() {
        PendingSes p = std::move(*cur_ses);
        cur_ses.reset();
        if (p.inc.empty()) fail(p.line, "ses '" + p.name + "' has no inc line");
        if (p.proj.empty())
            fail(p.line, "ses '" + p.name + "' has no proj line");
        const ChainMap& inc = map_ref(p.inc, p.inc_line);
        const ChainMap& proj = map_ref(p.proj, p.proj_line);
        try {
            doc.seqs.emplace(p.name, make_ses(inc, proj));
        } catch (const DomainError& e) {
            fail(p.line, "ses '" + p.name + "': " + e.what());
        }
    }

    Homotopy witness_of(const std::map<int, Lit>& lits) {
        Homotopy h;
        for (const auto& [deg, lit] : lits) h.comps.emplace(deg, matrix_of(lit));
        return h;
    }

    void close_scenario() {
        PendingScenario p = std::move(*cur_scenario);
        cur_scenario.reset();
        for (const char* part : {"delta1", "delta2", "a", "b", "c"})
            if (!p.parts.count(part))
                fail(p.line,
                     "scenario '" + p.name + "' has no " + part + " line");
        auto part = [&](const char* key) { return p.parts.at(key); };
        const Ses& d1 = ses_ref(part("delta1").first, part("delta1").second);
        const Ses& d2 = ses_ref(part("delta2").first, part("delta2").second);
        const ChainMap& a = map_ref(part("a").first, part("a").second);
        const ChainMap& b = map_ref(part("b").first, part("b").second);
        const ChainMap& c = map_ref(part("c").first, part("c").second);
        try {
            if (p.any_witness) {
                TriangleIsoScenario scn{d1,
                                        d2,
                                        a,
                                        b,
                                        c,
                                        witness_of(p.hsub),
                                        witness_of(p.hquot),
                                        witness_of(p.hconn)};
                check_scenario(scn);
                doc.scenarios.emplace(p.name, std::move(scn));
            } else {
                doc.scenarios.emplace(p.name, make_scenario(d1, d2, a, b, c));
            }
        } catch (const DomainError& e) {
            fail(p.line, "scenario '" + p.name + "': " + e.what());
        }
    }

    // ---- line dispatch ---------------------------------------------------

    // The literal part of a line: everything after the first `skip` tokens,
    // with inner whitespace preserved well enough for parse_matrix (which
    // ignores whitespace entirely).
    static std::string rest_of(const std::vector<std::string>& toks,
                               size_t skip) {
        std::string out;
        for (size_t i = skip; i < toks.size(); ++i) {
            if (!out.empty()) out += " ";
            out += toks[i];
        }
        return out;
    }

    void handle(const std::string& raw, int line) {
        std::string text = raw;
        auto hash = text.find('#');
        if (hash != std::string::npos) text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) return;
        auto toks = split_tokens(text);
        const std::string& kw = toks[0];

        if (kw == "ring") {
            if (have_ring) fail(line, "duplicate ring header");
            if (toks.size() != 2) fail(line, "usage: ring TAG");
            try {
                doc.ring = parse_ring(toks[1]);
            } catch (const ParseError& e) {
                fail(line, e.what());
            } catch (const DomainError& e) {
                fail(line, e.what());
            }
            have_ring = true;
            return;
        }

        bool starter = kw == "complex" || kw == "map" || kw == "ses" ||
                       kw == "scenario" || kw == "matrix";
        if (starter) {
            if (!have_ring)
                fail(line, "ring header required before any declaration");
            close_block();
        }

        if (kw == "complex") {
            if (toks.size() != 2) fail(line, "usage: complex NAME");
            register_name(toks[1], ItemKind::Complex, line);
            cur_complex = PendingComplex{toks[1], line, {}, {}};
            return;
        }
        if (kw == "map") {
            if (toks.size() != 6 || toks[2] != "from" || toks[4] != "to")
                fail(line, "usage: map NAME from DOM to COD");
            register_name(toks[1], ItemKind::Map, line);
            cur_map = PendingMap{toks[1], line, toks[3], toks[5], {}};
            return;
        }
        if (kw == "ses") {
            if (toks.size() != 2) fail(line, "usage: ses NAME");
            register_name(toks[1], ItemKind::Ses, line);
            cur_ses = PendingSes{toks[1], line, "", "", 0, 0};
            return;
        }
        if (kw == "scenario") {
            if (toks.size() != 2) fail(line, "usage: scenario NAME");
            register_name(toks[1], ItemKind::Scenario, line);
            cur_scenario = PendingScenario{toks[1], line, {}, {}, {}, {}, false};
            return;
        }
        if (kw == "matrix") {
            if (toks.size() < 3) fail(line, "usage: matrix NAME LITERAL");
            register_name(toks[1], ItemKind::Matrix, line);
            doc.matrices.emplace(toks[1], matrix_of(Lit{rest_of(toks, 2), line}));
            return;
        }

        // Continuation lines.
        if (kw == "degree") {
            if (!cur_complex) fail(line, "'degree' outside a complex block");
            if (toks.size() != 4 || toks[2] != "rank")
                fail(line, "usage: degree I rank R");
            int deg = static_cast<int>(parse_int(toks[1], line, "degree"));
            long rank = parse_int(toks[3], line, "rank");
            if (rank < 0) fail(line, "negative rank");
            if (cur_complex->ranks.count(deg))
                fail(line, "duplicate degree " + std::to_string(deg));
            cur_complex->ranks[deg] = {static_cast<int>(rank), line};
            return;
        }
        if (kw == "d") {
            if (!cur_complex) fail(line, "'d' outside a complex block");
            if (toks.size() < 3) fail(line, "usage: d I LITERAL");
            int deg = static_cast<int>(parse_int(toks[1], line, "degree"));
            if (cur_complex->diffs.count(deg))
                fail(line, "duplicate differential at degree " +
                               std::to_string(deg));
            cur_complex->diffs[deg] = Lit{rest_of(toks, 2), line};
            return;
        }
        if (kw == "at") {
            if (!cur_map) fail(line, "'at' outside a map block");
            if (toks.size() < 3) fail(line, "usage: at I LITERAL");
            int deg = static_cast<int>(parse_int(toks[1], line, "degree"));
            if (cur_map->comps.count(deg))
                fail(line,
                     "duplicate component at degree " + std::to_string(deg));
            cur_map->comps[deg] = Lit{rest_of(toks, 2), line};
            return;
        }
        if (kw == "inc" || kw == "proj") {
            if (!cur_ses) fail(line, "'" + kw + "' outside a ses block");
            if (toks.size() != 2) fail(line, "usage: " + kw + " MAPNAME");
            std::string& slot = (kw == "inc") ? cur_ses->inc : cur_ses->proj;
            int& slot_line =
                (kw == "inc") ? cur_ses->inc_line : cur_ses->proj_line;
            if (!slot.empty()) fail(line, "duplicate " + kw + " line");
            slot = toks[1];
            slot_line = line;
            return;
        }
        if (kw == "delta1" || kw == "delta2" || kw == "a" || kw == "b" ||
            kw == "c") {
            if (!cur_scenario)
                fail(line, "'" + kw + "' outside a scenario block");
            if (toks.size() != 2) fail(line, "usage: " + kw + " NAME");
            if (cur_scenario->parts.count(kw))
                fail(line, "duplicate " + kw + " line");
            cur_scenario->parts[kw] = {toks[1], line};
            return;
        }
        if (kw == "hsub" || kw == "hquot" || kw == "hconn") {
            if (!cur_scenario)
                fail(line, "'" + kw + "' outside a scenario block");
            if (toks.size() < 3) fail(line, "usage: " + kw + " I LITERAL");
            int deg = static_cast<int>(parse_int(toks[1], line, "degree"));
            auto& slot = (kw == "hsub")    ? cur_scenario->hsub
                         : (kw == "hquot") ? cur_scenario->hquot
                                           : cur_scenario->hconn;
            if (slot.count(deg))
                fail(line, "duplicate " + kw + " component at degree " +
                               std::to_string(deg));
            slot[deg] = Lit{rest_of(toks, 2), line};
            cur_scenario->any_witness = true;
            return;
        }

        fail(line, "unknown keyword '" + kw + "'");
    }
};

}  // namespace

std::string item_kind_name(ItemKind kind) {
    switch (kind) {
        case ItemKind::Complex: return "complex";
        case ItemKind::Map: return "map";
        case ItemKind::Ses: return "ses";
        case ItemKind::Scenario: return "scenario";
        case ItemKind::Matrix: return "matrix";
    }
    return "?";
}

bool Document::has(const std::string& name) const {
    for (const auto& [kind, n] : items)
        if (n == name) return true;
    return false;
}

ItemKind Document::kind_of(const std::string& name) const {
    for (const auto& [kind, n] : items)
        if (n == name) return kind;
    throw ParseError(file + ": no item named '" + name + "'");
}

std::vector<std::string> Document::names_of(ItemKind kind) const {
    std::vector<std::string> out;
    for (const auto& [k, n] : items)
        if (k == kind) out.push_back(n);
    return out;
}

Document parse_document(const std::string& text, const std::string& filename) {
    Parser p;
    p.file = filename;
    p.doc.file = filename;
    std::istringstream is(text);
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) p.handle(raw, ++line);
    p.close_block();
    return std::move(p.doc);
}

Document load_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_document(buf.str(), path);
}

namespace {

template <class M>
const typename M::mapped_type& lookup(const Document& doc, const M& m,
                                      const std::string& name,
                                      const char* wanted) {
    auto it = m.find(name);
    if (it != m.end()) return it->second;
    for (const auto& [kind, n] : doc.items)
        if (n == name)
            throw ParseError(doc.file + ": '" + name + "' is a " +
                             item_kind_name(kind) + ", expected a " + wanted);
    throw ParseError(doc.file + ": no item named '" + name + "'");
}

}  // namespace

const Complex& need_complex(const Document& doc, const std::string& name) {
    return lookup(doc, doc.complexes, name, "complex");
}
const ChainMap& need_map(const Document& doc, const std::string& name) {
    return lookup(doc, doc.maps, name, "map");
}
const Ses& need_ses(const Document& doc, const std::string& name) {
    return lookup(doc, doc.seqs, name, "ses");
}
const TriangleIsoScenario& need_scenario(const Document& doc,
                                         const std::string& name) {
    return lookup(doc, doc.scenarios, name, "scenario");
}
const Matrix& need_matrix(const Document& doc, const std::string& name) {
    return lookup(doc, doc.matrices, name, "matrix");
}

ItemRef split_ref(const std::string& ref) {
    auto hash = ref.find('#');
    if (hash == std::string::npos) return ItemRef{ref, ""};
    ItemRef out{ref.substr(0, hash), ref.substr(hash + 1)};
    if (out.file.empty())
        throw ParseError("empty file name in reference '" + ref + "'");
    if (out.name.empty())
        throw ParseError("empty item name in reference '" + ref + "'");
    return out;
}

std::string format_complex_block(const std::string& name, const Complex& c) {
    std::ostringstream os;
    os << "complex " << name << "\n";
    for (int i = c.lo; i <= c.hi; ++i)
        os << "  degree " << i << " rank " << c.rank(i) << "\n";
    for (int i = c.lo; i < c.hi; ++i)
        if (c.rank(i) > 0 && c.rank(i + 1) > 0)
            os << "  d " << i << " " << format_matrix(c.d(i)) << "\n";
    return os.str();
}

std::string format_map_block(const std::string& name, const std::string& dom,
                             const std::string& cod, const ChainMap& f) {
    std::ostringstream os;
    os << "map " << name << " from " << dom << " to " << cod << "\n";
    int lo = std::min(f.dom.lo, f.cod.lo);
    int hi = std::max(f.dom.hi, f.cod.hi);
    for (int i = lo; i <= hi; ++i)
        if (f.dom.rank(i) > 0 && f.cod.rank(i) > 0)
            os << "  at " << i << " " << format_matrix(f.at(i)) << "\n";
    return os.str();
}

std::string format_matrix_block(const std::string& name, const Matrix& m) {
    std::ostringstream os;
    os << "matrix " << name << " " << format_matrix(m) << "\n";
    return os.str();
}

}  // namespace kdet
