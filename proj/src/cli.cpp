#include "kdet/cli.hpp"

#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kdet/detfunctor.hpp"
#include "kdet/error.hpp"
#include "kdet/ktheory.hpp"
#include "kdet/picardfiber.hpp"
#include "kdet/textio.hpp"

namespace kdet {

namespace {

PivotPolicy policy_from_seed(std::uint64_t seed) {
    return PivotPolicy{seed, seed != 0};
}

// Resolves a FILE#NAME reference; a bare FILE is accepted when the file
// holds exactly one item of the wanted kind.
std::string resolve_name(const Document& doc, const ItemRef& ref,
                         ItemKind kind) {
    if (!ref.name.empty()) return ref.name;
    auto names = doc.names_of(kind);
    if (names.size() == 1) return names[0];
    std::ostringstream os;
    os << doc.file << ": found " << names.size() << " "
       << item_kind_name(kind) << " items; use FILE#NAME";
    throw ParseError(os.str());
}

Complex load_complex(const std::string& refstr) {
    ItemRef ref = split_ref(refstr);
    Document doc = load_document(ref.file);
    return need_complex(doc, resolve_name(doc, ref, ItemKind::Complex));
}

ChainMap load_map(const std::string& refstr) {
    ItemRef ref = split_ref(refstr);
    Document doc = load_document(ref.file);
    return need_map(doc, resolve_name(doc, ref, ItemKind::Map));
}

TriangleIsoScenario load_scenario(const std::string& refstr) {
    ItemRef ref = split_ref(refstr);
    Document doc = load_document(ref.file);
    return need_scenario(doc, resolve_name(doc, ref, ItemKind::Scenario));
}

Matrix load_matrix(const std::string& refstr) {
    ItemRef ref = split_ref(refstr);
    Document doc = load_document(ref.file);
    return need_matrix(doc, resolve_name(doc, ref, ItemKind::Matrix));
}

std::string bracketed(const std::vector<long>& xs) {
    std::string out = "[";
    for (size_t i = 0; i < xs.size(); ++i)
        out += (i ? "," : "") + std::to_string(xs[i]);
    return out + "]";
}

std::string bracketed_elements(const std::vector<Element>& xs) {
    std::string out = "[";
    for (size_t i = 0; i < xs.size(); ++i)
        out += (i ? "," : "") + format_element(xs[i]);
    return out + "]";
}

void print_cohomology(std::ostream& out, const Complex& c) {
    out << "ring " << c.ring.tag() << "\n";
    if (c.empty()) {
        out << "zero complex\n";
        return;
    }
    for (const Cohomology& h : cohomology(c)) {
        out << "degree " << h.degree << ": free " << h.free_rank
            << ", torsion " << bracketed_elements(h.torsion) << "\n";
        if (h.representatives.cols > 0)
            out << "  representatives " << format_matrix(h.representatives)
                << "\n";
    }
}

void print_quotient(std::ostream& out, const QuotientReport& q) {
    out << "group_order = " << q.group_order << "\n";
    out << "group_invariants = " << bracketed(q.group_invariants) << "\n";
    out << "subgroup = " << bracketed_elements(q.subgroup) << "\n";
    out << "subgroup_order = " << q.subgroup_order << "\n";
    out << "quotient_order = " << q.quotient_order << "\n";
    out << "quotient_invariants = " << bracketed(q.quotient_invariants)
        << "\n";
    out << "collapsed_pairs = " << q.collapsed_pairs.size() << "\n";
    out << "injective = " << (q.injective ? "true" : "false") << "\n";
}

nlohmann::ordered_json certificate_json(const CollapseCertificate& cert) {
    nlohmann::ordered_json j;
    j["prime"] = cert.p;
    j["ring"] = cert.ring.tag();
    j["unit_group_order"] = cert.unit_group_order;
    j["epsilon"] = format_element(cert.eps);
    j["epsilon_order"] = cert.eps_order;
    j["k1_nontrivial"] = cert.k1_nontrivial;
    j["scenario_sub"] = complex_summary(cert.scenario.d1.sub);
    j["scenario_mid"] = complex_summary(cert.scenario.d1.mid);
    j["scenario_quot"] = complex_summary(cert.scenario.d1.quot);
    j["rung_a"] = chain_map_summary(cert.scenario.a);
    j["rung_b"] = chain_map_summary(cert.scenario.b);
    j["rung_c"] = chain_map_summary(cert.scenario.c);
    j["ratio"] = format_element(cert.ratio);
    j["relation_subgroup_order"] = cert.quotient.subgroup_order;
    j["quotient_order"] = cert.quotient.quotient_order;
    j["quotient_invariants"] = cert.quotient.quotient_invariants;
    j["collapsed_pairs"] = cert.quotient.collapsed_pairs.size();
    j["not_injective"] = cert.not_injective;
    j["conclusion"] = cert.conclusion;
    return j;
}

// All verbs, their flags, and the bound storage.  Built before parsing;
// executed after.
struct Cli {
    CLI::App app;

    std::string ref, pair_text, triv, ring_tag, unit_text, degrees_text;
    std::vector<std::string> rel_texts;
    std::uint64_t seed = 0;
    long prime = 0, height = 30;
    int max_rank = 0;
    bool json = false;

    CLI::App* cohom;
    CLI::App* qis;
    CLI::App* det;
    CLI::App* torsion;
    CLI::App* euler;
    CLI::App* chi;
    CLI::App* chirel;
    CLI::App* relclass;
    CLI::App* quotient;
    CLI::App* harvest_cmd;
    CLI::App* collapse;
    CLI::App* enumerate_cmd;
    CLI::App* checkexact;

    Cli()
        : app("exact determinants, torsion, and relative Euler classes for "
              "bounded complexes of free modules") {
        app.name("kdet");
        app.require_subcommand(1);

        cohom = app.add_subcommand(
            "cohomology", "Cohomology with deterministic bases (free rank, "
                          "torsion divisors, representative columns)");
        cohom->add_option("REF", ref, "FILE#COMPLEX")->required();
        cohom->add_option("--pair", pair_text,
                          "base-change pair R:S; print H(C (x) S) over S");

        qis = app.add_subcommand(
            "qis", "Is the chain map a quasi-isomorphism? Prints true/false");
        qis->add_option("REF", ref, "FILE#MAP")->required();

        det = app.add_subcommand(
            "det", "Determinant of a quasi-isomorphism (a unit of the ring)");
        det->add_option("REF", ref, "FILE#MAP")->required();
        det->add_option("--seed", seed, "re-randomize legal pivot choices");

        torsion = app.add_subcommand(
            "torsion", "Torsion of an acyclic complex (a unit of the ring)");
        torsion->add_option("REF", ref, "FILE#COMPLEX")->required();
        torsion->add_option("--seed", seed,
                            "re-randomize legal pivot choices");

        euler = app.add_subcommand(
            "euler-iso", "Euler isomorphism scalar, computed by both the "
                         "splitting and truncation routes and compared");
        euler->add_option("REF", ref, "FILE#COMPLEX")->required();
        euler->add_option("--seed", seed, "re-randomize legal pivot choices");

        chi = app.add_subcommand("chi",
                                 "Euler characteristic (alternating rank sum)");
        chi->add_option("REF", ref, "FILE#COMPLEX")->required();

        chirel = app.add_subcommand(
            "chi-rel", "Relative Euler characteristic class in K0(R,S)");
        chirel->add_option("REF", ref, "FILE#COMPLEX")->required();
        chirel->add_option("--pair", pair_text, "base-change pair R:S")
            ->required();
        chirel->add_option("--triv", triv,
                           "file with the trivialization matrix t (written "
                           "against the bases printed by `cohomology "
                           "--pair`)");
        chirel->add_option("--seed", seed, "re-randomize legal pivot choices");

        relclass = app.add_subcommand(
            "rel-class", "Normal form of a unit's class in K0(R,S)");
        relclass->add_option("--pair", pair_text, "base-change pair R:S")
            ->required();
        relclass->add_option("--unit", unit_text, "unit of S")->required();

        quotient = app.add_subcommand(
            "quotient", "Quotient of the unit group by harvested relations");
        quotient->add_option("--ring", ring_tag, "ring tag")->required();
        quotient->add_option("--rel", rel_texts,
                             "relation unit (repeatable)");

        harvest_cmd = app.add_subcommand(
            "harvest", "Harvest the unit ratio separating a ladder "
                       "scenario's two composite determinant morphisms");
        harvest_cmd->add_option("REF", ref, "SCENARIOFILE or FILE#SCENARIO")
            ->required();

        collapse = app.add_subcommand(
            "collapse", "Dual-number collapse certificate over F_p[e]");
        collapse->add_option("--p", prime, "prime p")->required();
        collapse->add_flag("--json", json, "emit the certificate as JSON");

        enumerate_cmd = app.add_subcommand(
            "enumerate", "Exhaustively harvest nontrivial relation ratios "
                         "over a finite ring");
        enumerate_cmd->add_option("--ring", ring_tag, "finite ring tag")
            ->required();
        enumerate_cmd->add_option("--max-rank", max_rank, "total rank bound")
            ->required();
        enumerate_cmd
            ->add_option("--degrees", degrees_text, "degree window lo:hi")
            ->required();

        checkexact = app.add_subcommand(
            "check-exact", "Verify the six-term exactness checks for a pair");
        checkexact->add_option("--pair", pair_text, "base-change pair R:S")
            ->required();
        checkexact->add_option("--height", height,
                               "test units with numerator and denominator "
                               "up to this bound (default 30)");
    }

    std::pair<int, int> degree_window() const {
        auto colon = degrees_text.find(':');
        if (colon != std::string::npos) {
            std::string lo_s = degrees_text.substr(0, colon);
            std::string hi_s = degrees_text.substr(colon + 1);
            try {
                size_t p1 = 0, p2 = 0;
                int lo = std::stoi(lo_s, &p1);
                int hi = std::stoi(hi_s, &p2);
                if (p1 == lo_s.size() && p2 == hi_s.size()) return {lo, hi};
            } catch (const std::exception&) {
            }
        }
        throw ParseError("--degrees expects lo:hi, got '" + degrees_text +
                         "'");
    }

    int execute(std::ostream& out) {
        if (cohom->parsed()) {
            Complex c = load_complex(ref);
            if (!pair_text.empty()) {
                RelPair pair = parse_rel_pair(pair_text);
                if (!(c.ring == pair.r))
                    throw DomainError("complex is over " + c.ring.tag() +
                                      ", not the pair's base ring " +
                                      pair.r.tag());
                c = base_change(c, pair.s);
            }
            print_cohomology(out, c);
        } else if (qis->parsed()) {
            out << (is_qis(load_map(ref)) ? "true" : "false") << "\n";
        } else if (det->parsed()) {
            out << format_element(
                       det_qis(load_map(ref), policy_from_seed(seed)))
                << "\n";
        } else if (torsion->parsed()) {
            out << format_element(torsion_acyclic(load_complex(ref),
                                                  policy_from_seed(seed)))
                << "\n";
        } else if (euler->parsed()) {
            Complex c = load_complex(ref);
            PivotPolicy policy = policy_from_seed(seed);
            Element split = euler_iso_split(c, policy);
            Element trunc = euler_iso_truncate(c, policy);
            if (!(split == trunc)) throw DomainError("euler routes disagree");
            out << format_element(split) << "\n";
        } else if (chi->parsed()) {
            out << chi_k0(load_complex(ref)) << "\n";
        } else if (chirel->parsed()) {
            RelPair pair = parse_rel_pair(pair_text);
            std::optional<Matrix> t;
            if (!triv.empty()) t = load_matrix(triv);
            out << format_class(chi_rel(load_complex(ref), pair, t,
                                        policy_from_seed(seed)))
                << "\n";
        } else if (relclass->parsed()) {
            RelPair pair = parse_rel_pair(pair_text);
            Element u = parse_element(pair.s, unit_text);
            out << format_class(class_of(make_fiber_obj(pair, 0, u))) << "\n";
        } else if (quotient->parsed()) {
            RingId ring = parse_ring(ring_tag);
            UnitGroup group = enumerate_units(ring);
            std::vector<Element> rels;
            for (const std::string& text : rel_texts)
                rels.push_back(parse_element(ring, text));
            print_quotient(out, quotient_units(group, rels));
        } else if (harvest_cmd->parsed()) {
            HarvestedRelation rel = harvest(load_scenario(ref));
            out << "ratio = " << format_element(rel.ratio) << "\n";
            out << "provenance = " << rel.provenance << "\n";
        } else if (collapse->parsed()) {
            CollapseCertificate cert = collapse_certificate(prime);
            verify_certificate(cert);
            if (json)
                out << certificate_json(cert).dump(2) << "\n";
            else
                out << format_certificate(cert);
        } else if (enumerate_cmd->parsed()) {
            auto [lo, hi] = degree_window();
            RingId ring = parse_ring(ring_tag);
            auto rels = enumerate_relations(ring, max_rank, lo, hi);
            out << "relations = " << rels.size() << "\n";
            for (const HarvestedRelation& rel : rels) {
                out << "ratio = " << format_element(rel.ratio) << "\n";
                out << "  provenance = " << rel.provenance << "\n";
            }
        } else if (checkexact->parsed()) {
            RelPair pair = parse_rel_pair(pair_text);
            ExactnessReport rep = check_exact_sequence(pair, height);
            out << "pair = " << format_rel_pair(rep.pair) << "\n";
            out << "units_tested = " << rep.units_tested << "\n";
            out << "pi1_fiber_trivial = "
                << (rep.pi1_fiber_trivial ? "true" : "false") << "\n";
            out << "boundary_kills_image = "
                << (rep.boundary_kills_image ? "true" : "false") << "\n";
            out << "boundary_kernel_exact = "
                << (rep.boundary_kernel_exact ? "true" : "false") << "\n";
            out << "degree_zero_only = "
                << (rep.degree_zero_only ? "true" : "false") << "\n";
            out << "exact = " << (rep.ok() ? "true" : "false") << "\n";
            if (!rep.ok()) return 1;
        }
        return 0;
    }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
    Cli cli;

    std::vector<const char*> argv;
    argv.push_back("kdet");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        try {
            cli.app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::CallForHelp&) {
            out << cli.app.help();
            return 0;
        } catch (const CLI::ParseError& e) {
            err << "error: " << e.what() << "\n" << cli.app.help();
            return 2;
        }
        return cli.execute(out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace kdet
