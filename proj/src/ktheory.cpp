#include "kdet/ktheory.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kdet/gradedline.hpp"

namespace kdet {
namespace {

Matrix first_cols_of(const Matrix& a, int k) {
    std::vector<int> js(static_cast<size_t>(k));
    for (int j = 0; j < k; ++j) js[static_cast<size_t>(j)] = j;
    return take_cols(a, js);
}

Matrix first_rows_of(const Matrix& a, int k) {
    std::vector<int> is(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) is[static_cast<size_t>(i)] = i;
    return take_rows(a, is);
}

int total_rank(const Complex& c) {
    int t = 0;
    for (int i = c.lo; i <= c.hi; ++i) t += c.rank(i);
    return t;
}

std::string cx_summary(const Complex& c) {
    if (c.empty()) return "0";
    std::ostringstream os;
    os << "[";
    for (int i = c.lo; i <= c.hi; ++i) os << (i > c.lo ? "," : "") << c.rank(i);
    os << "]@" << c.lo;
    return os.str();
}

std::string map_summary(const ChainMap& f) {
    std::ostringstream os;
    bool first = true;
    int lo = std::min(f.dom.lo, f.cod.lo), hi = std::max(f.dom.hi, f.cod.hi);
    for (int i = lo; i <= hi; ++i) {
        if (f.dom.rank(i) == 0 || f.cod.rank(i) == 0) continue;
        if (!first) os << " ";
        os << i << ":" << format_matrix(f.at(i));
        first = false;
    }
    return first ? "0" : os.str();
}

// u * identity as a chain self-map.
ChainMap scalar_map(const Complex& c, const Element& u) {
    std::map<int, Matrix> comps;
    for (int i = c.lo; i <= c.hi; ++i) {
        if (c.rank(i) == 0) continue;
        comps[i] = mat_scale(u, mat_identity(c.ring, c.rank(i)));
    }
    return make_chain_map(c, c, comps);
}

// Writes the columns of `cycles` in the representative basis `reps` modulo
// the image of `im_src`; the coefficient block on `reps` is unique.
Matrix coords_mod_image(const Matrix& reps, const Matrix& im_src,
                        const Matrix& cycles, const PivotPolicy& policy) {
    auto sol = solve(hstack(reps, im_src), cycles, policy);
    if (!sol) throw DomainError("internal: representatives do not span");
    return first_rows_of(*sol, reps.cols);
}

// --- packed linear views of map and homotopy spaces ---------------------------

// Degree-indexed matrix slots flattened into one coordinate vector.  `off` is
// the degree shift of the target: 0 for chain maps dom^i -> cod^i, -1 for
// homotopies dom^i -> cod^(i-1), +1 for the values of the chain condition.
struct PackedShape {
    const Complex* dom = nullptr;
    const Complex* cod = nullptr;
    int off = 0;
    std::vector<int> degs;  // degrees with a nonzero slot
    std::vector<int> offsets;
    int total = 0;
};

PackedShape pack_shape(const Complex& dom, const Complex& cod, int off) {
    PackedShape ps;
    ps.dom = &dom;
    ps.cod = &cod;
    ps.off = off;
    int lo = std::min(dom.lo, cod.lo - off), hi = std::max(dom.hi, cod.hi - off);
    for (int i = lo; i <= hi; ++i) {
        int r = cod.rank(i + off), c = dom.rank(i);
        if (r == 0 || c == 0) continue;
        ps.degs.push_back(i);
        ps.offsets.push_back(ps.total);
        ps.total += r * c;
    }
    return ps;
}

std::map<int, Matrix> unpack_comps(const PackedShape& ps,
                                   const std::vector<Element>& x) {
    std::map<int, Matrix> comps;
    for (size_t s = 0; s < ps.degs.size(); ++s) {
        int i = ps.degs[s];
        int r = ps.cod->rank(i + ps.off), c = ps.dom->rank(i);
        Matrix m(ps.dom->ring, r, c);
        int base = ps.offsets[s];
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < c; ++b)
                m.at(a, b) = x[static_cast<size_t>(base + a * c + b)];
        comps[i] = m;
    }
    return comps;
}

std::vector<Element> pack_comps(const PackedShape& ps,
                                const std::map<int, Matrix>& comps,
                                const RingId& ring) {
    std::vector<Element> x(static_cast<size_t>(ps.total), ring_zero(ring));
    for (size_t s = 0; s < ps.degs.size(); ++s) {
        int i = ps.degs[s];
        auto it = comps.find(i);
        if (it == comps.end()) continue;
        const Matrix& m = it->second;
        int base = ps.offsets[s];
        for (int a = 0; a < m.rows; ++a)
            for (int b = 0; b < m.cols; ++b)
                x[static_cast<size_t>(base + a * m.cols + b)] = m.at(a, b);
    }
    return x;
}

// The chain condition L(f) = d_cod f - f d_dom as packed vectors: input in
// the off=0 shape, output in the off=+1 shape.
std::vector<Element> apply_chain_condition(const PackedShape& in,
                                           const PackedShape& out,
                                           const std::vector<Element>& x) {
    auto comps = unpack_comps(in, x);
    const Complex& dom = *in.dom;
    const Complex& cod = *in.cod;
    ChainMap f{dom, cod, comps};
    std::map<int, Matrix> vals;
    for (int i : out.degs) {
        Matrix v = mat_sub(mat_mul(cod.d(i), f.at(i)),
                           mat_mul(f.at(i + 1), dom.d(i)));
        vals[i] = v;
    }
    return pack_comps(out, vals, dom.ring);
}

// The boundary B(h) = d_cod h + h d_dom of a packed homotopy (off=-1 shape),
// emitted in the chain-map (off=0) shape.
std::vector<Element> apply_homotopy_boundary(const PackedShape& in,
                                             const PackedShape& out,
                                             const std::vector<Element>& x) {
    auto comps = unpack_comps(in, x);
    const Complex& dom = *in.dom;
    const Complex& cod = *in.cod;
    Homotopy h{comps};
    std::map<int, Matrix> vals;
    for (int i : out.degs) {
        Matrix v = mat_add(mat_mul(cod.d(i - 1), h.at(dom, cod, i)),
                           mat_mul(h.at(dom, cod, i + 1), dom.d(i)));
        vals[i] = v;
    }
    return pack_comps(out, vals, dom.ring);
}

Matrix columns_matrix(const RingId& ring, int rows,
                      const std::vector<std::vector<Element>>& cols) {
    Matrix m(ring, rows, static_cast<int>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j)
        for (int i = 0; i < rows; ++i)
            m.at(i, static_cast<int>(j)) = cols[j][static_cast<size_t>(i)];
    return m;
}

std::string key_of(const std::vector<Element>& x) {
    std::string k;
    for (const Element& e : x) {
        k += format_element(e);
        k += ';';
    }
    return k;
}

std::vector<Element> vec_add(const std::vector<Element>& a,
                             const std::vector<Element>& b) {
    std::vector<Element> r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] = add(r[i], b[i]);
    return r;
}

// --- exhaustive enumeration over finite rings ----------------------------------

std::vector<Element> ring_elements(const RingId& ring) {
    std::vector<Element> out;
    switch (ring.kind) {
        case RingKind::PrimeField:
            for (long v = 0; v < ring.p; ++v) out.push_back(from_int(ring, v));
            break;
        case RingKind::LocalZ: {
            long mod = ring.modulus().get_si();
            for (long v = 0; v < mod; ++v) out.push_back(from_int(ring, v));
            break;
        }
        case RingKind::DualNum:
            for (long a = 0; a < ring.p; ++a)
                for (long b = 0; b < ring.p; ++b)
                    out.push_back(make_element(ring, a, b));
            break;
        default:
            throw DomainError("element enumeration needs a finite ring");
    }
    return out;
}

void spend(long& budget, long cost) {
    budget -= cost;
    if (budget < 0) throw DomainError("enumeration bounds too large");
}

// All vectors in the span of the given packed generators, deduplicated.
// Grown one generator at a time, so the cost tracks the size of the actual
// span rather than the (possibly redundant) generator count.
std::vector<std::vector<Element>> span_of(
    const RingId& ring, int dim, const std::vector<std::vector<Element>>& gens,
    const std::vector<Element>& elems, long& budget) {
    std::vector<Element> zero(static_cast<size_t>(dim), ring_zero(ring));
    std::vector<std::vector<Element>> out{zero};
    for (const auto& g : gens) {
        std::vector<std::vector<Element>> mults;
        for (const Element& c : elems) {
            std::vector<Element> m(g.size(), ring_zero(ring));
            for (size_t i = 0; i < g.size(); ++i) m[i] = mul(c, g[i]);
            mults.push_back(m);
        }
        std::set<std::string> seen;
        std::vector<std::vector<Element>> grown;
        for (const auto& s : out) {
            for (const auto& m : mults) {
                spend(budget, 1);
                std::vector<Element> x = vec_add(s, m);
                if (seen.insert(key_of(x)).second) grown.push_back(x);
            }
        }
        out = std::move(grown);
    }
    return out;
}

std::vector<std::vector<Element>> matrix_columns(const Matrix& m) {
    std::vector<std::vector<Element>> cols;
    for (int j = 0; j < m.cols; ++j) {
        std::vector<Element> c;
        c.reserve(static_cast<size_t>(m.rows));
        for (int i = 0; i < m.rows; ++i) c.push_back(m.at(i, j));
        cols.push_back(c);
    }
    return cols;
}

// All chain maps dom -> cod as packed vectors (kernel span of the chain
// condition).
std::vector<std::vector<Element>> all_map_vectors(
    const Complex& dom, const Complex& cod, const std::vector<Element>& elems,
    long& budget, PackedShape& shape_out) {
    const RingId& ring = dom.ring;
    PackedShape in = pack_shape(dom, cod, 0);
    PackedShape out = pack_shape(dom, cod, 1);
    shape_out = in;
    if (in.total == 0)
        return {std::vector<Element>()};
    std::vector<std::vector<Element>> gens;
    if (out.total == 0) {
        for (int v = 0; v < in.total; ++v) {
            std::vector<Element> e(static_cast<size_t>(in.total),
                                   ring_zero(ring));
            e[static_cast<size_t>(v)] = ring_one(ring);
            gens.push_back(e);
        }
    } else {
        std::vector<std::vector<Element>> cols;
        for (int v = 0; v < in.total; ++v) {
            std::vector<Element> e(static_cast<size_t>(in.total),
                                   ring_zero(ring));
            e[static_cast<size_t>(v)] = ring_one(ring);
            cols.push_back(apply_chain_condition(in, out, e));
        }
        Matrix cond = columns_matrix(ring, out.total, cols);
        gens = matrix_columns(kernel(cond));
    }
    return span_of(ring, in.total, gens, elems, budget);
}

// All null perturbations d h + h d of maps dom -> cod, packed, deduplicated.
std::vector<std::vector<Element>> null_vectors(const Complex& dom,
                                               const Complex& cod,
                                               const std::vector<Element>& elems,
                                               long& budget) {
    const RingId& ring = dom.ring;
    PackedShape hsh = pack_shape(dom, cod, -1);
    PackedShape msh = pack_shape(dom, cod, 0);
    std::vector<std::vector<Element>> gens;
    for (int v = 0; v < hsh.total; ++v) {
        std::vector<Element> e(static_cast<size_t>(hsh.total), ring_zero(ring));
        e[static_cast<size_t>(v)] = ring_one(ring);
        std::vector<Element> img = apply_homotopy_boundary(hsh, msh, e);
        bool zero = true;
        for (const Element& t : img)
            if (!is_zero(t)) zero = false;
        if (!zero) gens.push_back(img);
    }
    return span_of(ring, msh.total, gens, elems, budget);
}

// Quasi-isomorphic self-maps of c, one representative per homotopy class.
std::vector<ChainMap> qis_classes(const Complex& c,
                                  const std::vector<Element>& elems,
                                  long& budget) {
    PackedShape shape;
    auto maps = all_map_vectors(c, c, elems, budget, shape);
    auto nulls = null_vectors(c, c, elems, budget);
    spend(budget, static_cast<long>(maps.size()));
    std::map<std::string, std::vector<Element>> reps;
    for (const auto& m : maps) {
        std::string best;
        for (const auto& n : nulls) {
            std::string k = key_of(vec_add(m, n));
            if (best.empty() || k < best) best = k;
        }
        if (nulls.empty()) best = key_of(m);
        if (!reps.count(best)) reps[best] = m;
    }
    std::vector<ChainMap> out;
    for (const auto& kv : reps) {
        ChainMap f{c, c, unpack_comps(shape, kv.second)};
        if (is_qis(f)) out.push_back(f);
    }
    return out;
}

// All complexes over the window with total rank <= max_rank: rank vectors
// with nonzero ends at every placement, all differentials with d*d = 0.
std::vector<Complex> all_complexes(const RingId& ring, int max_rank, int deg_lo,
                                   int deg_hi, const std::vector<Element>& elems,
                                   long& budget) {
    std::vector<Complex> out;
    out.push_back(zero_complex(ring));
    int width = deg_hi - deg_lo + 1;
    // Enumerate rank vectors of each length with nonzero first and last entry.
    for (int len = 1; len <= width; ++len) {
        for (int lo = deg_lo; lo + len - 1 <= deg_hi; ++lo) {
            std::vector<int> ranks(static_cast<size_t>(len), 0);
            std::function<void(int, int)> rec = [&](int pos, int used) {
                if (pos == len) {
                    if (ranks.front() == 0 || ranks.back() == 0) return;
                    // enumerate differentials degree by degree
                    std::vector<Matrix> diffs(static_cast<size_t>(len - 1),
                                              Matrix(ring, 0, 0));
                    std::function<void(int)> drec = [&](int di) {
                        if (di == len - 1) {
                            try {
                                out.push_back(make_complex(ring, lo, ranks, diffs));
                            } catch (const DomainError&) {
                            }
                            return;
                        }
                        int r = ranks[static_cast<size_t>(di + 1)];
                        int c = ranks[static_cast<size_t>(di)];
                        long cells = static_cast<long>(r) * c;
                        long count = 1;
                        for (long t = 0; t < cells; ++t) {
                            count *= static_cast<long>(elems.size());
                            if (count > budget)
                                throw DomainError("enumeration bounds too large");
                        }
                        spend(budget, count);
                        Matrix m(ring, r, c);
                        std::vector<size_t> idx(static_cast<size_t>(cells), 0);
                        while (true) {
                            for (long t = 0; t < cells; ++t)
                                m.entries[static_cast<size_t>(t)] =
                                    elems[idx[static_cast<size_t>(t)]];
                            diffs[static_cast<size_t>(di)] = m;
                            drec(di + 1);
                            long g = 0;
                            while (g < cells &&
                                   ++idx[static_cast<size_t>(g)] == elems.size())
                                idx[static_cast<size_t>(g++)] = 0;
                            if (g == cells) break;
                            if (cells == 0) break;
                        }
                        if (cells == 0) {
                            diffs[static_cast<size_t>(di)] = Matrix(ring, r, c);
                        }
                    };
                    drec(0);
                    return;
                }
                int cap = max_rank - used;
                int min = 0;
                for (int v = min; v <= cap; ++v) {
                    ranks[static_cast<size_t>(pos)] = v;
                    rec(pos + 1, used + v);
                }
                ranks[static_cast<size_t>(pos)] = 0;
            };
            rec(0, 0);
        }
    }
    // Deduplicate: interior-zero vectors can produce equal trimmed complexes
    // from different placements.
    std::set<std::string> seen;
    std::vector<Complex> uniq;
    for (const Complex& c : out) {
        std::ostringstream os;
        os << cx_summary(c);
        for (int i = c.lo; i < c.hi; ++i) os << "|" << format_matrix(c.d(i));
        if (seen.insert(os.str()).second) uniq.push_back(c);
    }
    return uniq;
}

// --- random generation ----------------------------------------------------------

std::vector<Element> small_units(const RingId& ring) {
    UnitGroup g = enumerate_units(ring);
    if (g.finite) return g.elements;
    if (ring.kind == RingKind::Rat) {
        std::vector<Element> out;
        for (const char* s : {"1", "-1", "2", "-2", "1/2", "3", "2/3", "5"})
            out.push_back(parse_element(ring, s));
        return out;
    }
    throw DomainError("no unit sample list for ring " + ring.tag());
}

std::vector<Element> nonzero_values(const RingId& ring) {
    if (ring.is_finite()) {
        std::vector<Element> out;
        for (const Element& e : ring_elements(ring))
            if (!is_zero(e)) out.push_back(e);
        return out;
    }
    std::vector<Element> out;
    if (ring.kind == RingKind::Int) {
        for (long v : {1, -1, 2, 3, 5, -2, 6}) out.push_back(from_int(ring, v));
        return out;
    }
    if (ring.kind == RingKind::Rat) {
        for (const char* s : {"1", "-1", "2", "3", "5", "1/2", "2/3", "-3"})
            out.push_back(parse_element(ring, s));
        return out;
    }
    throw DomainError("no value sample list for ring " + ring.tag());
}

long draw(std::mt19937_64& rng, long n) {
    return static_cast<long>(rng() % static_cast<std::uint64_t>(n));
}

Element small_entry(const RingId& ring, std::mt19937_64& rng) {
    switch (ring.kind) {
        case RingKind::PrimeField:
        case RingKind::LocalZ:
            return from_int(ring, draw(rng, ring.modulus().get_si()));
        case RingKind::DualNum:
            return make_element(ring, draw(rng, ring.p), draw(rng, ring.p));
        default:
            return from_int(ring, draw(rng, 5) - 2);
    }
}

// Conjugate every degree by an invertible coordinate change; the result is a
// different presentation of the same complex up to isomorphism.
Complex conjugate_complex(const Complex& c, const std::map<int, Matrix>& u,
                          const std::map<int, Matrix>& uinv) {
    if (c.empty()) return c;
    std::vector<Matrix> diffs;
    for (int i = c.lo; i < c.hi; ++i)
        diffs.push_back(
            mat_mul(u.at(i + 1), mat_mul(c.d(i), uinv.at(i))));
    return make_complex(c.ring, c.lo, c.ranks, diffs);
}

std::pair<std::map<int, Matrix>, std::map<int, Matrix>> random_coordinates(
    const Complex& c, std::mt19937_64& rng) {
    std::map<int, Matrix> u, uinv;
    for (int i = c.lo; i <= c.hi; ++i) {
        Matrix m = random_invertible(c.ring, c.rank(i), rng);
        u[i] = m;
        auto inv = inverse_matrix(m);
        if (!inv) throw DomainError("internal: random coordinate not invertible");
        uinv[i] = *inv;
    }
    return {u, uinv};
}

Complex densify(const Complex& c, std::mt19937_64& rng) {
    if (c.empty()) return c;
    auto [u, uinv] = random_coordinates(c, rng);
    return conjugate_complex(c, u, uinv);
}

Complex random_pieces(const RingId& ring, int max_total, int deg_lo, int deg_hi,
                      std::mt19937_64& rng, bool acyclic) {
    Complex acc = zero_complex(ring);
    auto units = small_units(ring);
    auto values = acyclic ? units : nonzero_values(ring);
    int room = max_total;
    while (room >= 2) {
        bool two_term = acyclic || deg_hi == deg_lo || draw(rng, 3) != 0;
        if (two_term && deg_hi > deg_lo) {
            int d = deg_lo + static_cast<int>(draw(rng, deg_hi - deg_lo));
            Matrix m(ring, 1, 1);
            m.at(0, 0) = values[static_cast<size_t>(draw(
                rng, static_cast<long>(values.size())))];
            acc = direct_sum(acc, make_complex(ring, d, {1, 1}, {m}));
        } else {
            // a pair of one-term summands in opposite parities
            std::vector<int> evens, odds;
            for (int d = deg_lo; d <= deg_hi; ++d)
                ((d % 2 + 2) % 2 == 0 ? evens : odds).push_back(d);
            if (evens.empty() || odds.empty()) break;
            int de = evens[static_cast<size_t>(
                draw(rng, static_cast<long>(evens.size())))];
            int dodd = odds[static_cast<size_t>(
                draw(rng, static_cast<long>(odds.size())))];
            acc = direct_sum(acc, one_term(ring, de));
            acc = direct_sum(acc, one_term(ring, dodd));
        }
        room -= 2;
        if (draw(rng, 4) == 0) break;
    }
    return densify(acc, rng);
}

// --- sampler building blocks ----------------------------------------------------

// A random chain map dom -> cod: a small random combination of the kernel
// generators of the chain condition.
ChainMap random_chain_map(const Complex& dom, const Complex& cod,
                          std::mt19937_64& rng) {
    const RingId& ring = dom.ring;
    PackedShape in = pack_shape(dom, cod, 0);
    PackedShape out = pack_shape(dom, cod, 1);
    if (in.total == 0) return zero_map(dom, cod);
    std::vector<Element> x(static_cast<size_t>(in.total), ring_zero(ring));
    if (out.total == 0) {
        for (auto& e : x) e = small_entry(ring, rng);
    } else {
        std::vector<std::vector<Element>> cols;
        for (int v = 0; v < in.total; ++v) {
            std::vector<Element> e(static_cast<size_t>(in.total),
                                   ring_zero(ring));
            e[static_cast<size_t>(v)] = ring_one(ring);
            cols.push_back(apply_chain_condition(in, out, e));
        }
        Matrix k = kernel(columns_matrix(ring, out.total, cols));
        for (int j = 0; j < k.cols; ++j) {
            Element cj = small_entry(ring, rng);
            for (int i = 0; i < k.rows; ++i)
                x[static_cast<size_t>(i)] =
                    add(x[static_cast<size_t>(i)], mul(cj, k.at(i, j)));
        }
    }
    return ChainMap{dom, cod, unpack_comps(in, x)};
}

// f plus a random null-homotopic perturbation.
ChainMap perturb(const ChainMap& f, std::mt19937_64& rng) {
    const Complex& dom = f.dom;
    const Complex& cod = f.cod;
    std::map<int, Matrix> h;
    for (int i = dom.lo; i <= dom.hi; ++i) {
        int r = cod.rank(i - 1), c = dom.rank(i);
        if (r == 0 || c == 0) continue;
        Matrix m(dom.ring, r, c);
        for (auto& e : m.entries) e = small_entry(dom.ring, rng);
        h[i] = m;
    }
    std::map<int, Matrix> comps;
    Homotopy ht{h};
    for (int i = std::min(dom.lo, cod.lo); i <= std::max(dom.hi, cod.hi); ++i) {
        if (dom.rank(i) == 0 || cod.rank(i) == 0) continue;
        Matrix bd = mat_add(mat_mul(cod.d(i - 1), ht.at(dom, cod, i)),
                            mat_mul(ht.at(dom, cod, i + 1), dom.d(i)));
        comps[i] = mat_add(f.at(i), bd);
    }
    return make_chain_map(dom, cod, comps);
}

// Block rung [[u, y], [0, v]] on the middle of glue_ses(A, C, theta), where
// y solves d_A y - y d_C = (u - v) theta.  Falls back to v = u when the
// twist equation has no solution.
ChainMap block_rung(const Ses& s, const Complex& A, const Complex& C,
                    const ChainMap& theta, Element u, Element v) {
    const RingId& ring = A.ring;
    PackedShape ysh = pack_shape(C, A, 0);
    PackedShape osh = pack_shape(C, A, 1);
    std::map<int, Matrix> y;
    Element diff = sub(u, v);
    if (!is_zero(diff) && ysh.total > 0 && osh.total > 0) {
        std::vector<std::vector<Element>> cols;
        for (int t = 0; t < ysh.total; ++t) {
            std::vector<Element> e(static_cast<size_t>(ysh.total),
                                   ring_zero(ring));
            e[static_cast<size_t>(t)] = ring_one(ring);
            cols.push_back(apply_chain_condition(ysh, osh, e));
        }
        std::map<int, Matrix> rhs_comps;
        for (int i : osh.degs) rhs_comps[i] = mat_scale(diff, theta.at(i));
        std::vector<Element> rhs = pack_comps(osh, rhs_comps, ring);
        Matrix m = columns_matrix(ring, osh.total, cols);
        Matrix b(ring, osh.total, 1);
        for (int i = 0; i < osh.total; ++i)
            b.at(i, 0) = rhs[static_cast<size_t>(i)];
        auto sol = solve(m, b);
        if (sol) {
            std::vector<Element> xv;
            for (int i = 0; i < ysh.total; ++i)
                xv.push_back(sol->at(i, 0));
            y = unpack_comps(ysh, xv);
        } else {
            v = u;
        }
    } else if (!is_zero(diff) && osh.total > 0) {
        bool rhs_zero = true;
        for (int i : osh.degs)
            if (!is_zero_matrix(mat_scale(diff, theta.at(i)))) rhs_zero = false;
        if (!rhs_zero) v = u;
    }
    std::map<int, Matrix> comps;
    const Complex& mid = s.mid;
    for (int i = mid.lo; i <= mid.hi; ++i) {
        int ra = A.rank(i), rc = C.rank(i);
        if (ra + rc == 0) continue;
        Matrix ublock = mat_scale(u, mat_identity(ring, ra));
        Matrix vblock = mat_scale(v, mat_identity(ring, rc));
        Matrix yblock(ring, ra, rc);
        auto it = y.find(i);
        if (it != y.end()) yblock = it->second;
        Matrix top = hstack(ublock, yblock);
        Matrix bot = hstack(Matrix(ring, rc, ra), vblock);
        comps[i] = vstack(top, bot);
    }
    return make_chain_map(s.mid, s.mid, comps);
}

ChainMap coords_map(const Complex& from, const Complex& to,
                    const std::map<int, Matrix>& u) {
    std::map<int, Matrix> comps;
    for (const auto& kv : u)
        if (kv.second.rows > 0 && kv.second.cols > 0) comps[kv.first] = kv.second;
    return make_chain_map(from, to, comps);
}

// --- chi_rel internals -----------------------------------------------------------

struct ChiData {
    Complex cs;
    std::vector<Cohomology> hs;
    int h = 0;
};

int hfree(const std::vector<Cohomology>& hs, const Complex& cs, int i) {
    if (i < cs.lo || i > cs.hi) return 0;
    return hs[static_cast<size_t>(i - cs.lo)].free_rank;
}

ChiData chi_data(const Complex& c, const RelPair& pair) {
    if (c.ring != pair.r)
        throw DomainError("complex is over " + c.ring.tag() +
                          ", not the pair's base " + pair.r.tag());
    if (!pair.s.is_field())
        throw DomainError("chi_rel needs a field on the S side, got " +
                          pair.s.tag());
    if (euler_char(c) != 0)
        throw DomainError("chi_rel needs Euler characteristic 0, got " +
                          std::to_string(euler_char(c)));
    ChiData d;
    d.cs = base_change(c, pair.s);
    d.hs = cohomology(d.cs);
    int ev = 0, od = 0;
    for (int i = d.cs.lo; i <= d.cs.hi; ++i) {
        const Cohomology& hc = d.hs[static_cast<size_t>(i - d.cs.lo)];
        if (!hc.torsion.empty())
            throw DomainError("internal: torsion cohomology over a field");
        (((i % 2) + 2) % 2 == 0 ? ev : od) += hc.free_rank;
    }
    if (ev != od) throw DomainError("no trivialization exists: dim mismatch");
    d.h = ev;
    return d;
}

void validate_trivialization(const ChiData& d, const RelPair& pair,
                             const std::optional<Matrix>& t) {
    if (d.h == 0) {
        if (t) throw DomainError("trivialization supplied but cohomology is 0");
        return;
    }
    if (!t)
        throw DomainError("trivialization required: cohomology has dimension " +
                          std::to_string(d.h));
    if (t->ring != pair.s || t->rows != d.h || t->cols != d.h)
        throw DomainError("trivialization must be " + std::to_string(d.h) + "x" +
                          std::to_string(d.h) + " over " + pair.s.tag());
}

// The reordering unit det H -> det H^ev (x) (det H^od)^(-1) in the engine's
// own sign bookkeeping.
Element split_scalar(const ChiData& d) {
    const RingId& ring = d.cs.ring;
    Word w(ring);
    for (int i = d.cs.lo; i <= d.cs.hi; ++i) {
        int hi = hfree(d.hs, d.cs, i);
        if (hi == 0) continue;
        int exp = (((i % 2) + 2) % 2 == 0) ? 1 : -1;
        w = word_mul(w, word_factor(ring, term_line("H", i), hi, exp));
    }
    Word target(ring);
    for (int par = 0; par <= 1; ++par) {
        for (int i = d.cs.lo; i <= d.cs.hi; ++i) {
            if (((i % 2) + 2) % 2 != par) continue;
            int hi = hfree(d.hs, d.cs, i);
            if (hi == 0) continue;
            target = word_mul(target, word_factor(ring, term_line("H", i), hi,
                                                  par == 0 ? 1 : -1));
        }
    }
    return reduce_to_scalar(word_mul(w, word_inv(target)));
}

Element chi_rel_unit(const ChiData& d, const RelPair& pair,
                     const std::optional<Matrix>& t, EulerRoute route,
                     const PivotPolicy& policy) {
    Element e = ring_one(pair.s);
    switch (route) {
        case EulerRoute::Split:
            e = euler_iso_split(d.cs, policy);
            break;
        case EulerRoute::Truncate:
            e = euler_iso_truncate(d.cs, policy);
            break;
        case EulerRoute::Both: {
            Element a = euler_iso_split(d.cs, policy);
            Element b = euler_iso_truncate(d.cs, policy);
            if (a != b) throw DomainError("euler routes disagree");
            e = a;
            break;
        }
    }
    Element val = mul(e, split_scalar(d));
    if (t) {
        Element dt = det(*t, policy);
        if (!is_unit(dt)) throw DomainError("singular trivialization");
        val = mul(val, dt);
    }
    return mul(val, canonical_unit_structure(pair.s, d.h));
}

}  // namespace

// --- scenarios -------------------------------------------------------------------

ChainMap connecting_map(const Ses& s, const PivotPolicy& policy) {
    const RingId& ring = s.mid.ring;
    Complex target = shift(s.sub, 1);
    std::map<int, Matrix> sections, retractions;
    for (int i = s.mid.lo; i <= s.mid.hi; ++i) {
        int mr = s.mid.rank(i);
        if (mr == 0) continue;
        int qr = s.quot.rank(i), sr = s.sub.rank(i);
        Matrix sigma(ring, mr, qr);
        if (qr > 0) {
            auto sol = solve(s.proj.at(i), mat_identity(ring, qr), policy);
            if (!sol) throw DomainError("projection has no section");
            sigma = *sol;
        }
        sections[i] = sigma;
        Matrix split = hstack(s.inc.at(i), sigma);
        auto inv = inverse_matrix(split, policy);
        if (!inv) throw DomainError("splitting is not an isomorphism");
        retractions[i] = first_rows_of(*inv, sr);
    }
    std::map<int, Matrix> comps;
    for (int i = s.quot.lo; i <= s.quot.hi; ++i) {
        if (s.quot.rank(i) == 0 || s.sub.rank(i + 1) == 0) continue;
        comps[i] = mat_mul(retractions.at(i + 1),
                           mat_mul(s.mid.d(i), sections.at(i)));
    }
    return make_chain_map(s.quot, target, comps);
}

TriangleIsoScenario make_scenario(const Ses& d1, const Ses& d2,
                                  const ChainMap& a, const ChainMap& b,
                                  const ChainMap& c) {
    bool shapes = a.dom == d1.sub && a.cod == d2.sub && b.dom == d1.mid &&
                  b.cod == d2.mid && c.dom == d1.quot && c.cod == d2.quot;
    if (!shapes)
        throw DomainError("ladder rungs do not match the two sequences");
    if (!is_qis(a)) throw DomainError("rung on the subobjects is not a qis");
    if (!is_qis(b)) throw DomainError("rung on the middles is not a qis");
    if (!is_qis(c)) throw DomainError("rung on the quotients is not a qis");
    auto h1 = homotopy_between(compose(d2.inc, a), compose(b, d1.inc));
    if (!h1) throw DomainError("inclusion square fails to homotopy-commute");
    auto h2 = homotopy_between(compose(d2.proj, b), compose(c, d1.proj));
    if (!h2) throw DomainError("projection square fails to homotopy-commute");
    ChainMap conn1 = connecting_map(d1);
    ChainMap conn2 = connecting_map(d2);
    auto h3 = homotopy_between(compose(shift_map(a, 1), conn1),
                               compose(conn2, c));
    if (!h3) throw DomainError("connecting square fails to homotopy-commute");
    return TriangleIsoScenario{d1, d2, a, b, c, *h1, *h2, *h3};
}

void check_scenario(const TriangleIsoScenario& scn) {
    const Ses& d1 = scn.d1;
    const Ses& d2 = scn.d2;
    bool shapes = scn.a.dom == d1.sub && scn.a.cod == d2.sub &&
                  scn.b.dom == d1.mid && scn.b.cod == d2.mid &&
                  scn.c.dom == d1.quot && scn.c.cod == d2.quot;
    if (!shapes)
        throw DomainError("ladder rungs do not match the two sequences");
    if (!is_qis(scn.a) || !is_qis(scn.b) || !is_qis(scn.c))
        throw DomainError("a ladder rung is not a quasi-isomorphism");
    if (!check_homotopy(compose(d2.inc, scn.a), compose(scn.b, d1.inc),
                        scn.h_sub))
        throw DomainError("stored witness fails on the inclusion square");
    if (!check_homotopy(compose(d2.proj, scn.b), compose(scn.c, d1.proj),
                        scn.h_quot))
        throw DomainError("stored witness fails on the projection square");
    ChainMap conn1 = connecting_map(d1);
    ChainMap conn2 = connecting_map(d2);
    if (!check_homotopy(compose(shift_map(scn.a, 1), conn1),
                        compose(conn2, scn.c), scn.h_conn))
        throw DomainError("stored witness fails on the connecting square");
}

HarvestedRelation harvest(const TriangleIsoScenario& scn) {
    check_scenario(scn);
    Element num = mul(mul(det_qis(scn.a), det_qis(scn.c)), det_ses(scn.d2));
    Element den = mul(det_ses(scn.d1), det_qis(scn.b));
    auto deninv = inverse(den);
    if (!deninv) throw DomainError("internal: non-unit denominator in harvest");
    Element ratio = mul(num, *deninv);
    std::ostringstream os;
    os << "ring=" << scn.d1.sub.ring.tag() << " sub=" << cx_summary(scn.d1.sub)
       << " quot=" << cx_summary(scn.d1.quot)
       << " mid=" << cx_summary(scn.d1.mid) << " a={" << map_summary(scn.a)
       << "} b={" << map_summary(scn.b) << "} c={" << map_summary(scn.c) << "}";
    return HarvestedRelation{ratio, os.str()};
}

std::vector<HarvestedRelation> enumerate_relations(const RingId& ring,
                                                   int max_rank, int deg_lo,
                                                   int deg_hi) {
    if (!ring.is_finite())
        throw DomainError("relation enumeration needs a finite ring");
    if (max_rank < 0 || deg_lo > deg_hi)
        throw DomainError("empty enumeration bounds");
    long budget = 1000000;
    auto elems = ring_elements(ring);
    auto cxs = all_complexes(ring, max_rank, deg_lo, deg_hi, elems, budget);
    // Self-map classes, computed only for complexes that occur in a scanned
    // pair.
    std::map<size_t, std::vector<ChainMap>> class_cache;
    auto classes_of = [&](size_t i) -> const std::vector<ChainMap>& {
        auto it = class_cache.find(i);
        if (it == class_cache.end())
            it = class_cache.emplace(i, qis_classes(cxs[i], elems, budget))
                     .first;
        return it->second;
    };
    std::map<std::string, HarvestedRelation> found;
    long scenarios = 0;
    for (size_t ia = 0; ia < cxs.size(); ++ia) {
        const Complex& A = cxs[ia];
        Complex a1 = shift(A, 1);
        for (size_t ic = 0; ic < cxs.size(); ++ic) {
            const Complex& C = cxs[ic];
            if (total_rank(A) + total_rank(C) > max_rank) continue;
            // When either outer term vanishes the projection (or inclusion)
            // square forces b homotopic to the surviving rung, so the ratio
            // is 1 by homotopy invariance of det_qis; nothing to harvest.
            if (A.empty() || C.empty()) continue;
            PackedShape tshape;
            auto tvecs = all_map_vectors(C, a1, elems, budget, tshape);
            for (const auto& tv : tvecs) {
                ChainMap theta{C, a1, unpack_comps(tshape, tv)};
                Ses d = glue_ses(A, C, theta);
                auto b_classes = qis_classes(d.mid, elems, budget);
                const auto& a_classes = classes_of(ia);
                const auto& c_classes = classes_of(ic);
                scenarios += static_cast<long>(a_classes.size()) *
                             static_cast<long>(b_classes.size()) *
                             static_cast<long>(c_classes.size());
                if (scenarios > 1000000)
                    throw DomainError("enumeration bounds too large");
                ChainMap conn = connecting_map(d);
                for (const ChainMap& a : a_classes) {
                    ChainMap inc_a = compose(d.inc, a);
                    ChainMap conn_a = compose(shift_map(a, 1), conn);
                    for (const ChainMap& b : b_classes) {
                        auto h1 = homotopy_between(inc_a, compose(b, d.inc));
                        if (!h1) continue;
                        ChainMap proj_b = compose(d.proj, b);
                        for (const ChainMap& c : c_classes) {
                            auto h2 = homotopy_between(proj_b,
                                                       compose(c, d.proj));
                            if (!h2) continue;
                            auto h3 = homotopy_between(conn_a,
                                                       compose(conn, c));
                            if (!h3) continue;
                            TriangleIsoScenario scn{d, d, a, b, c,
                                                    *h1, *h2, *h3};
                            HarvestedRelation rel = harvest(scn);
                            if (is_one(rel.ratio)) continue;
                            std::string key = format_element(rel.ratio);
                            if (!found.count(key)) found[key] = rel;
                        }
                    }
                }
            }
        }
    }
    std::vector<HarvestedRelation> out;
    for (const auto& kv : found) out.push_back(kv.second);
    return out;
}

std::vector<HarvestedRelation> sample_relations(const RingId& ring, int count,
                                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto units = small_units(ring);
    std::map<std::string, HarvestedRelation> found;
    for (int trial = 0; trial < count; ++trial) {
        Complex A = random_pieces(ring, 3, -1, 2, rng, false);
        Complex C = random_pieces(ring, 3, -1, 2, rng, false);
        ChainMap theta = random_chain_map(C, shift(A, 1), rng);
        Ses d1 = glue_ses(A, C, theta);
        Element u = units[static_cast<size_t>(
            draw(rng, static_cast<long>(units.size())))];
        Element v = units[static_cast<size_t>(
            draw(rng, static_cast<long>(units.size())))];
        ChainMap b0 = block_rung(d1, A, C, theta, u, v);
        // recover the (possibly clamped) diagonal units of the block rung
        Element ue = u, ve = u;
        if (!d1.mid.empty()) {
            ve = v;
            bool clamped = false;
            for (int i = C.lo; i <= C.hi && !clamped; ++i) {
                if (C.rank(i) == 0) continue;
                int ra = A.rank(i);
                Matrix comp = b0.at(i);
                if (comp.rows == 0) continue;
                if (comp.at(ra, ra) != v) clamped = true;
            }
            if (clamped) ve = u;
        }
        ChainMap a0 = scalar_map(A, ue);
        ChainMap c0 = scalar_map(C, ve);
        int mode = trial % 3;
        Ses d2 = d1;
        ChainMap a = a0, b = b0, c = c0;
        if (mode == 1 && !d1.mid.empty()) {
            // change coordinates on sub, quot, and middle coherently
            auto [ua, uainv] = random_coordinates(A, rng);
            auto [uc, ucinv] = random_coordinates(C, rng);
            Complex A2 = conjugate_complex(A, ua, uainv);
            Complex C2 = conjugate_complex(C, uc, ucinv);
            std::map<int, Matrix> t2;
            for (int i = C.lo; i <= C.hi; ++i) {
                if (C.rank(i) == 0 || A.rank(i + 1) == 0) continue;
                t2[i] = mat_mul(ua.at(i + 1), mat_mul(theta.at(i), ucinv.at(i)));
            }
            Complex a21 = shift(A2, 1);
            ChainMap theta2 = make_chain_map(C2, a21, t2);
            d2 = glue_ses(A2, C2, theta2);
            std::map<int, Matrix> bcomps;
            for (int i = d1.mid.lo; i <= d1.mid.hi; ++i) {
                int ra = A.rank(i), rc = C.rank(i);
                if (ra + rc == 0) continue;
                Matrix ublock =
                    (ra > 0) ? ua.at(i) : Matrix(ring, 0, 0);
                Matrix vblock =
                    (rc > 0) ? uc.at(i) : Matrix(ring, 0, 0);
                bcomps[i] = block_diag(ublock, vblock);
            }
            ChainMap p = make_chain_map(d1.mid, d2.mid, bcomps);
            a = compose(coords_map(A, A2, ua), a0);
            b = compose(p, b0);
            c = compose(coords_map(C, C2, uc), c0);
        } else if (mode == 2 && !d1.mid.empty()) {
            // change coordinates on the middle term only
            auto [um, uminv] = random_coordinates(d1.mid, rng);
            Complex mid2 = conjugate_complex(d1.mid, um, uminv);
            ChainMap p = coords_map(d1.mid, mid2, um);
            ChainMap pinv = coords_map(mid2, d1.mid, uminv);
            d2 = make_ses(compose(p, d1.inc), compose(d1.proj, pinv));
            b = compose(p, b0);
        }
        a = perturb(a, rng);
        b = perturb(b, rng);
        c = perturb(c, rng);
        TriangleIsoScenario scn = make_scenario(d1, d2, a, b, c);
        HarvestedRelation rel = harvest(scn);
        if (is_one(rel.ratio)) continue;
        std::string key = format_element(rel.ratio);
        if (!found.count(key)) found[key] = rel;
    }
    std::vector<HarvestedRelation> out;
    for (const auto& kv : found) out.push_back(kv.second);
    return out;
}

// --- the collapse certificate -----------------------------------------------------

CollapseCertificate collapse_certificate(long p) {
    if (!is_prime(p)) throw DomainError("collapse needs a prime");
    CollapseCertificate cert;
    cert.p = p;
    cert.ring = RingId::Dual(p);
    cert.eps = make_element(cert.ring, 1, 1);
    Complex B = one_term(cert.ring, 0);
    Matrix em(cert.ring, 1, 1);
    em.at(0, 0) = make_element(cert.ring, 0, 1);
    ChainMap epsilon = make_chain_map(B, B, {{0, em}});
    Complex mid = cone(epsilon);
    Ses delta = make_ses(cone_inclusion(epsilon), cone_projection(epsilon));
    ChainMap a = scalar_map(B, cert.eps);
    ChainMap b = identity_map(mid);
    ChainMap c = identity_map(delta.quot);
    cert.scenario = make_scenario(delta, delta, a, b, c);
    cert.ratio = harvest(cert.scenario).ratio;
    UnitGroup units = enumerate_units(cert.ring);
    cert.unit_group_order = static_cast<long>(units.elements.size());
    cert.eps_order = unit_order(cert.eps);
    cert.quotient = quotient_units(units, {cert.ratio});
    cert.k1_nontrivial = !is_one(cert.eps);
    cert.not_injective = cert.quotient.quotient_order < cert.unit_group_order;
    std::ostringstream l1, l2, l3, l4;
    l1 << "K1 of the base ring is its unit group, of order "
       << cert.unit_group_order << "; the unit " << format_element(cert.eps)
       << " is distinct from 1 and has order " << cert.eps_order << ".";
    l2 << "The ladder on 0 -> R -> cone(e) -> R[1] -> 0 scaling the subobject by "
       << format_element(cert.eps)
       << " identifies two morphisms of determinant lines whose ratio is "
       << format_element(cert.ratio) << "; the quotient forces that unit to 1.";
    l3 << "The unit group modulo the subgroup generated by the relation has "
          "order "
       << cert.quotient.quotient_order << " < " << cert.unit_group_order
       << ", so the induced map on unit groups is not injective.";
    l4 << "Order counting: before the identification every line carries "
       << cert.unit_group_order << " automorphisms, afterwards only "
       << cert.quotient.quotient_order
       << "; no equivalence of the two categories can exist.";
    cert.conclusion = {l1.str(), l2.str(), l3.str(), l4.str()};
    return cert;
}

void verify_certificate(const CollapseCertificate& cert) {
    if (!is_prime(cert.p))
        throw DomainError("certificate prime is not prime");
    if (cert.ring != RingId::Dual(cert.p))
        throw DomainError("certificate ring mismatch");
    if (cert.eps != make_element(cert.ring, 1, 1))
        throw DomainError("certificate unit is not 1+e");
    check_scenario(cert.scenario);
    Element ratio = harvest(cert.scenario).ratio;
    if (ratio != cert.ratio)
        throw DomainError("certificate ratio does not re-derive");
    UnitGroup units = enumerate_units(cert.ring);
    if (cert.unit_group_order != static_cast<long>(units.elements.size()) ||
        cert.unit_group_order != cert.p * (cert.p - 1))
        throw DomainError("certificate unit group order mismatch");
    if (cert.eps_order != unit_order(cert.eps) || cert.eps_order != cert.p)
        throw DomainError("certificate unit order mismatch");
    if (!cert.k1_nontrivial || is_one(cert.eps))
        throw DomainError("certificate K1 verdict mismatch");
    QuotientReport q = quotient_units(units, {cert.ratio});
    if (q.group_order != cert.quotient.group_order ||
        q.subgroup_order != cert.quotient.subgroup_order ||
        q.quotient_order != cert.quotient.quotient_order ||
        q.quotient_invariants != cert.quotient.quotient_invariants ||
        q.injective != cert.quotient.injective)
        throw DomainError("certificate quotient report does not re-derive");
    if (cert.quotient.quotient_order != cert.p - 1)
        throw DomainError("certificate quotient order is not p-1");
    if (!cert.not_injective ||
        cert.quotient.quotient_order >= cert.unit_group_order)
        throw DomainError("certificate injectivity verdict mismatch");
}

std::string format_certificate(const CollapseCertificate& cert) {
    std::ostringstream os;
    os << "collapse_certificate\n";
    os << "prime = " << cert.p << "\n";
    os << "ring = " << cert.ring.tag() << "\n";
    os << "unit_group_order = " << cert.unit_group_order << "\n";
    os << "epsilon = " << format_element(cert.eps) << "\n";
    os << "epsilon_order = " << cert.eps_order << "\n";
    os << "k1_nontrivial = " << (cert.k1_nontrivial ? "true" : "false") << "\n";
    os << "scenario_sub = " << cx_summary(cert.scenario.d1.sub) << "\n";
    os << "scenario_mid = " << cx_summary(cert.scenario.d1.mid) << "\n";
    os << "scenario_quot = " << cx_summary(cert.scenario.d1.quot) << "\n";
    os << "rung_a = " << map_summary(cert.scenario.a) << "\n";
    os << "rung_b = " << map_summary(cert.scenario.b) << "\n";
    os << "rung_c = " << map_summary(cert.scenario.c) << "\n";
    os << "ratio = " << format_element(cert.ratio) << "\n";
    os << "relation_subgroup_order = " << cert.quotient.subgroup_order << "\n";
    os << "quotient_order = " << cert.quotient.quotient_order << "\n";
    os << "quotient_invariants = [";
    for (size_t i = 0; i < cert.quotient.quotient_invariants.size(); ++i)
        os << (i ? "," : "") << cert.quotient.quotient_invariants[i];
    os << "]\n";
    os << "collapsed_pairs = " << cert.quotient.collapsed_pairs.size() << "\n";
    os << "not_injective = " << (cert.not_injective ? "true" : "false") << "\n";
    for (const std::string& line : cert.conclusion)
        os << "conclusion = " << line << "\n";
    return os.str();
}

std::string complex_summary(const Complex& c) { return cx_summary(c); }

std::string chain_map_summary(const ChainMap& f) { return map_summary(f); }

// --- Euler characteristics ----------------------------------------------------------

long chi_k0(const Complex& c) { return euler_char(c); }

RelK0Class chi_rel_route(const Complex& c, const RelPair& pair,
                         const std::optional<Matrix>& t, EulerRoute route,
                         const PivotPolicy& policy) {
    ChiData d = chi_data(c, pair);
    validate_trivialization(d, pair, t);
    Element val = chi_rel_unit(d, pair, t, route, policy);
    return class_of(make_fiber_obj(pair, 0, val));
}

RelK0Class chi_rel(const Complex& c, const RelPair& pair,
                   const std::optional<Matrix>& t, const PivotPolicy& policy) {
    return chi_rel_route(c, pair, t, EulerRoute::Both, policy);
}

int chi_rel_rank(const Complex& c, const RelPair& pair) {
    return chi_data(c, pair).h;
}

std::optional<Matrix> direct_sum_trivialization(
    const Complex& c1, const Complex& c2, const std::optional<Matrix>& t1,
    const std::optional<Matrix>& t2, const RelPair& pair,
    const PivotPolicy& policy) {
    ChiData d1 = chi_data(c1, pair);
    ChiData d2 = chi_data(c2, pair);
    validate_trivialization(d1, pair, t1);
    validate_trivialization(d2, pair, t2);
    Complex sum = direct_sum(c1, c2);
    ChiData ds = chi_data(sum, pair);
    if (ds.h == 0) return std::nullopt;
    const RingId& s = pair.s;
    // For each parity: the matrix taking sum-basis coordinates of the even
    // (resp. odd) cohomology to coordinates in the block bases of the
    // summands, stacked complex-major (all of c1's degrees, then c2's).
    Matrix n_par[2] = {Matrix(s, 0, 0), Matrix(s, 0, 0)};
    for (int par = 0; par <= 1; ++par) {
        // totals per summand for the complex-major layout
        int tot1 = 0, tot2 = 0;
        for (int i = ds.cs.lo; i <= ds.cs.hi; ++i) {
            if (((i % 2) + 2) % 2 != par) continue;
            tot1 += hfree(d1.hs, d1.cs, i);
            tot2 += hfree(d2.hs, d2.cs, i);
        }
        int tot = tot1 + tot2;
        Matrix m(s, tot, tot);
        int col = 0;     // column offset: degree-major over the sum's basis
        int off1 = 0, off2 = 0;  // row offsets inside the two stacks
        for (int i = ds.cs.lo; i <= ds.cs.hi; ++i) {
            if (((i % 2) + 2) % 2 != par) continue;
            int h1 = hfree(d1.hs, d1.cs, i);
            int h2 = hfree(d2.hs, d2.cs, i);
            int hsum = hfree(ds.hs, ds.cs, i);
            if (hsum != h1 + h2)
                throw DomainError("internal: cohomology of a sum is not a sum");
            if (hsum == 0) continue;
            Matrix reps1 = (h1 > 0)
                               ? d1.hs[static_cast<size_t>(i - d1.cs.lo)]
                                     .representatives
                               : Matrix(s, d1.cs.rank(i), 0);
            Matrix reps2 = (h2 > 0)
                               ? d2.hs[static_cast<size_t>(i - d2.cs.lo)]
                                     .representatives
                               : Matrix(s, d2.cs.rank(i), 0);
            Matrix block = block_diag(reps1, reps2);
            const Matrix& sum_reps =
                ds.hs[static_cast<size_t>(i - ds.cs.lo)].representatives;
            Matrix x = coords_mod_image(block, ds.cs.d(i - 1), sum_reps, policy);
            // scatter: rows 0..h1-1 of x belong to c1's stack, rest to c2's
            for (int j = 0; j < hsum; ++j) {
                for (int r = 0; r < h1; ++r)
                    m.at(off1 + r, col + j) = x.at(r, j);
                for (int r = 0; r < h2; ++r)
                    m.at(tot1 + off2 + r, col + j) = x.at(h1 + r, j);
            }
            col += hsum;
            off1 += h1;
            off2 += h2;
        }
        n_par[par] = m;
    }
    Matrix t_block = block_diag(
        t1 ? *t1 : Matrix(s, 0, 0), t2 ? *t2 : Matrix(s, 0, 0));
    auto n_odd_inv = inverse_matrix(n_par[1], policy);
    if (!n_odd_inv)
        throw DomainError("internal: basis comparison not invertible");
    return mat_mul(*n_odd_inv, mat_mul(t_block, n_par[0]));
}

AdditivityReport chi_rel_additivity_check(const Complex& c1, const Complex& c2,
                                          const std::optional<Matrix>& t1,
                                          const std::optional<Matrix>& t2,
                                          const RelPair& pair) {
    AdditivityReport rep{k0_trivial(pair), k0_trivial(pair), k0_trivial(pair),
                         k0_trivial(pair), false};
    rep.left_class = chi_rel(c1, pair, t1);
    rep.right_class = chi_rel(c2, pair, t2);
    auto ts = direct_sum_trivialization(c1, c2, t1, t2, pair);
    rep.sum_class = chi_rel(direct_sum(c1, c2), pair, ts);
    rep.product = k0_mul(rep.left_class, rep.right_class);
    rep.ok = rep.sum_class == rep.product;
    return rep;
}

// --- seeded generators ------------------------------------------------------------

Complex random_complex(const RingId& ring, int max_total, int deg_lo,
                       int deg_hi, std::mt19937_64& rng) {
    return random_pieces(ring, max_total, deg_lo, deg_hi, rng, false);
}

Complex random_acyclic(const RingId& ring, int max_total, int deg_lo,
                       int deg_hi, std::mt19937_64& rng) {
    return random_pieces(ring, max_total, deg_lo, deg_hi, rng, true);
}

Matrix random_invertible(const RingId& ring, int n, std::mt19937_64& rng) {
    Matrix m = mat_identity(ring, n);
    if (n == 0) return m;
    auto units = small_units(ring);
    for (int i = 0; i < n; ++i)
        m.at(i, i) =
            units[static_cast<size_t>(draw(rng, static_cast<long>(units.size())))];
    // a few random elementary row operations keep the determinant a unit
    for (int pass = 0; pass < 2 * n; ++pass) {
        int i = static_cast<int>(draw(rng, n));
        int j = static_cast<int>(draw(rng, n));
        if (i == j) continue;
        Element f = small_entry(ring, rng);
        for (int k = 0; k < n; ++k)
            m.at(i, k) = add(m.at(i, k), mul(f, m.at(j, k)));
    }
    return m;
}

}  // namespace kdet
