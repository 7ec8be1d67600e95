#include "kdet/detfunctor.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

namespace kdet {

namespace {

int parity_exp(int i) { return (i % 2) ? -1 : 1; }

Matrix first_cols(const Matrix& a, int n) {
    std::vector<int> js(static_cast<size_t>(n));
    std::iota(js.begin(), js.end(), 0);
    return take_cols(a, js);
}

Matrix first_rows(const Matrix& a, int n) {
    std::vector<int> is(static_cast<size_t>(n));
    std::iota(is.begin(), is.end(), 0);
    return take_rows(a, is);
}

Complex zero_d_complex(const RingId& ring, int lo, const std::vector<int>& ranks) {
    std::vector<Matrix> diffs;
    for (size_t i = 0; i + 1 < ranks.size(); ++i)
        diffs.emplace_back(ring, ranks[i + 1], ranks[i]);
    return make_complex(ring, lo, ranks, std::move(diffs));
}

// The un-normalized engine value of a split sequence: substitute every
// middle term by [inclusion | section] and contract.
Element raw_ses(const Ses& s, const PivotPolicy& policy) {
    const Complex& a = s.sub;
    const Complex& b = s.mid;
    const Complex& c = s.quot;
    Word w = word_mul(word_mul(complex_word(a, "A"), complex_word(c, "C")),
                      word_inv(complex_word(b, "B")));
    for (int i = b.lo; i <= b.hi; ++i) {
        if (b.rank(i) == 0) continue;
        auto sec = solve(s.proj.at(i), mat_identity(b.ring, c.rank(i)), policy);
        if (!sec) throw DomainError("internal: split sequence lost its section");
        Matrix t = hstack(s.inc.at(i), *sec);
        w = substitute(w, term_line("B", i),
                       {{term_line("A", i), a.rank(i)}, {term_line("C", i), c.rank(i)}},
                       t);
    }
    return reduce_to_scalar(w);
}

// The acyclic complex with the given rank pattern whose differentials are
// identity blocks: the trailing coordinates of each degree map identically
// onto the leading coordinates of the next, with block sizes forced by
// acyclicity.  Throws if the pattern admits no acyclic complex.
Complex reference_acyclic(const RingId& ring, int lo, const std::vector<int>& ranks) {
    std::vector<int> rb(ranks.size(), 0);  // rank of d at each degree
    int prev = 0;
    for (size_t i = 0; i < ranks.size(); ++i) {
        rb[i] = ranks[i] - prev;
        if (rb[i] < 0 || (i + 1 == ranks.size() && rb[i] != 0))
            throw DomainError("rank pattern admits no acyclic complex");
        prev = rb[i];
    }
    std::vector<Matrix> diffs;
    for (size_t i = 0; i + 1 < ranks.size(); ++i) {
        Matrix d(ring, ranks[i + 1], ranks[i]);
        for (int r = 0; r < rb[i]; ++r) d.at(r, ranks[i] - rb[i] + r) = ring_one(ring);
        diffs.push_back(std::move(d));
    }
    return make_complex(ring, lo, ranks, std::move(diffs));
}

// The pure reordering sign of the rank pattern: the engine value of the
// canonical direct-sum sequence with the same degreewise ranks.  det_ses
// divides by this so that direct sums yield exactly 1.
Element ses_norm_sign(const Ses& s) {
    const Complex& b = s.mid;
    if (b.empty()) return from_int(b.ring, 1);
    std::vector<int> ra, rc;
    for (int i = b.lo; i <= b.hi; ++i) {
        ra.push_back(s.sub.rank(i));
        rc.push_back(s.quot.rank(i));
    }
    Ses flat = sum_ses(zero_d_complex(b.ring, b.lo, ra),
                       zero_d_complex(b.ring, b.lo, rc));
    return raw_ses(flat, {});
}

}  // namespace

long det_obj(const Complex& c) {
    long s = 0;
    for (int i = c.lo; i <= c.hi; ++i)
        s += (i % 2) ? -static_cast<long>(c.rank(i)) : c.rank(i);
    return s;
}

std::string term_line(const std::string& prefix, int degree) {
    return prefix + "." + std::to_string(degree);
}

Word complex_word(const Complex& c, const std::string& prefix) {
    Word w = word_one(c.ring);
    for (int i = c.lo; i <= c.hi; ++i)
        w = word_mul(w, word_factor(c.ring, term_line(prefix, i), c.rank(i),
                                    parity_exp(i)));
    return w;
}

Element torsion_acyclic(const Complex& c, const PivotPolicy& policy) {
    if (!is_acyclic(c)) throw DomainError("torsion requires an acyclic complex");
    Word w = complex_word(c, "C");
    Matrix b_prev(c.ring, 0, 0);
    for (int i = c.lo; i <= c.hi; ++i) {
        SnfResult sn = snf(c.d(i), policy);
        Matrix b_i = first_cols(sn.V, sn.rank);
        Matrix beta = mat_mul(c.d(i - 1), b_prev);
        w = substitute(w, term_line("C", i),
                       {{term_line("t", i - 1), beta.cols},
                        {term_line("t", i), b_i.cols}},
                       hstack(beta, b_i));
        b_prev = b_i;
    }
    return reduce_to_scalar(w);
}

Ses make_ses(const ChainMap& inc, const ChainMap& proj) {
    if (!(inc.cod == proj.dom))
        throw DomainError("split sequence: maps do not share a middle complex");
    ChainMap vinc = make_chain_map(inc.dom, inc.cod, inc.comps);
    ChainMap vproj = make_chain_map(proj.dom, proj.cod, proj.comps);
    const Complex& a = vinc.dom;
    const Complex& b = vinc.cod;
    const Complex& c = vproj.cod;
    int lo = b.lo, hi = b.hi;
    if (!a.empty()) lo = std::min(lo, a.lo), hi = std::max(hi, a.hi);
    if (!c.empty()) lo = std::min(lo, c.lo), hi = std::max(hi, c.hi);
    for (int i = lo; i <= hi; ++i)
        if (a.rank(i) + c.rank(i) != b.rank(i))
            throw DomainError("split sequence: ranks do not add up in degree " +
                              std::to_string(i));
    ChainMap z = compose(vproj, vinc);
    for (const auto& [i, m] : z.comps)
        if (!is_zero_matrix(m))
            throw DomainError("split sequence: composite is not zero in degree " +
                              std::to_string(i));
    for (int i = b.lo; i <= b.hi; ++i) {
        if (b.rank(i) == 0) continue;
        auto sec = solve(vproj.at(i), mat_identity(b.ring, c.rank(i)));
        if (!sec)
            throw DomainError("split sequence: no degreewise section in degree " +
                              std::to_string(i));
        if (!is_unit(det(hstack(vinc.at(i), *sec))))
            throw DomainError(
                "split sequence: [inclusion | section] is not invertible in degree " +
                std::to_string(i));
    }
    return {a, b, c, vinc, vproj};
}

Ses glue_ses(const Complex& a, const Complex& c, const ChainMap& theta) {
    if (a.ring != c.ring) throw DomainError("glued sequence: ring mismatch");
    const RingId& ring = a.ring;
    Complex sh = shift(a, 1);
    if (!(theta.dom == c) || !(theta.cod == sh))
        throw DomainError("glued sequence: twist must be a chain map quot -> sub[1]");
    make_chain_map(c, sh, theta.comps);  // re-validate the commuting squares
    Complex b;
    if (a.empty() && c.empty()) {
        b = zero_complex(ring);
    } else {
        int lo = a.empty() ? c.lo : (c.empty() ? a.lo : std::min(a.lo, c.lo));
        int hi = a.empty() ? c.hi : (c.empty() ? a.hi : std::max(a.hi, c.hi));
        std::vector<int> ranks;
        std::vector<Matrix> diffs;
        for (int i = lo; i <= hi; ++i) {
            ranks.push_back(a.rank(i) + c.rank(i));
            if (i < hi)
                diffs.push_back(
                    vstack(hstack(a.d(i), theta.at(i)),
                           hstack(Matrix(ring, c.rank(i + 1), a.rank(i)), c.d(i))));
        }
        b = make_complex(ring, lo, std::move(ranks), std::move(diffs));
    }
    std::map<int, Matrix> incs, projs;
    for (int i = b.lo; i <= b.hi; ++i) {
        int ra = a.rank(i), rc = c.rank(i);
        if (ra > 0)
            incs[i] = vstack(mat_identity(ring, ra), Matrix(ring, rc, ra));
        if (rc > 0)
            projs[i] = hstack(Matrix(ring, rc, ra), mat_identity(ring, rc));
    }
    return make_ses(make_chain_map(a, b, std::move(incs)),
                    make_chain_map(b, c, std::move(projs)));
}

Ses sum_ses(const Complex& a, const Complex& c) {
    return glue_ses(a, c, zero_map(c, shift(a, 1)));
}

Element det_ses(const Ses& s, const PivotPolicy& policy) {
    return mul(raw_ses(s, policy), ses_norm_sign(s));
}

Element torsion_glue_sign(const Ses& s) {
    const Complex& b = s.mid;
    if (b.empty()) return ring_one(b.ring);
    std::vector<int> ra, rc;
    for (int i = b.lo; i <= b.hi; ++i) {
        ra.push_back(s.sub.rank(i));
        rc.push_back(s.quot.rank(i));
    }
    Complex ref_a = reference_acyclic(b.ring, b.lo, ra);
    Complex ref_c = reference_acyclic(b.ring, b.lo, rc);
    Element lhs = torsion_acyclic(direct_sum(ref_a, ref_c));
    Element rhs = mul(torsion_acyclic(ref_a), torsion_acyclic(ref_c));
    return mul(lhs, *inverse(rhs));
}

Element det_qis(const ChainMap& a0, const PivotPolicy& policy) {
    ChainMap a = make_chain_map(a0.dom, a0.cod, a0.comps);
    if (!is_qis(a)) throw DomainError("det_qis requires a quasi-isomorphism");
    const Complex& ca = a.dom;
    const Complex& cb = a.cod;
    const RingId& ring = ca.ring;

    // Mapping cylinder: degree n carries A^n (+) A^(n+1) (+) B^n with
    // differential (x, y, z) |-> (dx - y, -dy, ay + dz).
    int lo = 0, hi = -1;
    if (!ca.empty()) lo = ca.lo - 1, hi = ca.hi;
    if (!cb.empty()) {
        lo = ca.empty() ? cb.lo : std::min(lo, cb.lo);
        hi = ca.empty() ? cb.hi : std::max(hi, cb.hi);
    }
    Complex cyl, kc;
    {
        std::vector<int> cranks, kranks;
        std::vector<Matrix> cdiffs, kdiffs;
        for (int n = lo; n <= hi; ++n) {
            int a0r = ca.rank(n), a1r = ca.rank(n + 1), br = cb.rank(n);
            cranks.push_back(a0r + a1r + br);
            kranks.push_back(a0r + a1r);
            if (n < hi) {
                int a2r = ca.rank(n + 2), b1r = cb.rank(n + 1);
                Matrix r1 = hstack(hstack(ca.d(n), mat_neg(mat_identity(ring, a1r))),
                                   Matrix(ring, a1r, br));
                Matrix r2 = hstack(hstack(Matrix(ring, a2r, a0r), mat_neg(ca.d(n + 1))),
                                   Matrix(ring, a2r, br));
                Matrix r3 = hstack(hstack(Matrix(ring, b1r, a0r), a.at(n + 1)), cb.d(n));
                cdiffs.push_back(vstack(r1, vstack(r2, r3)));
                kdiffs.push_back(vstack(
                    hstack(ca.d(n), mat_neg(mat_identity(ring, a1r))),
                    hstack(Matrix(ring, a2r, a0r), mat_neg(ca.d(n + 1)))));
            }
        }
        cyl = make_complex(ring, lo, std::move(cranks), std::move(cdiffs));
        kc = make_complex(ring, lo, std::move(kranks), std::move(kdiffs));
    }
    std::map<int, Matrix> kap, pi, inj, prq;
    for (int n = lo; n <= hi; ++n) {
        int a0r = ca.rank(n), a1r = ca.rank(n + 1), br = cb.rank(n);
        if (a0r + a1r > 0)
            kap[n] = vstack(vstack(hstack(mat_identity(ring, a0r), Matrix(ring, a0r, a1r)),
                                   hstack(Matrix(ring, a1r, a0r), mat_identity(ring, a1r))),
                            hstack(mat_neg(a.at(n)), Matrix(ring, br, a1r)));
        if (br > 0)
            pi[n] = hstack(hstack(a.at(n), Matrix(ring, br, a1r)),
                           mat_identity(ring, br));
        if (a0r > 0)
            inj[n] = vstack(mat_identity(ring, a0r), Matrix(ring, a1r + br, a0r));
        if (a1r + br > 0)
            prq[n] = vstack(
                hstack(hstack(Matrix(ring, a1r, a0r), mat_identity(ring, a1r)),
                       Matrix(ring, a1r, br)),
                hstack(Matrix(ring, br, a0r + a1r), mat_identity(ring, br)));
    }
    Complex cn = cone(a);
    Ses peel_b = make_ses(make_chain_map(kc, cyl, std::move(kap)),
                          make_chain_map(cyl, cb, std::move(pi)));
    Ses peel_cone = make_ses(make_chain_map(ca, cyl, std::move(inj)),
                             make_chain_map(cyl, cn, std::move(prq)));
    Element v = raw_ses(peel_cone, policy);
    v = mul(v, *inverse(torsion_acyclic(cn, policy)));
    v = mul(v, torsion_acyclic(kc, policy));
    return mul(v, *inverse(raw_ses(peel_b, policy)));
}

Element canonical_unit_structure(const RingId& ring, int h) {
    return reduce_to_scalar(word_mul(word_factor(ring, "L", h, -1),
                                     word_factor(ring, "L", h, 1)));
}

namespace {

// Target lines: one factor per degree, ranked by the free part of the
// cohomology there, using the default-policy representatives as basis.
Word cohomology_word(const Complex& c, const std::vector<Cohomology>& hs,
                     const std::string& prefix) {
    Word w = word_one(c.ring);
    for (int i = c.lo; i <= c.hi; ++i)
        w = word_mul(w, word_factor(c.ring, term_line(prefix, i),
                                    hs[static_cast<size_t>(i - c.lo)].free_rank,
                                    parity_exp(i)));
    return w;
}

std::vector<Cohomology> free_cohomology(const Complex& c) {
    std::vector<Cohomology> hs;
    for (int i = c.lo; i <= c.hi; ++i) {
        hs.push_back(cohomology_at(c, i));
        if (!hs.back().torsion.empty())
            throw DomainError("euler value requires torsion-free cohomology");
    }
    return hs;
}

// Split route: decompose every term as image (+) cohomology lift (+)
// coimage and contract against the cohomology word.
Element euler_raw_split(const Complex& c, const PivotPolicy& policy) {
    std::vector<Cohomology> hs = free_cohomology(c);
    Word w = word_mul(complex_word(c, "C"), word_inv(cohomology_word(c, hs, "H")));
    Matrix b_prev(c.ring, 0, 0);
    for (int i = c.lo; i <= c.hi; ++i) {
        SnfResult sn = snf(c.d(i), policy);
        Matrix b_i = first_cols(sn.V, sn.rank);
        Matrix beta = mat_mul(c.d(i - 1), b_prev);
        const Matrix& eta = hs[static_cast<size_t>(i - c.lo)].representatives;
        w = substitute(w, term_line("C", i),
                       {{term_line("t", i - 1), beta.cols},
                        {term_line("H", i), eta.cols},
                        {term_line("t", i), b_i.cols}},
                       hstack(beta, hstack(eta, b_i)));
        b_prev = b_i;
    }
    return reduce_to_scalar(w);
}

// Writes the columns of `cycles` in terms of the representative basis
// `reps` modulo the image of `im_src`, returning the coefficient block on
// `reps` (which is uniquely determined).
Matrix class_coords(const Matrix& reps, const Matrix& im_src, const Matrix& cycles,
                    const PivotPolicy& policy) {
    auto sol = solve(hstack(reps, im_src), cycles, policy);
    if (!sol) throw DomainError("internal: representatives do not span");
    return first_rows(*sol, reps.cols);
}

// Truncation route: walk the stupid filtration P_m = (degrees <= m) from the
// top down.  Writing G_m = C^m / im d^(m-1) for the top cohomology of P_m,
// every step carries the four-term exact sequence
//     0 -> H^(m-1)(c) -> G_(m-1) -d-> C^m -> G_m -> 0,
// which splits C^m as im(d) (+) (lift of G_m) and G_(m-1) as H^(m-1) (+)
// (preimages of im(d)).  Both splittings are performed as in-place
// substitutions on one word, so all reordering signs are the engine's own.
Element euler_raw_truncate(const Complex& c, const PivotPolicy& policy) {
    const RingId& ring = c.ring;
    if (c.empty()) return from_int(ring, 1);
    std::vector<Cohomology> hs = free_cohomology(c);
    Word w = word_mul(complex_word(c, "C"), word_inv(cohomology_word(c, hs, "H")));

    // Representatives of G_m per degree; at the top G_hi is H^hi itself and
    // shares the target basis.
    std::map<int, Matrix> g_reps;
    for (int m = c.lo; m <= c.hi; ++m) {
        if (m == c.hi) {
            g_reps[m] = hs.back().representatives;
        } else if (c.rank(m) == 0) {
            g_reps[m] = Matrix(ring, 0, 0);
        } else {
            Complex p = stupid_below(c, m + 1);
            g_reps[m] = cohomology_at(p, m, policy).representatives;
        }
    }

    Matrix sig_above(ring, 0, 0);  // preimage coordinates from the level above
    int rk_above = 0;
    for (int m = c.hi; m >= c.lo; --m) {
        Matrix eta_prev = (m > c.lo) ? g_reps[m - 1] : Matrix(ring, 0, 0);
        Matrix delta = mat_mul(c.d(m - 1), eta_prev);
        SnfResult sd = snf(delta, policy);
        Matrix sig = first_cols(sd.V, sd.rank);  // preimages of the image basis
        Matrix zeta = mat_mul(delta, sig);       // basis of im(delta) in C^m
        int g_m = g_reps[m].cols;
        if (c.rank(m) > 0) {
            std::string gline = (m == c.hi) ? term_line("H", m) : term_line("G", m);
            w = substitute(w, term_line("C", m),
                           {{term_line("Im", m), sd.rank}, {gline, g_m}},
                           hstack(zeta, g_reps[m]));
        }
        if (m < c.hi && g_m > 0) {
            const Cohomology& hc = hs[static_cast<size_t>(m - c.lo)];
            Matrix mi = class_coords(g_reps[m], c.d(m - 1), hc.representatives,
                                     policy);
            w = substitute(w, term_line("G", m),
                           {{term_line("H", m), hc.free_rank},
                            {term_line("Im", m + 1), rk_above}},
                           hstack(mi, sig_above));
        }
        sig_above = sig;
        rk_above = sd.rank;
    }
    return reduce_to_scalar(w);
}

// Normalization: the engine value of the target word against its own
// inverse, a rank-parity sign making zero-differential complexes yield 1.
Element euler_norm(const Complex& c) {
    std::vector<Cohomology> hs = free_cohomology(c);
    Word wh = cohomology_word(c, hs, "H");
    return reduce_to_scalar(word_mul(wh, word_inv(wh)));
}

void require_field(const Complex& c) {
    if (!c.ring.is_field())
        throw DomainError("euler value is only defined over a field");
}

}  // namespace

Element euler_iso_split(const Complex& c, const PivotPolicy& policy) {
    require_field(c);
    return mul(euler_raw_split(c, policy), euler_norm(c));
}

Element euler_iso_truncate(const Complex& c, const PivotPolicy& policy) {
    require_field(c);
    return mul(euler_raw_truncate(c, policy), euler_norm(c));
}

Element euler_iso(const Complex& c, const PivotPolicy& policy) {
    Element a = euler_iso_split(c, policy);
    Element b = euler_iso_truncate(c, policy);
    if (!(a == b)) throw DomainError("internal: euler routes disagree");
    return a;
}

}  // namespace kdet
