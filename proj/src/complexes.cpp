#include "kdet/complexes.hpp"

#include <algorithm>

namespace kdet {

Complex make_complex(const RingId& ring, int lo, std::vector<int> ranks,
                     std::vector<Matrix> diffs) {
    if (ranks.empty()) return zero_complex(ring);
    if (diffs.size() + 1 != ranks.size())
        throw DomainError("complex needs exactly one differential per adjacent pair");
    for (size_t i = 0; i < diffs.size(); ++i) {
        if (diffs[i].ring != ring) throw DomainError("differential ring mismatch");
        if (diffs[i].rows != ranks[i + 1] || diffs[i].cols != ranks[i])
            throw DomainError("differential shape mismatch at degree " +
                              std::to_string(lo + static_cast<int>(i)));
    }
    for (size_t i = 0; i + 1 < diffs.size(); ++i)
        if (!is_zero_matrix(mat_mul(diffs[i + 1], diffs[i])))
            throw DomainError("d o d != 0 at degree " +
                              std::to_string(lo + static_cast<int>(i)));
    // Trim zero-rank degrees at both ends (a 0 x c or r x 0 differential
    // carries no information).
    while (!ranks.empty() && ranks.front() == 0) {
        ranks.erase(ranks.begin());
        if (!diffs.empty()) diffs.erase(diffs.begin());
        ++lo;
    }
    while (!ranks.empty() && ranks.back() == 0) {
        ranks.pop_back();
        if (!diffs.empty()) diffs.pop_back();
    }
    if (ranks.empty()) return zero_complex(ring);
    Complex c;
    c.ring = ring;
    c.lo = lo;
    c.hi = lo + static_cast<int>(ranks.size()) - 1;
    c.ranks = std::move(ranks);
    c.diffs = std::move(diffs);
    return c;
}

Complex zero_complex(const RingId& ring) {
    Complex c;
    c.ring = ring;
    c.lo = 0;
    c.hi = -1;
    return c;
}

Complex one_term(const RingId& ring, int deg, int rank) {
    return make_complex(ring, deg, {rank}, {});
}

long euler_char(const Complex& c) {
    long chi = 0;
    for (int i = c.lo; i <= c.hi; ++i)
        chi += (((i % 2) + 2) % 2 == 0) ? c.rank(i) : -c.rank(i);
    return chi;
}

Complex shift(const Complex& c, int k) {
    if (c.empty()) return c;
    std::vector<Matrix> diffs = c.diffs;
    if (((k % 2) + 2) % 2 == 1)
        for (Matrix& m : diffs) m = mat_neg(m);
    return make_complex(c.ring, c.lo - k, c.ranks, std::move(diffs));
}

Complex direct_sum(const Complex& a, const Complex& b) {
    if (a.ring != b.ring) throw DomainError("direct_sum ring mismatch");
    if (a.empty()) return b;
    if (b.empty()) return a;
    int lo = std::min(a.lo, b.lo), hi = std::max(a.hi, b.hi);
    std::vector<int> ranks;
    std::vector<Matrix> diffs;
    for (int i = lo; i <= hi; ++i) {
        ranks.push_back(a.rank(i) + b.rank(i));
        if (i < hi) diffs.push_back(block_diag(a.d(i), b.d(i)));
    }
    return make_complex(a.ring, lo, std::move(ranks), std::move(diffs));
}

Complex base_change(const Complex& c, const RingId& target) {
    std::vector<Matrix> diffs;
    diffs.reserve(c.diffs.size());
    for (const Matrix& m : c.diffs) diffs.push_back(mat_cast(target, m));
    return make_complex(target, c.lo, c.ranks, std::move(diffs));
}

// --- chain maps ----------------------------------------------------------------

ChainMap make_chain_map(const Complex& a, const Complex& b,
                        std::map<int, Matrix> comps) {
    if (a.ring != b.ring) throw DomainError("chain map ring mismatch");
    for (auto& [i, m] : comps) {
        if (m.ring != a.ring) throw DomainError("chain map component ring mismatch");
        if (m.rows != b.rank(i) || m.cols != a.rank(i))
            throw DomainError("chain map component shape mismatch at degree " +
                              std::to_string(i));
    }
    ChainMap f;
    f.dom = a;
    f.cod = b;
    f.comps = std::move(comps);
    int lo = std::min(a.lo, b.lo) - 1, hi = std::max(a.hi, b.hi);
    for (int i = lo; i <= hi; ++i)
        if (mat_mul(b.d(i), f.at(i)) != mat_mul(f.at(i + 1), a.d(i)))
            throw DomainError("not a chain map: square at degree " +
                              std::to_string(i) + " does not commute");
    // Normalize: drop zero components so maps compare by content.
    for (auto it = f.comps.begin(); it != f.comps.end();)
        it = is_zero_matrix(it->second) ? f.comps.erase(it) : std::next(it);
    return f;
}

ChainMap identity_map(const Complex& c) {
    std::map<int, Matrix> comps;
    for (int i = c.lo; i <= c.hi; ++i)
        if (c.rank(i) > 0) comps[i] = mat_identity(c.ring, c.rank(i));
    return make_chain_map(c, c, std::move(comps));
}

ChainMap zero_map(const Complex& a, const Complex& b) {
    return make_chain_map(a, b, {});
}

ChainMap compose(const ChainMap& g, const ChainMap& f) {
    if (!(f.cod == g.dom)) throw DomainError("compose: middle complexes differ");
    std::map<int, Matrix> comps;
    int lo = std::min(f.dom.lo, g.cod.lo), hi = std::max(f.dom.hi, g.cod.hi);
    for (int i = lo; i <= hi; ++i) comps[i] = mat_mul(g.at(i), f.at(i));
    return make_chain_map(f.dom, g.cod, std::move(comps));
}

namespace {
ChainMap map_combine(const ChainMap& f, const ChainMap& g, bool subtract) {
    if (!(f.dom == g.dom) || !(f.cod == g.cod))
        throw DomainError("map arithmetic requires equal domain and codomain");
    std::map<int, Matrix> comps;
    int lo = std::min(f.dom.lo, f.cod.lo), hi = std::max(f.dom.hi, f.cod.hi);
    for (int i = lo; i <= hi; ++i)
        comps[i] = subtract ? mat_sub(f.at(i), g.at(i)) : mat_add(f.at(i), g.at(i));
    return make_chain_map(f.dom, f.cod, std::move(comps));
}
}  // namespace

ChainMap map_add(const ChainMap& f, const ChainMap& g) {
    return map_combine(f, g, false);
}

ChainMap map_sub(const ChainMap& f, const ChainMap& g) {
    return map_combine(f, g, true);
}

ChainMap shift_map(const ChainMap& f, int k) {
    std::map<int, Matrix> comps;
    for (const auto& [i, m] : f.comps) comps[i - k] = m;
    return make_chain_map(shift(f.dom, k), shift(f.cod, k), std::move(comps));
}

bool is_degreewise_iso(const ChainMap& f) {
    int lo = std::min(f.dom.lo, f.cod.lo), hi = std::max(f.dom.hi, f.cod.hi);
    for (int i = lo; i <= hi; ++i) {
        if (f.dom.rank(i) != f.cod.rank(i)) return false;
        if (f.dom.rank(i) > 0 && !inverse_matrix(f.at(i))) return false;
    }
    return true;
}

// --- cones ----------------------------------------------------------------------

Complex cone(const ChainMap& a) {
    const Complex& A = a.dom;
    const Complex& B = a.cod;
    int lo = std::min(A.lo - 1, B.lo), hi = std::max(A.hi - 1, B.hi);
    if (A.empty() && B.empty()) return zero_complex(A.ring);
    if (A.empty()) {
        lo = B.lo;
        hi = B.hi;
    } else if (B.empty()) {
        lo = A.lo - 1;
        hi = A.hi - 1;
    }
    std::vector<int> ranks;
    std::vector<Matrix> diffs;
    for (int n = lo; n <= hi; ++n) {
        ranks.push_back(A.rank(n + 1) + B.rank(n));
        if (n < hi) {
            Matrix top = hstack(mat_neg(A.d(n + 1)),
                                Matrix(A.ring, A.rank(n + 2), B.rank(n)));
            Matrix bot = hstack(a.at(n + 1), B.d(n));
            diffs.push_back(vstack(top, bot));
        }
    }
    return make_complex(A.ring, lo, std::move(ranks), std::move(diffs));
}

ChainMap cone_inclusion(const ChainMap& a) {
    Complex cn = cone(a);
    const Complex& B = a.cod;
    std::map<int, Matrix> comps;
    for (int n = B.lo; n <= B.hi; ++n)
        comps[n] = vstack(Matrix(B.ring, a.dom.rank(n + 1), B.rank(n)),
                          mat_identity(B.ring, B.rank(n)));
    return make_chain_map(B, cn, std::move(comps));
}

ChainMap cone_projection(const ChainMap& a) {
    Complex cn = cone(a);
    Complex a1 = shift(a.dom, 1);
    std::map<int, Matrix> comps;
    for (int n = cn.lo; n <= cn.hi; ++n) {
        int ra = a.dom.rank(n + 1);
        // minus the projection onto the A[1] block
        comps[n] = hstack(mat_neg(mat_identity(a.dom.ring, ra)),
                          Matrix(a.dom.ring, ra, a.cod.rank(n)));
    }
    return make_chain_map(cn, a1, std::move(comps));
}

// --- homotopies ------------------------------------------------------------------

std::optional<Homotopy> homotopy_between(const ChainMap& a, const ChainMap& b) {
    if (!(a.dom == b.dom) || !(a.cod == b.cod))
        throw DomainError("homotopy_between requires equal domain and codomain");
    const Complex& A = a.dom;
    const Complex& B = a.cod;
    const RingId ring = A.ring;
    int lo = std::min(A.lo, B.lo) - 1, hi = std::max(A.hi, B.hi) + 1;

    // Unknown blocks h^i : A^i -> B^(i-1), flattened row-major; one equation
    // block d_B h + h d_A = (a-b)^i per degree with nontrivial target.
    std::map<int, int> hoff, eoff;
    int ncols = 0, nrows = 0;
    for (int i = lo; i <= hi; ++i) {
        if (A.rank(i) > 0 && B.rank(i - 1) > 0) {
            hoff[i] = ncols;
            ncols += B.rank(i - 1) * A.rank(i);
        }
        if (A.rank(i) > 0 && B.rank(i) > 0) {
            eoff[i] = nrows;
            nrows += B.rank(i) * A.rank(i);
        }
    }
    Matrix M(ring, nrows, ncols), rhs(ring, nrows, 1);
    for (auto [i, off] : eoff) {
        Matrix dBprev = B.d(i - 1);
        Matrix dAi = A.d(i);
        Matrix diff = mat_sub(a.at(i), b.at(i));
        for (int r = 0; r < B.rank(i); ++r)
            for (int c = 0; c < A.rank(i); ++c) {
                int row = off + r * A.rank(i) + c;
                rhs.at(row, 0) = diff.at(r, c);
                if (hoff.count(i))
                    for (int k = 0; k < B.rank(i - 1); ++k)
                        M.at(row, hoff[i] + k * A.rank(i) + c) =
                            add(M.at(row, hoff[i] + k * A.rank(i) + c),
                                dBprev.at(r, k));
                if (hoff.count(i + 1))
                    for (int k = 0; k < A.rank(i + 1); ++k)
                        M.at(row, hoff[i + 1] + r * A.rank(i + 1) + k) =
                            add(M.at(row, hoff[i + 1] + r * A.rank(i + 1) + k),
                                dAi.at(k, c));
            }
    }
    auto sol = solve(M, rhs);
    if (!sol) return std::nullopt;
    Homotopy h;
    for (auto [i, off] : hoff) {
        Matrix blk(ring, B.rank(i - 1), A.rank(i));
        for (int k = 0; k < B.rank(i - 1); ++k)
            for (int c = 0; c < A.rank(i); ++c)
                blk.at(k, c) = sol->at(off + k * A.rank(i) + c, 0);
        if (!is_zero_matrix(blk)) h.comps[i] = blk;
    }
    return h;
}

bool check_homotopy(const ChainMap& a, const ChainMap& b, const Homotopy& h) {
    if (!(a.dom == b.dom) || !(a.cod == b.cod)) return false;
    const Complex& A = a.dom;
    const Complex& B = a.cod;
    int lo = std::min(A.lo, B.lo) - 1, hi = std::max(A.hi, B.hi) + 1;
    for (int i = lo; i <= hi; ++i) {
        Matrix lhs = mat_add(mat_mul(B.d(i - 1), h.at(A, B, i)),
                             mat_mul(h.at(A, B, i + 1), A.d(i)));
        if (lhs != mat_sub(a.at(i), b.at(i))) return false;
    }
    return true;
}

// --- cohomology ------------------------------------------------------------------

Cohomology cohomology_at(const Complex& c, int i, const PivotPolicy& policy) {
    Cohomology h;
    h.degree = i;
    // Generators of ker d^i, then the cokernel presentation
    // [image relations | internal relations of the generators].
    Matrix K = kernel(c.d(i), policy);
    auto X = solve(K, c.d(i - 1), policy);
    if (!X) throw DomainError("internal: image does not lie in the kernel");
    Matrix P = hstack(*X, kernel(K, policy));
    SnfResult s = snf(P, policy);
    Matrix gens = mat_mul(K, s.Uinv);
    int t = K.cols, n = std::min(P.rows, P.cols);
    std::vector<int> free_js, tors_js;
    for (int j = 0; j < t; ++j) {
        if (j >= n || is_zero(s.D.at(j, j))) {
            free_js.push_back(j);
        } else if (!is_unit(s.D.at(j, j))) {
            tors_js.push_back(j);
            h.torsion.push_back(s.D.at(j, j));
        }
    }
    h.free_rank = static_cast<int>(free_js.size());
    std::vector<int> order = free_js;
    order.insert(order.end(), tors_js.begin(), tors_js.end());
    h.representatives = take_cols(gens, order);
    return h;
}

std::vector<Cohomology> cohomology(const Complex& c, const PivotPolicy& policy) {
    std::vector<Cohomology> out;
    for (int i = c.lo; i <= c.hi; ++i) out.push_back(cohomology_at(c, i, policy));
    return out;
}

bool is_acyclic(const Complex& c) {
    for (int i = c.lo; i <= c.hi; ++i)
        if (!cohomology_at(c, i).trivial()) return false;
    return true;
}

bool is_qis(const ChainMap& a) { return is_acyclic(cone(a)); }

// --- stupid truncations -----------------------------------------------------------

Complex stupid_above(const Complex& c, int k) {
    if (c.empty() || k <= c.lo) return c;
    if (k > c.hi) return zero_complex(c.ring);
    std::vector<int> ranks(c.ranks.begin() + (k - c.lo), c.ranks.end());
    std::vector<Matrix> diffs(c.diffs.begin() + (k - c.lo), c.diffs.end());
    return make_complex(c.ring, k, std::move(ranks), std::move(diffs));
}

Complex stupid_below(const Complex& c, int k) {
    if (c.empty() || k > c.hi) return c;
    if (k <= c.lo) return zero_complex(c.ring);
    std::vector<int> ranks(c.ranks.begin(), c.ranks.begin() + (k - c.lo));
    std::vector<Matrix> diffs(c.diffs.begin(), c.diffs.begin() + (k - c.lo - 1));
    return make_complex(c.ring, c.lo, std::move(ranks), std::move(diffs));
}

}  // namespace kdet
