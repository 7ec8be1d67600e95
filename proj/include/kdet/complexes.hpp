#pragma once
#include <map>
#include <optional>
#include <vector>

#include "kdet/linalg.hpp"

namespace kdet {

// Bounded cochain complex of finite free modules.  Degrees run lo..hi; the
// differential d^i maps C^i to C^{i+1} and squares to zero.  The zero complex
// is represented by an empty support (lo > hi).
struct Complex {
    RingId ring;
    int lo = 0;
    int hi = -1;
    std::vector<int> ranks;    // ranks[i - lo] for i in lo..hi
    std::vector<Matrix> diffs; // diffs[i - lo] = d^i for i in lo..hi-1

    Complex() : ring(RingId::Z()) {}

    int rank(int i) const {
        return (i < lo || i > hi) ? 0 : ranks[static_cast<size_t>(i - lo)];
    }
    // Total differential accessor: a correctly shaped zero matrix outside the
    // stored range.
    Matrix d(int i) const {
        if (i >= lo && i < hi) return diffs[static_cast<size_t>(i - lo)];
        return Matrix(ring, rank(i + 1), rank(i));
    }
    bool empty() const { return lo > hi; }

    bool operator==(const Complex& o) const {
        return ring == o.ring && lo == o.lo && hi == o.hi && ranks == o.ranks &&
               diffs == o.diffs;
    }
};

// Validates shapes and d o d = 0, and trims zero-rank degrees at both ends.
Complex make_complex(const RingId& ring, int lo, std::vector<int> ranks,
                     std::vector<Matrix> diffs);
Complex zero_complex(const RingId& ring);
// The ring R placed in degree deg (rank-1 one-term complex).
Complex one_term(const RingId& ring, int deg, int rank = 1);

long euler_char(const Complex& c);  // sum of (-1)^i rank_i

// (C[k])^n = C^(n+k) with differential (-1)^k d^(n+k).
Complex shift(const Complex& c, int k);
Complex direct_sum(const Complex& a, const Complex& b);
Complex base_change(const Complex& c, const RingId& target);

// Degreewise map of complexes; components default to zero where omitted.
struct ChainMap {
    Complex dom, cod;
    std::map<int, Matrix> comps;

    Matrix at(int i) const {
        auto it = comps.find(i);
        if (it != comps.end()) return it->second;
        return Matrix(dom.ring, cod.rank(i), dom.rank(i));
    }
};

// Validates shapes and the commuting squares d_B f = f d_A.
ChainMap make_chain_map(const Complex& a, const Complex& b,
                        std::map<int, Matrix> comps);
ChainMap identity_map(const Complex& c);
ChainMap zero_map(const Complex& a, const Complex& b);
ChainMap compose(const ChainMap& g, const ChainMap& f);  // g o f
ChainMap map_add(const ChainMap& f, const ChainMap& g);
ChainMap map_sub(const ChainMap& f, const ChainMap& g);
// f[k] : A[k] -> B[k] with components f^(n+k).
ChainMap shift_map(const ChainMap& f, int k);
bool is_degreewise_iso(const ChainMap& f);

// cone(a)^n = A^(n+1) (+) B^n with differential [[-d_A, 0], [a, d_B]].
Complex cone(const ChainMap& a);
// The canonical triangle maps for cone(a): B -> cone(a) is the inclusion and
// cone(a) -> A[1] is MINUS the projection (the sign convention used by every
// construction downstream).
ChainMap cone_inclusion(const ChainMap& a);
ChainMap cone_projection(const ChainMap& a);

// Degreewise homotopy h^i : A^i -> B^(i-1).
struct Homotopy {
    std::map<int, Matrix> comps;
    Matrix at(const Complex& a, const Complex& b, int i) const {
        auto it = comps.find(i);
        if (it != comps.end()) return it->second;
        return Matrix(a.ring, b.rank(i - 1), a.rank(i));
    }
};

// Some h with d_B h + h d_A = a - b, or nullopt if a and b are not homotopic.
// Found by solving one global linear system over the ring, so over chain
// rings no solutions are missed.
std::optional<Homotopy> homotopy_between(const ChainMap& a, const ChainMap& b);
bool check_homotopy(const ChainMap& a, const ChainMap& b, const Homotopy& h);

// --- cohomology ---------------------------------------------------------------

// H^i as free part + cyclic torsion summands, with explicit representative
// cycles in C^i.  Representative columns list the free generators first, then
// one generator per torsion divisor, matching `torsion` in order.  Over the
// chain rings "free" means a full R-summand (R = Z/p^k or F_p[e]).
struct Cohomology {
    int degree = 0;
    int free_rank = 0;
    std::vector<Element> torsion;  // non-unit, nonzero canonical divisors
    Matrix representatives;        // rank_C(degree) x (free_rank + torsion count)

    bool trivial() const { return free_rank == 0 && torsion.empty(); }
};

Cohomology cohomology_at(const Complex& c, int i, const PivotPolicy& policy = {});
std::vector<Cohomology> cohomology(const Complex& c, const PivotPolicy& policy = {});

bool is_acyclic(const Complex& c);
bool is_qis(const ChainMap& a);  // cone(a) acyclic

// Stupid truncations: degrees >= k form a subcomplex, degrees < k the
// complementary quotient.
Complex stupid_above(const Complex& c, int k);
Complex stupid_below(const Complex& c, int k);

}  // namespace kdet
