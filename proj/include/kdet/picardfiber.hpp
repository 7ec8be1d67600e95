#pragma once
#include <string>
#include <vector>

#include "kdet/linalg.hpp"
#include "kdet/rings.hpp"

namespace kdet {

// A supported base-change pair R -> S.  S is regular in every case; the
// supported pairs are (Z,Q), (Z,Z[1/m]), (Z[1/m],Q) and identity pairs
// (X,X) for regular X.  For each of these the rank map identifies K_0(R)
// with K_0(S), so the relative group K_0(R,S) is exactly S^x / im(R^x),
// which is what RelK0Class stores in normal form.
struct RelPair {
    RingId r, s;
    bool identity() const { return r == s; }
};

RelPair make_rel_pair(const RingId& r, const RingId& s);
RelPair parse_rel_pair(const std::string& text);  // "Z:Q", "Z:Z[1/6]", ...
std::string format_rel_pair(const RelPair& pair);

// An object of the homotopy fiber of base change: a degree-0 graded line
// over R together with a unit structure scalar delta on its image over S.
// Only degree 0 is legal: a unit structure on a degree-n line forces n = 2n.
struct FiberObj {
    RelPair pair;
    int degree = 0;
    Element delta;  // unit of S
};

FiberObj make_fiber_obj(const RelPair& pair, int degree, const Element& delta);
FiberObj fiber_tensor(const FiberObj& x, const FiberObj& y);

// An element of K_0(R,S) = S^x / im(R^x) in normal form:
//   (Z,Q):       positive rational, stored factored (sign always +1);
//   (Z,Z[1/m]):  exponent vector over the primes dividing m;
//   (Z[1/m],Q):  positive rational with support disjoint from primes | m;
//   (X,X):       always trivial.
// The group law is componentwise exponent addition.
struct RelK0Class {
    RelPair pair;
    FactoredRational nf;  // sign == +1 always; empty exps == trivial class

    bool trivial() const { return nf.exps.empty(); }
    bool operator==(const RelK0Class& o) const;
};

RelK0Class k0_trivial(const RelPair& pair);
RelK0Class k0_mul(const RelK0Class& x, const RelK0Class& y);
RelK0Class k0_inv(const RelK0Class& x);
RelK0Class k0_pow(const RelK0Class& x, long n);
std::string format_class(const RelK0Class& c);  // "1", "10/3", ...

// The class of a fiber object: its delta modulo im(R^x -> S^x).
RelK0Class class_of(const FiberObj& obj);

// The boundary map: a unit alpha of S goes to the class of (1, alpha).
// Its kernel is exactly the image of R^x (exactness of the six-term
// sequence at the S-units).
RelK0Class boundary(const Element& alpha, const RelPair& pair);

// A Swan generator (P, a, Q): free modules of equal rank with an
// isomorphism a between them after base change to S.
struct SwanGenerator {
    int rank_p = 0;
    int rank_q = 0;
    Matrix a;  // over S, invertible, rank_p == rank_q
};

// The class of det(a) modulo im(R^x).  Satisfies Swan's relations:
// composition multiplies classes and (P, id, P) is trivial.
RelK0Class swan_eta(const SwanGenerator& g, const RelPair& pair);

// --- quotients of finite unit groups ---------------------------------------

// Quotient of pi_1 of a graded-line category by harvested relation units.
// The minimal compatible closure of a relation set identifying morphism
// pairs with ratio u is the subgroup generated by the u's, because every
// morphism set is a pi_1-torsor and composition and tensor are
// pi_1-equivariant; the quotient category therefore has pi_1 = group/<u's>.
struct QuotientReport {
    long group_order = 0;
    std::vector<long> group_invariants;     // invariant factors, ascending
    std::vector<Element> subgroup;          // the generated subgroup, sorted
    long subgroup_order = 0;
    long quotient_order = 0;
    std::vector<long> quotient_invariants;  // invariant factors, ascending
    // Pairs of distinct units identified by the quotient (empty iff the
    // quotient map is injective).
    std::vector<std::pair<Element, Element>> collapsed_pairs;
    bool injective = false;
};

// group must be finite ({+-1} for Z counts); every relation must lie in it.
QuotientReport quotient_units(const UnitGroup& group,
                              const std::vector<Element>& relations);

// Invariant factors d_1 | d_2 | ... | d_t of a finite abelian group given by
// its element list (closed under the ring multiplication).
std::vector<long> abelian_invariants(const RingId& ring,
                                     const std::vector<Element>& elements);

// --- the six-term exact sequence --------------------------------------------

// Checks, over exhaustive small-height unit sets, the homotopy-group exact
// sequence of the fiber:  pi_1(F) = ker(R^x -> S^x), the boundary kills
// exactly im(R^x), and every class comes from a degree-0 object.
struct ExactnessReport {
    RelPair pair;
    bool pi1_fiber_trivial = false;       // ker(R^x -> S^x) = 1
    bool boundary_kills_image = false;    // boundary(im R^x) = 1
    bool boundary_kernel_exact = false;   // boundary(u) = 1  =>  u in im R^x
    bool degree_zero_only = false;        // non-zero degrees rejected
    long units_tested = 0;
    bool ok() const {
        return pi1_fiber_trivial && boundary_kills_image &&
               boundary_kernel_exact && degree_zero_only;
    }
};

// height: numerators and denominators of tested units run over 1..height.
ExactnessReport check_exact_sequence(const RelPair& pair, long height = 30);

}  // namespace kdet
