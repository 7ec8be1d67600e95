#pragma once
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kdet/detfunctor.hpp"
#include "kdet/picardfiber.hpp"

namespace kdet {

// --- relation harvesting -----------------------------------------------------

// A ladder between two degreewise split short exact sequences whose rungs
// a, b, c are quasi-isomorphisms and whose three squares — the one over the
// inclusions, the one over the projections, and the one over the connecting
// maps carried by the chosen splittings — commute up to the stored
// homotopies.  Such a ladder identifies two composite morphisms of
// determinant lines; the unit by which they differ is harvested below.
struct TriangleIsoScenario {
    Ses d1, d2;
    ChainMap a;  // d1.sub  -> d2.sub
    ChainMap b;  // d1.mid  -> d2.mid
    ChainMap c;  // d1.quot -> d2.quot
    Homotopy h_sub;   // d2.inc o a        ~  b o d1.inc
    Homotopy h_quot;  // d2.proj o b       ~  c o d1.proj
    Homotopy h_conn;  // (shift a) o conn1 ~  conn2 o c
};

// The connecting chain map quot -> sub[1] of a degreewise split short exact
// sequence: split every level with a section of proj and read off the
// off-diagonal block of the middle differential.  A different section moves
// the result by a homotopy only, so squares tested against it up to homotopy
// do not depend on the splitting.
ChainMap connecting_map(const Ses& s, const PivotPolicy& policy = {});

// Builds a scenario by solving for all three homotopy witnesses.  Throws
// DomainError when some rung is not a quasi-isomorphism or a square fails to
// commute up to homotopy.
TriangleIsoScenario make_scenario(const Ses& d1, const Ses& d2,
                                  const ChainMap& a, const ChainMap& b,
                                  const ChainMap& c);

// Re-verifies every invariant from scratch against the stored witnesses
// (shapes, quasi-isomorphisms, all three squares).  Throws DomainError on the
// first failure.
void check_scenario(const TriangleIsoScenario& scn);

// A unit of the base ring that the quotient construction must force to 1,
// together with a human-readable description of the scenario it came from.
struct HarvestedRelation {
    Element ratio;
    std::string provenance;
};

// The unit separating the ladder's two composite morphisms
// det(sub1) (x) det(quot1) -> det(mid2): through the rungs and then d2's
// gluing, against d1's gluing and then the middle rung:
//
//   ratio = det_qis(a) * det_qis(c) * det_ses(d2) / (det_ses(d1) * det_qis(b)).
//
// For d1 = d2 the det_ses factors cancel and the ratio is independent of
// every internal convention.  Verifies the scenario first.
HarvestedRelation harvest(const TriangleIsoScenario& scn);

// Exhaustive scan over a finite ring: all ladders between twisted sums
// glue_ses(A, C, theta) with d1 = d2, where A and C run over all complexes
// supported in [deg_lo, deg_hi] whose total ranks sum to at most max_rank
// (so every complex in a scenario, middle included, has total rank at most
// max_rank), theta over all twists, and the rungs over all self-maps up to
// homotopy (the ratio only depends on homotopy classes).  Pairs where A or C
// vanishes are skipped: there the squares force the middle rung homotopic to
// the surviving one and homotopy invariance of det_qis makes the ratio 1.
// Returns one
// representative relation per distinct ratio != 1, sorted by formatted ratio;
// the list is empty over the regular rings in scope.  Throws DomainError for
// an infinite ring or when the scenario count would exceed 10^6.
std::vector<HarvestedRelation> enumerate_relations(const RingId& ring,
                                                   int max_rank, int deg_lo,
                                                   int deg_hi);

// Seeded random ladders, valid by construction (block rungs on twisted sums,
// coordinate changes of the middle term, and null-homotopic perturbations),
// each re-verified before harvesting.  Returns the relations with
// ratio != 1 among `count` scenarios — expected empty over regular rings.
std::vector<HarvestedRelation> sample_relations(const RingId& ring, int count,
                                                std::uint64_t seed);

// --- the dual-number collapse certificate ------------------------------------

// Everything needed to re-check that over the dual numbers F_p[e] the unit
// group of order p(p-1) is forced onto a quotient of order p-1: the unit
// 1+e is nontrivial, one explicit ladder harvests it as a relation, and the
// quotient by the generated subgroup identifies distinct units.
struct CollapseCertificate {
    long p = 0;
    RingId ring;                 // the dual numbers F_p[e]
    Element eps;                 // the unit 1 + e
    long unit_group_order = 0;   // p * (p - 1)
    long eps_order = 0;          // multiplicative order of 1 + e, i.e. p
    TriangleIsoScenario scenario;
    Element ratio;               // harvested from the scenario; generates <1+e>
    QuotientReport quotient;     // unit group modulo <ratio>
    bool k1_nontrivial = false;  // 1 + e != 1
    bool not_injective = false;  // quotient_order < unit_group_order
    std::vector<std::string> conclusion;  // fixed wording, see docs
};

// Builds the certificate for a small prime p: the ladder scales the
// subobject of 0 -> R -> cone(e: R -> R) -> R[1] -> 0 by 1+e and fixes the
// rest; the inclusion square commutes up to an explicit homotopy and the
// connecting square on the nose because e^2 = 0.  Throws DomainError when p
// is not prime.
CollapseCertificate collapse_certificate(long p);

// Re-derives every field of the certificate from its witnesses and compares;
// throws DomainError on the first mismatch.
void verify_certificate(const CollapseCertificate& cert);

// Stable plain-text rendering (one "key = value" line per field, fixed order)
// used for golden-file comparisons; see docs/conventions.md for the schema.
std::string format_certificate(const CollapseCertificate& cert);

// One-line shape summaries used in provenance strings and reports:
// "[1,1]@-1" (ranks at the low degree) and "0" for the zero complex;
// "0:[[1]] 1:[[2]]" (degree:matrix pairs) and "0" for the zero map.
std::string complex_summary(const Complex& c);
std::string chain_map_summary(const ChainMap& f);

// --- Euler characteristics -----------------------------------------------------

// The class of C in K_0: the alternating sum of its ranks.
long chi_k0(const Complex& c);

enum class EulerRoute { Split, Truncate, Both };

// The refined Euler characteristic of C relative to a ring pair whose target
// is a field: the unit
//
//   euler_iso(C_S) * (even/odd reordering sign) * det(t) * (-1)^h
//
// taken modulo im(R^x).  Here C_S is the base change of C to S, h is the
// common dimension of H^ev(C_S) and H^od(C_S), and t is an invertible h x h
// matrix over S mapping the even cohomology to the odd one, written against
// the deterministic bases that `cohomology(C_S)` emits (free generators per
// degree, degrees ascending, even stack then odd stack).  t must be absent
// exactly when h = 0.  Requires chi_k0(C) = 0 — only then does the result
// live in degree 0 where unit structures exist.  `Both` computes the unit by
// the two independent euler_iso routes and throws on disagreement.
RelK0Class chi_rel(const Complex& c, const RelPair& pair,
                   const std::optional<Matrix>& t = std::nullopt,
                   const PivotPolicy& policy = {});
RelK0Class chi_rel_route(const Complex& c, const RelPair& pair,
                         const std::optional<Matrix>& t, EulerRoute route,
                         const PivotPolicy& policy = {});

// The common dimension h of the even and odd cohomology of C_S (the size of
// trivialization chi_rel expects), after the same validation chi_rel does.
int chi_rel_rank(const Complex& c, const RelPair& pair);

// The trivialization of a direct sum induced by trivializations of the
// summands: transports t1 (+) t2 through the canonical identification of
// H(C1 (+) C2) with H(C1) (+) H(C2), expressed against the deterministic
// bases of the sum.  Returns nullopt when both inputs are absent (h = 0).
std::optional<Matrix> direct_sum_trivialization(
    const Complex& c1, const Complex& c2, const std::optional<Matrix>& t1,
    const std::optional<Matrix>& t2, const RelPair& pair,
    const PivotPolicy& policy = {});

// Checks chi_rel(C1 (+) C2, t1 (+) t2) = chi_rel(C1, t1) * chi_rel(C2, t2).
struct AdditivityReport {
    RelK0Class sum_class;   // left-hand side
    RelK0Class left_class;  // chi_rel of the first summand
    RelK0Class right_class; // chi_rel of the second summand
    RelK0Class product;     // right-hand side
    bool ok = false;
};
AdditivityReport chi_rel_additivity_check(const Complex& c1, const Complex& c2,
                                          const std::optional<Matrix>& t1,
                                          const std::optional<Matrix>& t2,
                                          const RelPair& pair);

// --- seeded generators for randomized suites -----------------------------------

// A small random complex with Euler characteristic 0: a direct sum of
// two-term pieces with nonzero scalar differential and parity-balanced pairs
// of one-term pieces inside [deg_lo, deg_hi], total rank <= max_total,
// densified by random invertible coordinate changes in every degree.  Over Z
// all entries (and the changes' inverses) stay integral.  Deterministic for
// a given rng state.
Complex random_complex(const RingId& ring, int max_total, int deg_lo,
                       int deg_hi, std::mt19937_64& rng);

// Like random_complex but every piece is a two-term complex with a unit
// differential, so the result is acyclic.
Complex random_acyclic(const RingId& ring, int max_total, int deg_lo,
                       int deg_hi, std::mt19937_64& rng);

// A random invertible n x n matrix: a unit diagonal stirred by random
// elementary row operations.  Over Z the inverse is integral.
Matrix random_invertible(const RingId& ring, int n, std::mt19937_64& rng);

}  // namespace kdet
