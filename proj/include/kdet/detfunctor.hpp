#pragma once
#include <string>

#include "kdet/complexes.hpp"
#include "kdet/gradedline.hpp"

namespace kdet {

// Determinant lines of complexes and the scalar invariants they carry.
//
// Every value below is produced by the graded-line word engine: write down
// the word of a complex (one factor per nonzero term, degree-i factor with
// exponent (-1)^i), rewrite term lines along explicit direct-sum
// decompositions, and contract.  The decompositions come from Smith normal
// forms and solved sections; all such choices provably cancel, so the
// results are well defined -- the tests re-randomize every internal choice
// and assert equality.
//
// Sign conventions are fixed once, here:
//   * contraction pairs (L,+1)(L,-1) freely; the reversed pair costs
//     (-1)^rank (see gradedline.hpp);
//   * torsion_acyclic([R -u-> R] in degrees 0,1) = u (orientation +1);
//   * det_ses is normalized so the canonical direct-sum sequence yields 1;
//   * euler_iso is normalized so zero-differential complexes yield 1.

// The degree of the determinant line of C: sum of (-1)^i rank(C^i).
long det_obj(const Complex& c);

// Naming for the determinant line of the degree-i term of a complex.
std::string term_line(const std::string& prefix, int degree);

// The word of a complex: ascending tensor of its term lines, the degree-i
// factor carrying exponent (-1)^i.  Rank-0 terms contribute nothing.
Word complex_word(const Complex& c, const std::string& prefix);

// The unit carried by the determinant line of an acyclic complex: split
// every term as image (+) coimage along Smith normal forms of the
// differentials and contract.  Independent of the splitting choices.
// Throws DomainError if the complex is not acyclic.
Element torsion_acyclic(const Complex& c, const PivotPolicy& policy = {});

// A degreewise split short exact sequence of complexes.
struct Ses {
    Complex sub, mid, quot;
    ChainMap inc;   // sub  -> mid
    ChainMap proj;  // mid -> quot
};

// Validates: proj o inc = 0, ranks add degreewise, proj has a degreewise
// section, and [inc | section] is invertible in every degree.
Ses make_ses(const ChainMap& inc, const ChainMap& proj);

// The canonical sequence 0 -> A -> A (+) C -> C -> 0.
Ses sum_ses(const Complex& a, const Complex& c);

// Twisted sum: mid = A (+) C with differential [[d_A, theta], [0, d_C]].
// theta must be a chain map C -> A[1] (this is exactly the d^2 = 0
// condition for the glued complex).
Ses glue_ses(const Complex& a, const Complex& c, const ChainMap& theta);

// The scalar comparing det(mid) with det(sub) (x) det(quot): substitute
// every mid term by [inc | section] and contract.  Independent of the
// section; equals 1 on canonical direct sums.  In degree-0 concentrated
// sequences this is det[inc | section].
Element det_ses(const Ses& s, const PivotPolicy& policy = {});

// The interleaving sign in torsion multiplicativity.  For every short exact
// sequence of acyclic complexes,
//     torsion(mid) * det_ses(s) = torsion(sub) * torsion(quot)
//                                   * torsion_glue_sign(s).
// The sign is +-1, depends only on the rank patterns of sub and quot, and is
// computed by evaluating the same identity on reference acyclic complexes
// whose differentials are the identity blocks forced by the pattern.  Throws
// DomainError if the patterns admit no acyclic complex.
Element torsion_glue_sign(const Ses& s);

// The unit of a quasi-isomorphism a : A -> B, computed through the mapping
// cylinder: with K = (A -id-> A shifted into two adjacent degrees) the
// columns 0 -> K -> Cyl(a) -> B -> 0 and 0 -> A -> Cyl(a) -> cone(a) -> 0
// are degreewise split exact, K and cone(a) are acyclic, and
//   det_qis(a) = ses2 * torsion(cone a)^-1 * torsion(K) * ses1^-1
// (raw engine values).  Functorial and homotopy invariant; on degreewise
// isomorphisms it equals the alternating product of the usual determinants.
Element det_qis(const ChainMap& a, const PivotPolicy& policy = {});

// The evaluation scalar of L (x) L^dual -> 1 for a rank-h line placed in
// degrees of opposite parity (dual first): (-1)^h, computed by the engine.
Element canonical_unit_structure(const RingId& ring, int h);

// The unit comparing det(C) with det(H(C)) over a field, in the bases the
// default cohomology representatives provide.  Two independent algorithms:
//   * split route: decompose every term as image (+) cohomology lift (+)
//     coimage and contract directly;
//   * truncation route: walk the stupid filtration top-down; each step
//     splits the top term against the image of the incoming differential
//     and the filtration's top cohomology against the complex's own, along
//     the four-term exact sequence of the truncation pair.
// Both are normalized so that zero-differential complexes give 1.
// euler_iso runs both and insists they agree.
Element euler_iso_split(const Complex& c, const PivotPolicy& policy = {});
Element euler_iso_truncate(const Complex& c, const PivotPolicy& policy = {});
Element euler_iso(const Complex& c, const PivotPolicy& policy = {});

}  // namespace kdet
