#pragma once
#include <string>
#include <vector>

#include "kdet/linalg.hpp"

namespace kdet {

// Formal calculus of tensor words in graded lines.  A factor stands for the
// determinant line of a named free module (the rank is the grading); a word
// is a unit scalar times an ordered tensor product of factors and their
// duals.  All sign bookkeeping downstream flows through exactly three rules:
//
//   swap      (L,e)(M,f) -> (M,f)(L,e)          costs (-1)^(rank L * rank M)
//   contract  (L,+1)(L,-1) -> (empty)            costs nothing
//   substitute a factor by the determinant lines of a decomposition, see
//             `substitute` below.
//
// Contracting the reversed pair (L,-1)(L,+1) therefore costs (-1)^rank.
struct LineFactor {
    std::string line;
    int rank = 0;
    int exp = 1;  // +1 or -1

    bool operator==(const LineFactor& o) const {
        return line == o.line && rank == o.rank && exp == o.exp;
    }
};

struct Word {
    RingId ring;
    Element scalar;
    std::vector<LineFactor> factors;

    Word() : ring(RingId::Z()), scalar(ring_one(ring)) {}
    explicit Word(const RingId& r) : ring(r), scalar(ring_one(r)) {}
};

Word word_one(const RingId& ring);
// Rank-0 lines are the unit object and are never emitted as factors.
Word word_factor(const RingId& ring, const std::string& line, int rank,
                 int exp = 1);
Word word_mul(const Word& a, const Word& b);
Word word_scale(const Word& w, const Element& unit);
// The inverse word: factors reversed with flipped exponents, scalar inverted.
Word word_inv(const Word& w);

struct LinePart {
    std::string line;
    int rank = 0;
};

// Rewrites every occurrence of `line` as the decomposition given by `parts`.
// T is the square change-of-basis matrix whose columns express the part bases
// in the basis of `line` (so T must be invertible and of size rank(line)).
// A factor (line,+1) becomes the parts in order with scalar det(T)^-1; a
// factor (line,-1) becomes the parts reversed with scalar det(T)^+1.
// Rank-0 parts are dropped.  Factors of other lines are untouched.
Word substitute(const Word& w, const std::string& line,
                const std::vector<LinePart>& parts, const Matrix& T);

// Cancels all factors against their duals (tracking swap signs) and returns
// the remaining scalar.  Each line name must occur exactly twice with
// opposite exponents, or not at all; anything else throws DomainError.
Element reduce_to_scalar(const Word& w);

}  // namespace kdet
