#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kdet/rings.hpp"

namespace kdet {

// Dense matrix over one of the supported rings, row-major.  Zero-sized
// matrices (0 x c, r x 0) are first-class citizens: they arise at the ends of
// bounded complexes and in cones.
struct Matrix {
    RingId ring;
    int rows = 0;
    int cols = 0;
    std::vector<Element> entries;

    Matrix() : ring(RingId::Z()) {}
    Matrix(const RingId& r, int nrows, int ncols)
        : ring(r), rows(nrows), cols(ncols),
          entries(static_cast<size_t>(nrows) * ncols, ring_zero(r)) {}

    Element& at(int i, int j) { return entries[static_cast<size_t>(i) * cols + j]; }
    const Element& at(int i, int j) const {
        return entries[static_cast<size_t>(i) * cols + j];
    }

    bool operator==(const Matrix& o) const {
        return ring == o.ring && rows == o.rows && cols == o.cols &&
               entries == o.entries;
    }
    bool operator!=(const Matrix& o) const { return !(*this == o); }
};

Matrix mat_identity(const RingId& ring, int n);
// Test/fixture helper: build from integer rows (each row the same length).
Matrix mat_of(const RingId& ring, const std::vector<std::vector<long>>& rows);

bool is_zero_matrix(const Matrix& a);
Matrix mat_add(const Matrix& a, const Matrix& b);
Matrix mat_sub(const Matrix& a, const Matrix& b);
Matrix mat_neg(const Matrix& a);
Matrix mat_mul(const Matrix& a, const Matrix& b);
Matrix mat_scale(const Element& x, const Matrix& a);

Matrix hstack(const Matrix& a, const Matrix& b);  // [a | b]
Matrix vstack(const Matrix& a, const Matrix& b);  // [a ; b]
Matrix block_diag(const Matrix& a, const Matrix& b);
// Columns a.col(j) for j in js, in the order given.
Matrix take_cols(const Matrix& a, const std::vector<int>& js);
Matrix take_rows(const Matrix& a, const std::vector<int>& is);

// Entry-wise reinterpretation along the canonical map into `target`
// (Z -> anything, Z[1/m] -> Q, ...).  Throws DomainError if an entry has no
// image (e.g. 1/2 into Z).
Matrix mat_cast(const RingId& target, const Matrix& a);

// --- Smith normal form -------------------------------------------------------

// Pivot selection: by default the first row-major entry of minimal weight.
// With randomize set, ties among minimal-weight entries are broken by a
// deterministic seeded draw, which lets callers probe that downstream results
// do not depend on the tie order.
struct PivotPolicy {
    std::uint64_t seed = 0;
    bool randomize = false;
};

// U * A * V = D with U, V invertible over the ring and D diagonal with the
// divisibility chain d_1 | d_2 | ... .  Diagonal entries are canonical
// associates: positive integers over Z and Z[1/m] (m-free there), 1 over
// fields, p^v over Z/p^k, and 1 or e over F_p[e].
struct SnfResult {
    Matrix U, Uinv, D, V, Vinv;
    Element detU, detV;  // units: determinants of the accumulated U and V
    int rank = 0;        // number of nonzero diagonal entries

    std::vector<Element> divisors() const;  // the nonzero d_i, in order
};

SnfResult snf(const Matrix& a, const PivotPolicy& policy = {});

// Some X with A X = B, or nullopt if none exists.  The witness is
// deterministic for a fixed policy.
std::optional<Matrix> solve(const Matrix& a, const Matrix& b,
                            const PivotPolicy& policy = {});

// Columns generating ker A.  Over the regular rings this is a basis; over the
// chain rings Z/p^k and F_p[e] it additionally contains the annihilator
// generators pi^(L-v) * v_j attached to diagonal entries pi^v (0 < v < L).
Matrix kernel(const Matrix& a, const PivotPolicy& policy = {});

std::optional<Matrix> inverse_matrix(const Matrix& a,
                                     const PivotPolicy& policy = {});

Element det(const Matrix& a, const PivotPolicy& policy = {});
// Independent cross-check of det by the permutation-sum formula, n <= 4.
Element det_leibniz(const Matrix& a);

// --- matrix literals ---------------------------------------------------------

// [[a,b],[c,d]] with element literals; a zero-sized matrix prints as []RxC.
std::string format_matrix(const Matrix& a);
Matrix parse_matrix(const RingId& ring, const std::string& text);

}  // namespace kdet
