#include "kdet/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace kdet {

Matrix mat_identity(const RingId& ring, int n) {
    Matrix m(ring, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = ring_one(ring);
    return m;
}

Matrix mat_of(const RingId& ring, const std::vector<std::vector<long>>& rows) {
    int r = static_cast<int>(rows.size());
    int c = r == 0 ? 0 : static_cast<int>(rows[0].size());
    Matrix m(ring, r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(rows[i].size()) != c)
            throw DomainError("ragged matrix literal");
        for (int j = 0; j < c; ++j) m.at(i, j) = from_int(ring, rows[i][j]);
    }
    return m;
}

bool is_zero_matrix(const Matrix& a) {
    return std::all_of(a.entries.begin(), a.entries.end(),
                       [](const Element& e) { return is_zero(e); });
}

namespace {
void require_same_shape(const Matrix& a, const Matrix& b) {
    if (a.ring != b.ring || a.rows != b.rows || a.cols != b.cols)
        throw DomainError("matrix shape/ring mismatch");
}
}  // namespace

Matrix mat_add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b);
    Matrix m = a;
    for (size_t i = 0; i < m.entries.size(); ++i)
        m.entries[i] = add(m.entries[i], b.entries[i]);
    return m;
}

Matrix mat_sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b);
    Matrix m = a;
    for (size_t i = 0; i < m.entries.size(); ++i)
        m.entries[i] = sub(m.entries[i], b.entries[i]);
    return m;
}

Matrix mat_neg(const Matrix& a) {
    Matrix m = a;
    for (Element& e : m.entries) e = neg(e);
    return m;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.ring != b.ring || a.cols != b.rows)
        throw DomainError("matrix product shape/ring mismatch");
    Matrix m(a.ring, a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            if (is_zero(a.at(i, k))) continue;
            for (int j = 0; j < b.cols; ++j)
                m.at(i, j) = add(m.at(i, j), mul(a.at(i, k), b.at(k, j)));
        }
    return m;
}

Matrix mat_scale(const Element& x, const Matrix& a) {
    Matrix m = a;
    for (Element& e : m.entries) e = mul(x, e);
    return m;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
    if (a.ring != b.ring || a.rows != b.rows)
        throw DomainError("hstack shape/ring mismatch");
    Matrix m(a.ring, a.rows, a.cols + b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < a.cols; ++j) m.at(i, j) = a.at(i, j);
        for (int j = 0; j < b.cols; ++j) m.at(i, a.cols + j) = b.at(i, j);
    }
    return m;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
    if (a.ring != b.ring || a.cols != b.cols)
        throw DomainError("vstack shape/ring mismatch");
    Matrix m(a.ring, a.rows + b.rows, a.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) m.at(i, j) = a.at(i, j);
    for (int i = 0; i < b.rows; ++i)
        for (int j = 0; j < b.cols; ++j) m.at(a.rows + i, j) = b.at(i, j);
    return m;
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
    if (a.ring != b.ring) throw DomainError("block_diag ring mismatch");
    Matrix m(a.ring, a.rows + b.rows, a.cols + b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) m.at(i, j) = a.at(i, j);
    for (int i = 0; i < b.rows; ++i)
        for (int j = 0; j < b.cols; ++j) m.at(a.rows + i, a.cols + j) = b.at(i, j);
    return m;
}

Matrix take_cols(const Matrix& a, const std::vector<int>& js) {
    Matrix m(a.ring, a.rows, static_cast<int>(js.size()));
    for (size_t k = 0; k < js.size(); ++k) {
        if (js[k] < 0 || js[k] >= a.cols) throw DomainError("take_cols out of range");
        for (int i = 0; i < a.rows; ++i) m.at(i, static_cast<int>(k)) = a.at(i, js[k]);
    }
    return m;
}

Matrix take_rows(const Matrix& a, const std::vector<int>& is) {
    Matrix m(a.ring, static_cast<int>(is.size()), a.cols);
    for (size_t k = 0; k < is.size(); ++k) {
        if (is[k] < 0 || is[k] >= a.rows) throw DomainError("take_rows out of range");
        for (int j = 0; j < a.cols; ++j) m.at(static_cast<int>(k), j) = a.at(is[k], j);
    }
    return m;
}

Matrix mat_cast(const RingId& target, const Matrix& a) {
    Matrix m(target, a.rows, a.cols);
    for (size_t i = 0; i < m.entries.size(); ++i)
        m.entries[i] = make_element(target, a.entries[i].a, a.entries[i].b);
    return m;
}

// --- Smith normal form -------------------------------------------------------

std::vector<Element> SnfResult::divisors() const {
    std::vector<Element> ds;
    int n = std::min(D.rows, D.cols);
    for (int t = 0; t < n; ++t)
        if (!is_zero(D.at(t, t))) ds.push_back(D.at(t, t));
    return ds;
}

namespace {

// Elimination state.  Maintains U * A * V = D together with the explicit
// inverses and the determinants of U and V.
struct SnfWorker {
    Matrix D, U, Uinv, V, Vinv;
    Element detU, detV;
    std::mt19937_64 rng;
    bool randomize;

    SnfWorker(const Matrix& a, const PivotPolicy& policy)
        : D(a),
          U(mat_identity(a.ring, a.rows)),
          Uinv(U),
          V(mat_identity(a.ring, a.cols)),
          Vinv(V),
          detU(ring_one(a.ring)),
          detV(ring_one(a.ring)),
          rng(policy.seed),
          randomize(policy.randomize) {}

    void swap_rows(int i, int j) {
        if (i == j) return;
        for (int c = 0; c < D.cols; ++c) std::swap(D.at(i, c), D.at(j, c));
        for (int c = 0; c < U.cols; ++c) std::swap(U.at(i, c), U.at(j, c));
        for (int r = 0; r < Uinv.rows; ++r) std::swap(Uinv.at(r, i), Uinv.at(r, j));
        detU = neg(detU);
    }

    void swap_cols(int i, int j) {
        if (i == j) return;
        for (int r = 0; r < D.rows; ++r) std::swap(D.at(r, i), D.at(r, j));
        for (int r = 0; r < V.rows; ++r) std::swap(V.at(r, i), V.at(r, j));
        for (int c = 0; c < Vinv.cols; ++c) std::swap(Vinv.at(i, c), Vinv.at(j, c));
        detV = neg(detV);
    }

    // row_i += q * row_t; Uinv picks up the inverse column operation
    void add_row(int i, int t, const Element& q) {
        for (int c = 0; c < D.cols; ++c)
            D.at(i, c) = add(D.at(i, c), mul(q, D.at(t, c)));
        for (int c = 0; c < U.cols; ++c)
            U.at(i, c) = add(U.at(i, c), mul(q, U.at(t, c)));
        for (int r = 0; r < Uinv.rows; ++r)
            Uinv.at(r, t) = sub(Uinv.at(r, t), mul(q, Uinv.at(r, i)));
    }

    // col_j += q * col_t
    void add_col(int j, int t, const Element& q) {
        for (int r = 0; r < D.rows; ++r)
            D.at(r, j) = add(D.at(r, j), mul(q, D.at(r, t)));
        for (int r = 0; r < V.rows; ++r)
            V.at(r, j) = add(V.at(r, j), mul(q, V.at(r, t)));
        for (int c = 0; c < Vinv.cols; ++c)
            Vinv.at(t, c) = sub(Vinv.at(t, c), mul(q, Vinv.at(j, c)));
    }

    // col_j *= u with u a unit
    void scale_col(int j, const Element& u) {
        Element ui = *inverse(u);
        for (int r = 0; r < D.rows; ++r) D.at(r, j) = mul(D.at(r, j), u);
        for (int r = 0; r < V.rows; ++r) V.at(r, j) = mul(V.at(r, j), u);
        for (int c = 0; c < Vinv.cols; ++c) Vinv.at(j, c) = mul(Vinv.at(j, c), ui);
        detV = mul(detV, u);
    }

    // Minimal-weight entry of D[t.., t..] moved to (t, t); false if all zero.
    bool select_pivot(int t) {
        std::vector<std::pair<int, int>> best;
        std::optional<mpz_class> bestw;
        for (int i = t; i < D.rows; ++i)
            for (int j = t; j < D.cols; ++j) {
                auto w = pivot_weight(D.at(i, j));
                if (!w) continue;
                if (!bestw || *w < *bestw) {
                    bestw = *w;
                    best.assign(1, {i, j});
                } else if (*w == *bestw) {
                    best.push_back({i, j});
                }
            }
        if (best.empty()) return false;
        auto [pi, pj] = randomize ? best[rng() % best.size()] : best.front();
        swap_rows(t, pi);
        swap_cols(t, pj);
        return true;
    }

    // Integer Euclidean step: replace the pivot by the remainder of D(i,t).
    void euclid_row(int t, int i) {
        mpz_class q0, r0;
        mpz_tdiv_qr(q0.get_mpz_t(), r0.get_mpz_t(), D.at(i, t).a.get_num().get_mpz_t(),
                    D.at(t, t).a.get_num().get_mpz_t());
        add_row(i, t, make_element(D.ring, mpq_class(-q0)));
        swap_rows(t, i);
    }

    void euclid_col(int t, int j) {
        mpz_class q0, r0;
        mpz_tdiv_qr(q0.get_mpz_t(), r0.get_mpz_t(), D.at(t, j).a.get_num().get_mpz_t(),
                    D.at(t, t).a.get_num().get_mpz_t());
        add_col(j, t, make_element(D.ring, mpq_class(-q0)));
        swap_cols(t, j);
    }

    // Clear row t and column t and make the pivot divide the rest.  Division
    // steps always succeed over fields and chain rings (the pivot has minimal
    // weight); over Z the Euclidean fallback shrinks the pivot until they do.
    void clear_at(int t) {
        while (true) {
            bool retry = false;
            for (int i = t + 1; i < D.rows && !retry; ++i) {
                if (is_zero(D.at(i, t))) continue;
                auto q = divide_exact(D.at(i, t), D.at(t, t));
                if (q)
                    add_row(i, t, neg(*q));
                else {
                    euclid_row(t, i);
                    retry = true;
                }
            }
            if (retry) continue;
            for (int j = t + 1; j < D.cols && !retry; ++j) {
                if (is_zero(D.at(t, j))) continue;
                auto q = divide_exact(D.at(t, j), D.at(t, t));
                if (q)
                    add_col(j, t, neg(*q));
                else {
                    euclid_col(t, j);
                    retry = true;
                }
            }
            if (retry) continue;
            bool fixed = false;
            for (int i = t + 1; i < D.rows && !fixed; ++i)
                for (int j = t + 1; j < D.cols && !fixed; ++j)
                    if (!is_zero(D.at(i, j)) &&
                        !divide_exact(D.at(i, j), D.at(t, t))) {
                        add_row(t, i, ring_one(D.ring));
                        fixed = true;
                    }
            if (!fixed) return;
        }
    }
};

// Writes d as u * d_can with u a unit and d_can the canonical associate.
Element unit_part(const Element& d) {
    const RingId& ring = d.ring;
    switch (ring.kind) {
        case RingKind::Int:
            return from_int(ring, d.a < 0 ? -1 : 1);
        case RingKind::Rat:
        case RingKind::PrimeField:
            return d;  // canonical associate 1
        case RingKind::IntInv: {
            mpz_class mf = abs(d.a.get_num());
            for (long q : prime_support(ring.m))
                while (mpz_divisible_ui_p(mf.get_mpz_t(), q)) mf /= q;
            return make_element(ring, d.a / mpq_class(mf));
        }
        case RingKind::LocalZ: {
            long v = pivot_weight(d)->get_si();
            mpz_class pv;
            mpz_ui_pow_ui(pv.get_mpz_t(), static_cast<unsigned long>(ring.p),
                          static_cast<unsigned long>(v));
            return *divide_exact(d, make_element(ring, mpq_class(pv)));
        }
        case RingKind::DualNum:
            if (d.a != 0) return d;            // canonical associate 1
            return make_element(ring, d.b);    // d = b * e, canonical associate e
    }
    throw DomainError("unit_part: unreachable");
}

SnfResult finish(SnfWorker& w) {
    int n = std::min(w.D.rows, w.D.cols);
    for (int t = 0; t < n; ++t) {
        if (is_zero(w.D.at(t, t))) continue;
        Element u = unit_part(w.D.at(t, t));
        if (!is_one(u)) w.scale_col(t, *inverse(u));
    }
    SnfResult res{std::move(w.U),    std::move(w.Uinv), std::move(w.D),
                  std::move(w.V),    std::move(w.Vinv), std::move(w.detU),
                  std::move(w.detV), 0};
    for (int t = 0; t < n; ++t) {
        if (!is_zero(res.D.at(t, t))) ++res.rank;
        if (t + 1 < n && !is_zero(res.D.at(t + 1, t + 1)) &&
            !divide_exact(res.D.at(t + 1, t + 1), res.D.at(t, t)))
            throw DomainError("internal: SNF divisibility chain violated");
    }
    return res;
}

// Z[1/m] reduces to Z: scale away the (m-smooth, hence unit) denominators,
// eliminate over Z, then strip the m-parts of the diagonal back into V.
SnfResult snf_intinv(const Matrix& a, const PivotPolicy& policy) {
    const RingId ring = a.ring;
    mpz_class s = 1;
    for (const Element& e : a.entries) s = lcm(s, e.a.get_den());
    Matrix az(RingId::Z(), a.rows, a.cols);
    for (size_t i = 0; i < a.entries.size(); ++i)
        az.entries[i] = make_element(RingId::Z(), a.entries[i].a * s);
    SnfResult z = snf(az, policy);

    SnfResult res{mat_cast(ring, z.U),    mat_cast(ring, z.Uinv),
                  mat_cast(ring, z.D),    mat_cast(ring, z.V),
                  mat_cast(ring, z.Vinv), make_element(ring, z.detU.a),
                  make_element(ring, z.detV.a), z.rank};
    int n = std::min(a.rows, a.cols);
    for (int t = 0; t < n; ++t) {
        if (is_zero(res.D.at(t, t))) continue;
        // U (sA) V = D'  =>  U A V = D'/s; fold the unit part into V.
        Element d = make_element(ring, res.D.at(t, t).a / mpq_class(s));
        Element u = unit_part(d);
        Element ui = *inverse(u);
        res.D.at(t, t) = mul(d, ui);
        for (int r = 0; r < res.V.rows; ++r)
            res.V.at(r, t) = mul(res.V.at(r, t), ui);
        for (int c = 0; c < res.Vinv.cols; ++c)
            res.Vinv.at(t, c) = mul(res.Vinv.at(t, c), u);
        res.detV = mul(res.detV, ui);
    }
    return res;
}

}  // namespace

SnfResult snf(const Matrix& a, const PivotPolicy& policy) {
    if (a.ring.kind == RingKind::IntInv) return snf_intinv(a, policy);
    SnfWorker w(a, policy);
    int n = std::min(a.rows, a.cols);
    for (int t = 0; t < n; ++t) {
        if (!w.select_pivot(t)) break;
        w.clear_at(t);
    }
    return finish(w);
}

std::optional<Matrix> solve(const Matrix& a, const Matrix& b,
                            const PivotPolicy& policy) {
    if (a.ring != b.ring || a.rows != b.rows)
        throw DomainError("solve shape/ring mismatch");
    SnfResult s = snf(a, policy);
    Matrix ub = mat_mul(s.U, b);
    Matrix y(a.ring, a.cols, b.cols);
    int n = std::min(a.rows, a.cols);
    for (int c = 0; c < b.cols; ++c) {
        for (int i = 0; i < a.rows; ++i) {
            if (i < n && !is_zero(s.D.at(i, i))) {
                auto q = divide_exact(ub.at(i, c), s.D.at(i, i));
                if (!q) return std::nullopt;
                y.at(i, c) = *q;
            } else if (!is_zero(ub.at(i, c))) {
                return std::nullopt;
            }
        }
    }
    return mat_mul(s.V, y);
}

Matrix kernel(const Matrix& a, const PivotPolicy& policy) {
    SnfResult s = snf(a, policy);
    int n = std::min(a.rows, a.cols);
    std::vector<Matrix> gens;  // columns, each a.cols x 1
    bool chain = a.ring.is_chain();
    int L = a.ring.chain_length();
    for (int j = 0; j < a.cols; ++j) {
        Matrix vj = take_cols(s.V, {j});
        if (j < n && !is_zero(s.D.at(j, j))) {
            if (!chain) continue;
            long v = pivot_weight(s.D.at(j, j))->get_si();
            if (v == 0) continue;  // unit divisor: no annihilator
            // ann(pi^v) = (pi^(L-v))
            Element pi = a.ring.kind == RingKind::DualNum
                             ? make_element(a.ring, 0, 1)
                             : from_int(a.ring, a.ring.p);
            gens.push_back(mat_scale(pow_unit(pi, L - v), vj));
        } else {
            gens.push_back(vj);
        }
    }
    Matrix out(a.ring, a.cols, static_cast<int>(gens.size()));
    for (size_t k = 0; k < gens.size(); ++k)
        for (int i = 0; i < a.cols; ++i) out.at(i, static_cast<int>(k)) = gens[k].at(i, 0);
    return out;
}

std::optional<Matrix> inverse_matrix(const Matrix& a, const PivotPolicy& policy) {
    if (a.rows != a.cols) throw DomainError("inverse of a non-square matrix");
    auto x = solve(a, mat_identity(a.ring, a.rows), policy);
    if (!x) return std::nullopt;
    // Over a commutative ring a one-sided inverse of a square matrix is
    // two-sided, so A X = I suffices.
    return x;
}

Element det(const Matrix& a, const PivotPolicy& policy) {
    if (a.rows != a.cols) throw DomainError("det of a non-square matrix");
    SnfResult s = snf(a, policy);
    Element prod = ring_one(a.ring);
    for (int t = 0; t < a.rows; ++t) prod = mul(prod, s.D.at(t, t));
    return mul(mul(*inverse(s.detU), prod), *inverse(s.detV));
}

Element det_leibniz(const Matrix& a) {
    if (a.rows != a.cols) throw DomainError("det of a non-square matrix");
    int n = a.rows;
    if (n > 4) throw DomainError("det_leibniz supports n <= 4 only");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Element total = ring_zero(a.ring);
    do {
        int inv = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (perm[i] > perm[j]) ++inv;
        Element term = ring_one(a.ring);
        for (int i = 0; i < n; ++i) term = mul(term, a.at(i, perm[i]));
        total = (inv % 2) ? sub(total, term) : add(total, term);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

// --- matrix literals ---------------------------------------------------------

std::string format_matrix(const Matrix& a) {
    if (a.rows == 0 || a.cols == 0) {
        std::ostringstream os;
        os << "[]" << a.rows << "x" << a.cols;
        return os.str();
    }
    std::string out = "[";
    for (int i = 0; i < a.rows; ++i) {
        out += (i == 0) ? "[" : ",[";
        for (int j = 0; j < a.cols; ++j) {
            if (j) out += ",";
            out += format_element(a.at(i, j));
        }
        out += "]";
    }
    return out + "]";
}

Matrix parse_matrix(const RingId& ring, const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.rfind("[]", 0) == 0) {
        auto x = s.find('x', 2);
        if (x == std::string::npos)
            throw ParseError("bad empty-matrix literal '" + text + "'");
        std::string rs = s.substr(2, x - 2), cs = s.substr(x + 1);
        if (rs.empty() || cs.empty() ||
            rs.find_first_not_of("0123456789") != std::string::npos ||
            cs.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("bad empty-matrix literal '" + text + "'");
        int r = std::stoi(rs), c = std::stoi(cs);
        if (r != 0 && c != 0)
            throw ParseError("empty-matrix literal requires a zero dimension: '" +
                             text + "'");
        return Matrix(ring, r, c);
    }
    if (s.size() < 4 || s.substr(0, 2) != "[[" || s.substr(s.size() - 2) != "]]")
        throw ParseError("bad matrix literal '" + text + "'");
    std::string body = s.substr(2, s.size() - 4);
    std::vector<std::string> rows;
    size_t pos = 0;
    while (true) {
        auto sep = body.find("],[", pos);
        rows.push_back(body.substr(pos, sep == std::string::npos ? sep : sep - pos));
        if (sep == std::string::npos) break;
        pos = sep + 3;
    }
    std::vector<std::vector<std::string>> cells;
    for (const std::string& row : rows) {
        if (row.find('[') != std::string::npos || row.find(']') != std::string::npos)
            throw ParseError("bad matrix literal '" + text + "'");
        std::vector<std::string> cur;
        size_t p = 0;
        while (true) {
            auto comma = row.find(',', p);
            cur.push_back(row.substr(p, comma == std::string::npos ? comma : comma - p));
            if (comma == std::string::npos) break;
            p = comma + 1;
        }
        cells.push_back(std::move(cur));
    }
    int r = static_cast<int>(cells.size());
    int c = static_cast<int>(cells[0].size());
    Matrix m(ring, r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(cells[i].size()) != c)
            throw ParseError("ragged matrix literal '" + text + "'");
        for (int j = 0; j < c; ++j) m.at(i, j) = parse_element(ring, cells[i][j]);
    }
    return m;
}

}  // namespace kdet
