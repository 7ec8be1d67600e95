#include "kdet/gradedline.hpp"

#include <algorithm>

namespace kdet {

Word word_one(const RingId& ring) { return Word(ring); }

Word word_factor(const RingId& ring, const std::string& line, int rank, int exp) {
    if (exp != 1 && exp != -1) throw DomainError("factor exponent must be +-1");
    if (rank < 0) throw DomainError("factor rank must be nonnegative");
    Word w(ring);
    if (rank > 0) w.factors.push_back({line, rank, exp});
    return w;
}

Word word_mul(const Word& a, const Word& b) {
    if (a.ring != b.ring) throw DomainError("word ring mismatch");
    Word w = a;
    w.scalar = mul(a.scalar, b.scalar);
    w.factors.insert(w.factors.end(), b.factors.begin(), b.factors.end());
    return w;
}

Word word_scale(const Word& w, const Element& unit) {
    if (!is_unit(unit)) throw DomainError("word scalar must be a unit");
    Word o = w;
    o.scalar = mul(o.scalar, unit);
    return o;
}

Word word_inv(const Word& w) {
    Word o(w.ring);
    auto inv = inverse(w.scalar);
    if (!inv) throw DomainError("word scalar must be a unit");
    o.scalar = *inv;
    o.factors.assign(w.factors.rbegin(), w.factors.rend());
    for (LineFactor& f : o.factors) f.exp = -f.exp;
    return o;
}

Word substitute(const Word& w, const std::string& line,
                const std::vector<LinePart>& parts, const Matrix& T) {
    int total = 0;
    for (const LinePart& p : parts) {
        if (p.rank < 0) throw DomainError("part rank must be nonnegative");
        total += p.rank;
    }
    if (T.rows != T.cols || T.rows != total)
        throw DomainError("substitution matrix must be square of the part-rank sum");
    Word o(w.ring);
    o.scalar = w.scalar;
    Element d = ring_one(w.ring);
    bool have_det = false;
    for (const LineFactor& f : w.factors) {
        if (f.line != line) {
            o.factors.push_back(f);
            continue;
        }
        if (f.rank != total)
            throw DomainError("substitution rank mismatch for line " + line);
        if (!have_det) {
            d = det(T);
            if (!is_unit(d))
                throw DomainError("substitution matrix for " + line +
                                  " is not invertible");
            have_det = true;
        }
        if (f.exp == 1) {
            for (const LinePart& p : parts)
                if (p.rank > 0) o.factors.push_back({p.line, p.rank, 1});
            o.scalar = mul(o.scalar, *inverse(d));
        } else {
            for (auto it = parts.rbegin(); it != parts.rend(); ++it)
                if (it->rank > 0) o.factors.push_back({it->line, it->rank, -1});
            o.scalar = mul(o.scalar, d);
        }
    }
    return o;
}

Element reduce_to_scalar(const Word& w) {
    Element s = w.scalar;
    std::vector<LineFactor> fs = w.factors;
    while (!fs.empty()) {
        const LineFactor f0 = fs.front();
        int partner = -1, same = 0;
        for (size_t k = 1; k < fs.size(); ++k) {
            if (fs[k].line != f0.line) continue;
            ++same;
            if (fs[k].exp == -f0.exp && partner < 0) partner = static_cast<int>(k);
        }
        if (same != 1 || partner < 0)
            throw DomainError("word does not reduce: line '" + f0.line +
                              "' lacks a unique dual partner");
        if (fs[partner].rank != f0.rank)
            throw DomainError("internal: rank mismatch on line '" + f0.line + "'");
        // Bubble the partner left until adjacent to the front factor.
        for (int k = partner; k > 1; --k) {
            if ((fs[static_cast<size_t>(k) - 1].rank * fs[static_cast<size_t>(k)].rank) % 2)
                s = neg(s);
            std::swap(fs[static_cast<size_t>(k) - 1], fs[static_cast<size_t>(k)]);
        }
        // (L,+1)(L,-1) contracts freely; the reversed pair costs the swap.
        if (f0.exp == -1 && f0.rank % 2) s = neg(s);
        fs.erase(fs.begin(), fs.begin() + 2);
    }
    return s;
}

}  // namespace kdet
