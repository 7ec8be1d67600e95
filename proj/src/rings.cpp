#include "kdet/rings.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace kdet {

bool is_prime(long p) {
    if (p < 2) return false;
    for (long f = 2; f * f <= p; ++f)
        if (p % f == 0) return false;
    return true;
}

std::vector<long> prime_support(long m) {
    std::vector<long> ps;
    if (m < 0) m = -m;
    for (long f = 2; f * f <= m; ++f) {
        if (m % f == 0) {
            ps.push_back(f);
            while (m % f == 0) m /= f;
        }
    }
    if (m > 1) ps.push_back(m);
    return ps;
}

RingId RingId::ZInv(long m) {
    if (m < 2) throw DomainError("Z[1/m] requires m >= 2");
    return {RingKind::IntInv, 0, 1, m};
}

RingId RingId::Fp(long p) {
    if (!is_prime(p)) throw DomainError("F_p requires a prime p");
    return {RingKind::PrimeField, p, 1, 0};
}

RingId RingId::ZMod(long p, int k) {
    if (!is_prime(p)) throw DomainError("Z/p^k requires a prime p");
    if (k < 1) throw DomainError("Z/p^k requires k >= 1");
    return {RingKind::LocalZ, p, k, 0};
}

RingId RingId::Dual(long p) {
    if (!is_prime(p)) throw DomainError("F_p[e] requires a prime p");
    return {RingKind::DualNum, p, 1, 0};
}

mpz_class RingId::modulus() const {
    mpz_class m;
    mpz_ui_pow_ui(m.get_mpz_t(), static_cast<unsigned long>(p),
                  static_cast<unsigned long>(kind == RingKind::LocalZ ? k : 1));
    return m;
}

std::string RingId::tag() const {
    std::ostringstream os;
    switch (kind) {
        case RingKind::Int: return "Z";
        case RingKind::Rat: return "Q";
        case RingKind::IntInv: os << "Z[1/" << m << "]"; break;
        case RingKind::PrimeField: os << "F" << p; break;
        case RingKind::LocalZ:
            os << "Z/" << p;
            if (k > 1) os << "^" << k;
            break;
        case RingKind::DualNum: os << "F" << p << "[e]"; break;
    }
    return os.str();
}

RingId parse_ring(const std::string& tag) {
    auto fail = [&]() -> RingId {
        throw ParseError("unrecognized ring tag '" + tag + "'");
    };
    auto parse_long = [&](const std::string& s) -> long {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            fail();
        try {
            return std::stol(s);
        } catch (...) {
            fail();
        }
        return 0;
    };
    try {
        if (tag == "Z") return RingId::Z();
        if (tag == "Q") return RingId::Q();
        if (tag.rfind("Z[1/", 0) == 0 && tag.back() == ']')
            return RingId::ZInv(parse_long(tag.substr(4, tag.size() - 5)));
        if (tag.rfind("Z/", 0) == 0) {
            std::string body = tag.substr(2);
            auto caret = body.find('^');
            if (caret == std::string::npos) return RingId::ZMod(parse_long(body), 1);
            return RingId::ZMod(parse_long(body.substr(0, caret)),
                                static_cast<int>(parse_long(body.substr(caret + 1))));
        }
        if (tag.size() > 1 && tag[0] == 'F') {
            std::string body = tag.substr(1);
            if (body.size() > 3 && body.substr(body.size() - 3) == "[e]")
                return RingId::Dual(parse_long(body.substr(0, body.size() - 3)));
            return RingId::Fp(parse_long(body));
        }
    } catch (const DomainError& e) {
        throw ParseError("bad ring tag '" + tag + "': " + e.what());
    }
    return fail();
}

// --- element construction and canonical forms -------------------------------

namespace {

// v_p of a nonzero integer.
int int_valuation(const mpz_class& x, long p, int cap) {
    mpz_class r = abs(x);
    int v = 0;
    while (v < cap && mpz_divisible_ui_p(r.get_mpz_t(), p)) {
        r /= p;
        ++v;
    }
    return v;
}

bool smooth_over(const mpz_class& x, const std::vector<long>& primes) {
    mpz_class r = abs(x);
    for (long q : primes)
        while (mpz_divisible_ui_p(r.get_mpz_t(), q)) r /= q;
    return r == 1;
}

// Residue of an exact rational mod p^k; the denominator must be invertible.
mpq_class residue_mod(const RingId& ring, const mpq_class& q) {
    mpz_class mod = ring.modulus();
    mpz_class den = q.get_den();
    mpz_class num = q.get_num() % mod;
    if (num < 0) num += mod;
    if (den != 1) {
        mpz_class inv;
        if (!mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), mod.get_mpz_t()))
            throw DomainError("denominator not invertible in " + ring.tag());
        num = (num * inv) % mod;
    }
    return mpq_class(num);
}

}  // namespace

Element make_element(const RingId& ring, const mpq_class& a0, const mpq_class& b0) {
    mpq_class a = a0, b = b0;
    a.canonicalize();
    b.canonicalize();
    if (ring.kind != RingKind::DualNum && b != 0)
        throw DomainError("nonzero e-component outside " + ring.tag());
    switch (ring.kind) {
        case RingKind::Int:
            if (a.get_den() != 1) throw DomainError("not an integer: " + a.get_str());
            break;
        case RingKind::Rat:
            break;
        case RingKind::IntInv:
            if (!smooth_over(a.get_den(), prime_support(ring.m)))
                throw DomainError(a.get_str() + " is not an element of " + ring.tag());
            break;
        case RingKind::PrimeField:
        case RingKind::LocalZ:
            a = residue_mod(ring, a);
            break;
        case RingKind::DualNum: {
            RingId fp = RingId::Fp(ring.p);
            a = residue_mod(fp, a);
            b = residue_mod(fp, b);
            break;
        }
    }
    return Element{ring, a, b};
}

Element ring_zero(const RingId& ring) { return Element{ring, 0, 0}; }
Element ring_one(const RingId& ring) { return make_element(ring, 1); }
Element from_int(const RingId& ring, long v) { return make_element(ring, mpq_class(v)); }

bool is_zero(const Element& x) { return x.a == 0 && x.b == 0; }
bool is_one(const Element& x) { return x.a == 1 && x.b == 0; }

namespace {
void require_same_ring(const Element& x, const Element& y) {
    if (x.ring != y.ring)
        throw DomainError("ring mismatch: " + x.ring.tag() + " vs " + y.ring.tag());
}
}  // namespace

Element add(const Element& x, const Element& y) {
    require_same_ring(x, y);
    return make_element(x.ring, x.a + y.a, x.b + y.b);
}

Element sub(const Element& x, const Element& y) {
    require_same_ring(x, y);
    return make_element(x.ring, x.a - y.a, x.b - y.b);
}

Element neg(const Element& x) { return make_element(x.ring, -x.a, -x.b); }

Element mul(const Element& x, const Element& y) {
    require_same_ring(x, y);
    // (a1 + b1 e)(a2 + b2 e) = a1 a2 + (a1 b2 + b1 a2) e  with e^2 = 0.
    return make_element(x.ring, x.a * y.a, x.a * y.b + x.b * y.a);
}

Element mul_int(const Element& x, long c) {
    return make_element(x.ring, x.a * c, x.b * c);
}

std::optional<Element> inverse(const Element& x) {
    const RingId& ring = x.ring;
    switch (ring.kind) {
        case RingKind::Int:
            if (x.a == 1 || x.a == -1) return x;
            return std::nullopt;
        case RingKind::Rat:
            if (x.a == 0) return std::nullopt;
            return make_element(ring, 1 / x.a);
        case RingKind::IntInv: {
            if (x.a == 0) return std::nullopt;
            if (!smooth_over(x.a.get_num(), prime_support(ring.m)))
                return std::nullopt;
            return make_element(ring, 1 / x.a);
        }
        case RingKind::PrimeField:
        case RingKind::LocalZ: {
            mpz_class mod = ring.modulus(), inv;
            mpz_class num = x.a.get_num();
            if (!mpz_invert(inv.get_mpz_t(), num.get_mpz_t(), mod.get_mpz_t()))
                return std::nullopt;
            return make_element(ring, mpq_class(inv));
        }
        case RingKind::DualNum: {
            // (a + be)^{-1} = a^{-1} - a^{-2} b e  when a != 0 in F_p.
            if (x.a == 0) return std::nullopt;
            RingId fp = RingId::Fp(ring.p);
            mpz_class inv, mod = fp.modulus();
            mpz_class num = x.a.get_num();
            mpz_invert(inv.get_mpz_t(), num.get_mpz_t(), mod.get_mpz_t());
            mpq_class ia(inv);
            return make_element(ring, ia, -ia * ia * x.b);
        }
    }
    return std::nullopt;
}

bool is_unit(const Element& x) { return inverse(x).has_value(); }

Element pow_unit(const Element& x, long n) {
    Element base = x;
    if (n < 0) {
        auto inv = inverse(x);
        if (!inv) throw DomainError("negative power of a non-unit");
        base = *inv;
        n = -n;
    }
    Element acc = ring_one(x.ring);
    for (long i = 0; i < n; ++i) acc = mul(acc, base);
    return acc;
}

std::optional<Element> divide_exact(const Element& c, const Element& d) {
    require_same_ring(c, d);
    const RingId& ring = c.ring;
    if (is_zero(d)) {
        if (is_zero(c)) return ring_zero(ring);
        return std::nullopt;
    }
    switch (ring.kind) {
        case RingKind::Rat:
        case RingKind::PrimeField: {
            auto inv = inverse(d);
            return mul(c, *inv);
        }
        case RingKind::Int: {
            mpz_class q, r;
            mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), c.a.get_num().get_mpz_t(),
                        d.a.get_num().get_mpz_t());
            if (r != 0) return std::nullopt;
            return make_element(ring, mpq_class(q));
        }
        case RingKind::IntInv: {
            mpq_class q = c.a / d.a;
            if (!smooth_over(q.get_den(), prime_support(ring.m)))
                return std::nullopt;
            return make_element(ring, q);
        }
        case RingKind::LocalZ: {
            // d = u p^v with u a unit; c must have valuation >= v.
            if (is_zero(c)) return ring_zero(ring);
            int vd = int_valuation(d.a.get_num(), ring.p, ring.k);
            int vc = int_valuation(c.a.get_num(), ring.p, ring.k);
            if (vc < vd) return std::nullopt;
            mpz_class pv;
            mpz_ui_pow_ui(pv.get_mpz_t(), ring.p, vd);
            mpz_class du = d.a.get_num() / pv;       // unit part of d
            mpz_class cw = c.a.get_num() / pv;       // c with p^vd removed
            mpz_class mod = ring.modulus(), inv;
            mpz_invert(inv.get_mpz_t(), du.get_mpz_t(), mod.get_mpz_t());
            return make_element(ring, mpq_class(cw * inv));
        }
        case RingKind::DualNum: {
            if (is_unit(d)) return mul(c, *inverse(d));
            // d = b e with b != 0: solvable iff c is a multiple of e.
            if (c.a != 0) return std::nullopt;
            RingId fp = RingId::Fp(ring.p);
            mpz_class inv, mod = fp.modulus();
            mpz_class bnum = d.b.get_num();
            mpz_invert(inv.get_mpz_t(), bnum.get_mpz_t(), mod.get_mpz_t());
            return make_element(ring, c.b * mpq_class(inv), 0);
        }
    }
    return std::nullopt;
}

std::optional<mpz_class> pivot_weight(const Element& x) {
    if (is_zero(x)) return std::nullopt;
    switch (x.ring.kind) {
        case RingKind::Int:
            return mpz_class(abs(x.a.get_num()));
        case RingKind::Rat:
        case RingKind::PrimeField:
            return mpz_class(1);
        case RingKind::IntInv: {
            // Units are +- m-smooth rationals, so weigh by the m-free part.
            mpz_class r = abs(x.a.get_num());
            for (long q : prime_support(x.ring.m))
                while (mpz_divisible_ui_p(r.get_mpz_t(), q)) r /= q;
            return r;
        }
        case RingKind::LocalZ:
            return mpz_class(int_valuation(x.a.get_num(), x.ring.p, x.ring.k));
        case RingKind::DualNum:
            return mpz_class(x.a != 0 ? 0 : 1);
    }
    return std::nullopt;
}

std::string format_element(const Element& x) {
    if (x.ring.kind == RingKind::DualNum && x.b != 0)
        return x.a.get_num().get_str() + "+" + x.b.get_num().get_str() + "*e";
    if (x.a.get_den() == 1) return x.a.get_num().get_str();
    return x.a.get_str();
}

Element parse_element(const RingId& ring, const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw ParseError("empty element literal");
    auto is_int = [](const std::string& t) {
        if (t.empty()) return false;
        size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (i == t.size()) return false;
        return t.find_first_not_of("0123456789", i) == std::string::npos;
    };
    try {
        // a+b*e (dual numbers; the '+' separating the components is the one
        // before the last "b*e" chunk).
        auto star = s.rfind("*e");
        if (star != std::string::npos && star + 2 == s.size()) {
            std::string head = s.substr(0, star);
            std::string apart = "0", bpart;
            // The component separator is a sign preceded by a digit (signs that
            // start an integer are part of that integer).
            size_t sep = std::string::npos;
            for (size_t i = 1; i < head.size(); ++i)
                if ((head[i] == '+' || head[i] == '-') &&
                    std::isdigit(static_cast<unsigned char>(head[i - 1])))
                    sep = i;
            if (sep != std::string::npos && sep > 0) {
                apart = head.substr(0, sep);
                bpart = (head[sep] == '-' ? "-" : "") + head.substr(sep + 1);
            } else {
                bpart = head;
            }
            if (!is_int(apart) || !is_int(bpart))
                throw ParseError("bad element literal '" + text + "'");
            return make_element(ring, mpq_class(apart), mpq_class(bpart));
        }
        auto slash = s.find('/');
        if (slash != std::string::npos) {
            std::string n = s.substr(0, slash), d = s.substr(slash + 1);
            if (!is_int(n) || !is_int(d) || mpz_class(d) == 0)
                throw ParseError("bad element literal '" + text + "'");
            return make_element(ring, mpq_class(mpz_class(n), mpz_class(d)));
        }
        if (!is_int(s)) throw ParseError("bad element literal '" + text + "'");
        return make_element(ring, mpq_class(s));
    } catch (const DomainError& e) {
        throw ParseError("element '" + text + "' invalid in " + ring.tag() + ": " +
                         e.what());
    }
}

// --- unit groups -------------------------------------------------------------

UnitGroup enumerate_units(const RingId& ring) {
    UnitGroup g{ring, false, {}};
    switch (ring.kind) {
        case RingKind::Int:
            g.finite = true;
            g.elements = {ring_one(ring), from_int(ring, -1)};
            break;
        case RingKind::PrimeField:
        case RingKind::LocalZ: {
            g.finite = true;
            mpz_class mod = ring.modulus();
            for (mpz_class r = 1; r < mod; ++r)
                if (gcd(r, mpz_class(ring.p)) == 1)
                    g.elements.push_back(make_element(ring, mpq_class(r)));
            break;
        }
        case RingKind::DualNum:
            g.finite = true;
            for (long a = 1; a < ring.p; ++a)
                for (long b = 0; b < ring.p; ++b)
                    g.elements.push_back(make_element(ring, a, b));
            break;
        default:
            break;  // Q^x and Z[1/m]^x are infinite
    }
    return g;
}

long unit_order(const Element& u) {
    if (!is_unit(u)) throw DomainError("order of a non-unit");
    Element acc = u;
    long n = 1;
    while (!is_one(acc)) {
        acc = mul(acc, u);
        ++n;
        if (n > 10'000'000) throw DomainError("unit order guard exceeded");
    }
    return n;
}

// --- factored rationals -------------------------------------------------------

namespace {
void factor_into(const mpz_class& n0, long scale, std::map<long, long>& exps) {
    mpz_class n = abs(n0);
    mpz_class f = 2;
    long guard = 0;
    while (n > 1) {
        if (++guard > 3'000'000) throw DomainError("factorization guard exceeded");
        if (mpz_divisible_p(n.get_mpz_t(), f.get_mpz_t())) {
            long fe = 0;
            while (mpz_divisible_p(n.get_mpz_t(), f.get_mpz_t())) {
                n /= f;
                ++fe;
            }
            exps[f.get_si()] += scale * fe;
        }
        if (f * f > n) {
            if (n > 1) {
                if (!n.fits_slong_p()) throw DomainError("prime factor too large");
                exps[n.get_si()] += scale;
            }
            break;
        }
        f += (f == 2) ? 1 : 2;
    }
}
}  // namespace

FactoredRational factor_rational(const mpq_class& q) {
    if (q == 0) throw DomainError("cannot factor zero");
    FactoredRational f;
    f.sign = (q < 0) ? -1 : 1;
    factor_into(q.get_num(), +1, f.exps);
    factor_into(q.get_den(), -1, f.exps);
    for (auto it = f.exps.begin(); it != f.exps.end();)
        it = (it->second == 0) ? f.exps.erase(it) : std::next(it);
    return f;
}

mpq_class unfactor(const FactoredRational& f) {
    mpq_class q = f.sign;
    for (auto& [p, e] : f.exps) {
        mpz_class pe;
        mpz_ui_pow_ui(pe.get_mpz_t(), p, static_cast<unsigned long>(e > 0 ? e : -e));
        if (e > 0)
            q *= mpq_class(pe);
        else
            q /= mpq_class(pe);
    }
    return q;
}

FactoredRational fr_mul(const FactoredRational& x, const FactoredRational& y) {
    FactoredRational r = x;
    r.sign *= y.sign;
    for (auto& [p, e] : y.exps) {
        r.exps[p] += e;
        if (r.exps[p] == 0) r.exps.erase(p);
    }
    return r;
}

FactoredRational fr_inv(const FactoredRational& x) {
    FactoredRational r = x;
    for (auto& [p, e] : r.exps) e = -e;
    return r;
}

}  // namespace kdet
