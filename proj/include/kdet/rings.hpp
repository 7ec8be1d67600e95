#pragma once
#include <gmpxx.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kdet/error.hpp"

namespace kdet {

// The six supported coefficient rings.  Every ring here is commutative and is
// either regular (Z, Q, Z[1/m], F_p, Z/p) or a chain ring whose ideals form a
// finite chain (Z/p^k with k >= 2, F_p[e] with e^2 = 0).
enum class RingKind { Int, Rat, IntInv, PrimeField, LocalZ, DualNum };

struct RingId {
    RingKind kind = RingKind::Int;
    long p = 0;  // prime parameter of F_p, Z/p^k, F_p[e]
    int k = 1;   // exponent of Z/p^k
    long m = 0;  // inverted integer of Z[1/m]

    static RingId Z() { return {RingKind::Int, 0, 1, 0}; }
    static RingId Q() { return {RingKind::Rat, 0, 1, 0}; }
    static RingId ZInv(long m);
    static RingId Fp(long p);
    static RingId ZMod(long p, int k);
    static RingId Dual(long p);

    bool operator==(const RingId& o) const {
        return kind == o.kind && p == o.p && k == o.k && m == o.m;
    }
    bool operator!=(const RingId& o) const { return !(*this == o); }

    bool is_field() const {
        return kind == RingKind::Rat || kind == RingKind::PrimeField;
    }
    bool is_finite() const {
        return kind == RingKind::PrimeField || kind == RingKind::LocalZ ||
               kind == RingKind::DualNum;
    }
    // Chain rings: every ideal is a power of the maximal ideal.  (Fields are
    // trivially chain rings but are handled by the field paths throughout.)
    bool is_chain() const {
        return (kind == RingKind::LocalZ && k >= 2) || kind == RingKind::DualNum;
    }
    bool is_regular() const {
        if (kind == RingKind::LocalZ) return k == 1;
        return kind != RingKind::DualNum;
    }
    // Nilpotency degree of the uniformizer: p^k = 0 resp. e^2 = 0.
    int chain_length() const { return kind == RingKind::DualNum ? 2 : k; }
    mpz_class modulus() const;  // p^k for residue rings

    std::string tag() const;    // Z, Q, Z[1/m], F<p>, Z/<p>^<k>, F<p>[e]
};

RingId parse_ring(const std::string& tag);

// Ring element in canonical form.  `a` is the main component; `b` is the
// e-coefficient and is zero outside F_p[e].  Canonical forms: integers with
// denominator 1; reduced fractions with positive denominator; residues in
// [0, p^k); dual components in [0, p).
struct Element {
    RingId ring;
    mpq_class a = 0;
    mpq_class b = 0;

    bool operator==(const Element& o) const {
        return ring == o.ring && a == o.a && b == o.b;
    }
    bool operator!=(const Element& o) const { return !(*this == o); }
};

Element make_element(const RingId& ring, const mpq_class& a,
                     const mpq_class& b = 0);
Element ring_zero(const RingId& ring);
Element ring_one(const RingId& ring);
Element from_int(const RingId& ring, long v);

bool is_zero(const Element& x);
bool is_one(const Element& x);

Element add(const Element& x, const Element& y);
Element sub(const Element& x, const Element& y);
Element neg(const Element& x);
Element mul(const Element& x, const Element& y);
Element mul_int(const Element& x, long c);

// Multiplicative inverse if x is a unit, else nullopt.
std::optional<Element> inverse(const Element& x);
bool is_unit(const Element& x);
Element pow_unit(const Element& x, long n);  // n may be negative for units

// The unique y with y * d == c when division is exact, else nullopt.  Over
// chain rings a solution may be non-unique; the returned one has minimal
// valuation excess (any solution is equally valid for back-substitution).
std::optional<Element> divide_exact(const Element& c, const Element& d);

// Pivot weight for elimination: smaller is better; nullopt for zero.
// Z: |value|; fields: 1; Z/p^k: p-adic valuation; F_p[e]: 0 or 1.
// Z[1/m]: the m-free part of the numerator (units of Z[1/m] weigh 1).
std::optional<mpz_class> pivot_weight(const Element& x);

std::string format_element(const Element& x);
Element parse_element(const RingId& ring, const std::string& text);

// --- unit groups -----------------------------------------------------------

struct UnitGroup {
    RingId ring;
    bool finite = false;
    std::vector<Element> elements;  // canonical enumeration order when finite
};

// Finite for F_p, Z/p^k, F_p[e] and for Z (where the units are {1, -1}).
UnitGroup enumerate_units(const RingId& ring);
long unit_order(const Element& u);  // multiplicative order in a finite group

// --- factored rationals ----------------------------------------------------

// Nonzero rational as sign * prod p^e, kept sorted by prime.  This is the
// exact carrier for unit computations in Q^x and Z[1/m]^x.
struct FactoredRational {
    int sign = 1;                // +1 or -1
    std::map<long, long> exps;   // prime -> exponent, exponents nonzero

    bool operator==(const FactoredRational& o) const {
        return sign == o.sign && exps == o.exps;
    }
};

FactoredRational factor_rational(const mpq_class& q);  // q != 0
mpq_class unfactor(const FactoredRational& f);
FactoredRational fr_mul(const FactoredRational& x, const FactoredRational& y);
FactoredRational fr_inv(const FactoredRational& x);

// Prime support of m (used for Z[1/m] membership and unit tests).
std::vector<long> prime_support(long m);
bool is_prime(long p);

}  // namespace kdet
