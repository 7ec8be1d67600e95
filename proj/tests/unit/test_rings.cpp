#include "doctest.h"
#include "kdet/rings.hpp"

using namespace kdet;

TEST_CASE("ring tags round-trip through parse_ring") {
    for (const RingId& r : {RingId::Z(), RingId::Q(), RingId::ZInv(6),
                            RingId::Fp(5), RingId::ZMod(3, 1), RingId::ZMod(2, 3),
                            RingId::Dual(3)}) {
        CHECK(parse_ring(r.tag()) == r);
    }
    CHECK(parse_ring("Z/7").tag() == "Z/7");
    CHECK(parse_ring("Z/7^2").tag() == "Z/7^2");
    CHECK_THROWS_AS(parse_ring("F4"), ParseError);     // 4 is not prime
    CHECK_THROWS_AS(parse_ring("Z[1/1]"), ParseError); // inverting 1 is vacuous
    CHECK_THROWS_AS(parse_ring("R"), ParseError);
}

TEST_CASE("ring predicates") {
    CHECK(RingId::Z().is_regular());
    CHECK(RingId::ZMod(5, 1).is_regular());
    CHECK_FALSE(RingId::ZMod(5, 2).is_regular());
    CHECK_FALSE(RingId::Dual(5).is_regular());
    CHECK(RingId::ZMod(5, 2).is_chain());
    CHECK(RingId::Dual(5).is_chain());
    CHECK_FALSE(RingId::ZMod(5, 1).is_chain());
    CHECK(RingId::Dual(5).chain_length() == 2);
    CHECK(RingId::ZMod(2, 3).chain_length() == 3);
    CHECK(RingId::ZMod(2, 3).modulus() == 8);
    CHECK(RingId::Q().is_field());
    CHECK_FALSE(RingId::ZInv(6).is_field());
}

TEST_CASE("canonical forms") {
    CHECK(make_element(RingId::Q(), mpq_class(-10, 4)).a == mpq_class(-5, 2));
    CHECK(make_element(RingId::ZMod(3, 2), -1).a == 8);
    CHECK(make_element(RingId::ZMod(3, 2), 11).a == 2);
    Element d = make_element(RingId::Dual(3), 7, -1);
    CHECK(d.a == 1);
    CHECK(d.b == 2);
    // 1/2 exists in Z/9 as the residue 5.
    CHECK(make_element(RingId::ZMod(3, 2), mpq_class(1, 2)).a == 5);
    CHECK_THROWS_AS(make_element(RingId::Z(), mpq_class(1, 2)), DomainError);
    CHECK_THROWS_AS(make_element(RingId::ZInv(6), mpq_class(1, 5)), DomainError);
    CHECK(make_element(RingId::ZInv(6), mpq_class(5, 12)).a == mpq_class(5, 12));
    CHECK_THROWS_AS(make_element(RingId::ZMod(3, 2), mpq_class(1, 3)), DomainError);
}

TEST_CASE("arithmetic against direct rational checks") {
    RingId q = RingId::Q();
    Element x = make_element(q, mpq_class(2, 3)), y = make_element(q, mpq_class(-1, 6));
    CHECK(add(x, y).a == mpq_class(1, 2));
    CHECK(sub(x, y).a == mpq_class(5, 6));
    CHECK(mul(x, y).a == mpq_class(-1, 9));
    CHECK(neg(y).a == mpq_class(1, 6));
    CHECK(mul_int(x, 6).a == 4);
    CHECK_THROWS_AS(add(x, from_int(RingId::Z(), 1)), DomainError);
}

TEST_CASE("dual number arithmetic: e^2 = 0") {
    RingId d3 = RingId::Dual(3);
    Element e = make_element(d3, 0, 1);
    CHECK(is_zero(mul(e, e)));
    // (1+e)(1+2e) = 1 + 3e = 1 in F_3[e].
    Element u = make_element(d3, 1, 1), v = make_element(d3, 1, 2);
    CHECK(is_one(mul(u, v)));
    CHECK(*inverse(u) == v);
    CHECK(unit_order(u) == 3);
    CHECK_FALSE(is_unit(e));
    CHECK(pow_unit(u, -2) == mul(v, v));
}

TEST_CASE("inverses and units per ring") {
    CHECK(inverse(from_int(RingId::Z(), -1)).has_value());
    CHECK_FALSE(inverse(from_int(RingId::Z(), 2)).has_value());
    CHECK(inverse(make_element(RingId::Q(), mpq_class(3, 7)))->a == mpq_class(7, 3));
    CHECK_FALSE(inverse(ring_zero(RingId::Q())).has_value());
    // In Z[1/6] the units are +-2^a 3^b.
    RingId zi = RingId::ZInv(6);
    CHECK(inverse(make_element(zi, mpq_class(-8, 9))).has_value());
    CHECK_FALSE(inverse(make_element(zi, mpq_class(5, 4))).has_value());
    // In Z/9 the residue 3 is a zero divisor, 7 a unit.
    RingId z9 = RingId::ZMod(3, 2);
    CHECK_FALSE(is_unit(from_int(z9, 3)));
    CHECK(mul(from_int(z9, 7), *inverse(from_int(z9, 7))) == ring_one(z9));
    CHECK(inverse(from_int(RingId::Fp(7), 3))->a == 5);
}

TEST_CASE("divide_exact returns a valid witness exactly when solvable") {
    // Over Z: exact division only.
    CHECK(divide_exact(from_int(RingId::Z(), 6), from_int(RingId::Z(), -3))->a == -2);
    CHECK_FALSE(divide_exact(from_int(RingId::Z(), 5), from_int(RingId::Z(), 3)).has_value());
    // Over Z[1/6]: 5/2 divided by 15 leaves a factor 5 in place.
    RingId zi = RingId::ZInv(6);
    CHECK(divide_exact(make_element(zi, mpq_class(5, 2)), from_int(zi, 15))->a ==
          mpq_class(1, 6));
    CHECK_FALSE(divide_exact(ring_one(zi), from_int(zi, 5)).has_value());
    // Over Z/9: 3 | 6 with witness, 3 does not divide 1.
    RingId z9 = RingId::ZMod(3, 2);
    auto w = divide_exact(from_int(z9, 6), from_int(z9, 3));
    REQUIRE(w.has_value());
    CHECK(mul(*w, from_int(z9, 3)) == from_int(z9, 6));
    CHECK_FALSE(divide_exact(ring_one(z9), from_int(z9, 3)).has_value());
    // Over F_3[e]: e | 2e but e does not divide 1+e; x/0 only for x = 0.
    RingId d3 = RingId::Dual(3);
    Element e = make_element(d3, 0, 1);
    auto we = divide_exact(make_element(d3, 0, 2), e);
    REQUIRE(we.has_value());
    CHECK(mul(*we, e) == make_element(d3, 0, 2));
    CHECK_FALSE(divide_exact(make_element(d3, 1, 1), e).has_value());
    CHECK(is_zero(*divide_exact(ring_zero(d3), ring_zero(d3))));
    CHECK_FALSE(divide_exact(ring_one(d3), ring_zero(d3)).has_value());
}

TEST_CASE("pivot weights order candidates by how invertible they are") {
    CHECK(*pivot_weight(from_int(RingId::Z(), -6)) == 6);
    CHECK(*pivot_weight(make_element(RingId::Q(), mpq_class(7, 2))) == 1);
    CHECK_FALSE(pivot_weight(ring_zero(RingId::Z())).has_value());
    RingId z9 = RingId::ZMod(3, 2);
    CHECK(*pivot_weight(from_int(z9, 7)) == 0);
    CHECK(*pivot_weight(from_int(z9, 6)) == 1);
    RingId d3 = RingId::Dual(3);
    CHECK(*pivot_weight(make_element(d3, 2, 1)) == 0);
    CHECK(*pivot_weight(make_element(d3, 0, 1)) == 1);
    // In Z[1/6]: 15/2 has m-free part 5, and units weigh 1.
    RingId zi = RingId::ZInv(6);
    CHECK(*pivot_weight(make_element(zi, mpq_class(15, 2))) == 5);
    CHECK(*pivot_weight(make_element(zi, mpq_class(-9, 8))) == 1);
}

TEST_CASE("element literals parse and print") {
    RingId d3 = RingId::Dual(3);
    CHECK(parse_element(d3, "1+2*e") == make_element(d3, 1, 2));
    CHECK(parse_element(d3, "2*e") == make_element(d3, 0, 2));
    CHECK(parse_element(d3, "-1+-1*e") == make_element(d3, 2, 2));
    CHECK(parse_element(d3, "4") == make_element(d3, 1));
    CHECK(format_element(make_element(d3, 1, 2)) == "1+2*e");
    CHECK(format_element(make_element(d3, 2)) == "2");
    CHECK(parse_element(RingId::Q(), " -3 / 6 ").a == mpq_class(-1, 2));
    CHECK(format_element(make_element(RingId::Q(), mpq_class(-3, 6))) == "-1/2");
    CHECK(format_element(from_int(RingId::Z(), 12)) == "12");
    CHECK_THROWS_AS(parse_element(RingId::Q(), "1/0"), ParseError);
    CHECK_THROWS_AS(parse_element(RingId::Q(), "x"), ParseError);
    CHECK_THROWS_AS(parse_element(RingId::Z(), "1/2"), ParseError);
    CHECK_THROWS_AS(parse_element(RingId::Q(), "1+2*e"), ParseError);
}

TEST_CASE("unit group enumeration") {
    CHECK(enumerate_units(RingId::Z()).elements.size() == 2);
    CHECK_FALSE(enumerate_units(RingId::Q()).finite);
    CHECK(enumerate_units(RingId::Fp(7)).elements.size() == 6);
    // |(Z/9)^x| = 6, |F_3[e]^x| = (3-1)*3 = 6, |F_2[e]^x| = 2.
    CHECK(enumerate_units(RingId::ZMod(3, 2)).elements.size() == 6);
    CHECK(enumerate_units(RingId::Dual(3)).elements.size() == 6);
    CHECK(enumerate_units(RingId::Dual(2)).elements.size() == 2);
    for (const Element& u : enumerate_units(RingId::Dual(5)).elements)
        CHECK(is_unit(u));
    CHECK(unit_order(from_int(RingId::Fp(7), 3)) == 6);
    CHECK(unit_order(from_int(RingId::Z(), -1)) == 2);
}

TEST_CASE("factored rationals multiply by adding exponents") {
    FactoredRational f = factor_rational(mpq_class(-45, 8));
    CHECK(f.sign == -1);
    CHECK(f.exps == std::map<long, long>{{2, -3}, {3, 2}, {5, 1}});
    CHECK(unfactor(f) == mpq_class(-45, 8));
    FactoredRational g = factor_rational(mpq_class(8, 3));
    CHECK(fr_mul(f, g) == factor_rational(mpq_class(-15)));
    CHECK(fr_mul(f, fr_inv(f)) == factor_rational(1));
    CHECK(factor_rational(1).exps.empty());
    CHECK_THROWS_AS(factor_rational(0), DomainError);
    CHECK(prime_support(12) == std::vector<long>{2, 3});
    CHECK(is_prime(2));
    CHECK_FALSE(is_prime(1));
    CHECK_FALSE(is_prime(91));
}
