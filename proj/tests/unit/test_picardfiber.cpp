#include "doctest.h"
#include "kdet/picardfiber.hpp"


#include <algorithm>
#include <numeric>
#include <random>

using namespace kdet;

namespace {

Element q_elem(const std::string& s) {
    return parse_element(RingId::Q(), s);
}

RelK0Class cls(const RelPair& pair, const std::string& delta_text) {
    Element d = parse_element(pair.s, delta_text);
    return class_of(make_fiber_obj(pair, 0, d));
}

}  // namespace

TEST_CASE("pair validation accepts the supported square and nothing else") {
    CHECK_NOTHROW(make_rel_pair(RingId::Z(), RingId::Q()));
    CHECK_NOTHROW(make_rel_pair(RingId::Z(), RingId::ZInv(6)));
    CHECK_NOTHROW(make_rel_pair(RingId::ZInv(6), RingId::Q()));
    CHECK_NOTHROW(make_rel_pair(RingId::Fp(5), RingId::Fp(5)));
    CHECK_NOTHROW(make_rel_pair(RingId::Q(), RingId::Q()));
    // Targets must be regular; unglued combinations are rejected.
    CHECK_THROWS_AS(make_rel_pair(RingId::Dual(3), RingId::Dual(3)), DomainError);
    CHECK_THROWS_AS(make_rel_pair(RingId::ZMod(3, 2), RingId::ZMod(3, 2)),
                    DomainError);
    CHECK_THROWS_AS(make_rel_pair(RingId::Q(), RingId::Z()), DomainError);
    CHECK_THROWS_AS(make_rel_pair(RingId::Fp(3), RingId::Q()), DomainError);
    CHECK_THROWS_AS(make_rel_pair(RingId::ZInv(6), RingId::ZInv(10)), DomainError);

    CHECK(format_rel_pair(parse_rel_pair("Z:Q")) == "Z:Q");
    CHECK(format_rel_pair(parse_rel_pair("Z:Z[1/6]")) == "Z:Z[1/6]");
    CHECK(format_rel_pair(parse_rel_pair("Z[1/6]:Q")) == "Z[1/6]:Q");
    CHECK_THROWS_AS(parse_rel_pair("Z"), ParseError);
}

TEST_CASE("fiber objects live in degree zero with unit scalars") {
    RelPair zq = make_rel_pair(RingId::Z(), RingId::Q());
    CHECK_NOTHROW(make_fiber_obj(zq, 0, q_elem("-10/3")));
    CHECK_THROWS_AS(make_fiber_obj(zq, 1, q_elem("2")), DomainError);
    CHECK_THROWS_AS(make_fiber_obj(zq, -2, q_elem("2")), DomainError);
    CHECK_THROWS_AS(make_fiber_obj(zq, 0, q_elem("0")), DomainError);
    // Scalar over the wrong ring.
    CHECK_THROWS_AS(make_fiber_obj(zq, 0, from_int(RingId::Z(), 2)), DomainError);
}

TEST_CASE("class normal forms per pair") {
    RelPair zq = make_rel_pair(RingId::Z(), RingId::Q());
    CHECK(cls(zq, "1").trivial());
    CHECK(cls(zq, "-1").trivial());
    CHECK(format_class(cls(zq, "-10/3")) == "10/3");
    CHECK(format_class(cls(zq, "10/3")) == "10/3");
    CHECK(cls(zq, "6/4") == cls(zq, "3/2"));

    RelPair zzm = make_rel_pair(RingId::Z(), RingId::ZInv(6));
    RelK0Class c49 = cls(zzm, "4/9");
    CHECK(c49.nf.exps == std::map<long, long>{{2, 2}, {3, -2}});
    CHECK(format_class(c49) == "4/9");
    CHECK(cls(zzm, "-4/9") == c49);

    RelPair zmq = make_rel_pair(RingId::ZInv(6), RingId::Q());
    // Primes dividing 6 are already units upstairs, so they die.
    CHECK(cls(zmq, "12").nf.exps == std::map<long, long>{});
    CHECK(format_class(cls(zmq, "-35/8")) == "35");
    CHECK(cls(zmq, "5/7") == cls(zmq, "45/7"));

    RelPair idq = make_rel_pair(RingId::Q(), RingId::Q());
    CHECK(cls(idq, "22/7").trivial());
}

TEST_CASE("classes form a group under componentwise arithmetic") {
    RelPair zq = make_rel_pair(RingId::Z(), RingId::Q());
    std::mt19937 rng(7);
    for (int t = 0; t < 50; ++t) {
        long a = 1 + static_cast<long>(rng() % 30);
        long b = 1 + static_cast<long>(rng() % 30);
        long c = 1 + static_cast<long>(rng() % 30);
        long d = 1 + static_cast<long>(rng() % 30);
        Element x = make_element(RingId::Q(), mpq_class(a, b));
        Element y = make_element(RingId::Q(), mpq_class(c, d));
        RelK0Class cx = boundary(x, zq), cy = boundary(y, zq);
        CHECK(k0_mul(cx, cy) == boundary(mul(x, y), zq));
        CHECK(k0_mul(cx, k0_inv(cx)).trivial());
        CHECK(k0_pow(cx, 3) == k0_mul(cx, k0_mul(cx, cx)));
    }
    // class_of is a homomorphism with kernel im(Z^x) = {+-1}, exhaustively
    // over small numerators and denominators.
    for (long a = 1; a <= 12; ++a)
        for (long b = 1; b <= 12; ++b) {
            if (std::gcd(a, b) != 1) continue;
            for (int sgn : {1, -1}) {
                Element u = make_element(RingId::Q(), mpq_class(sgn * a, b));
                bool trivial = boundary(u, zq).trivial();
                CHECK(trivial == (a == 1 && b == 1));
            }
        }
}

TEST_CASE("boundary exactness examples") {
    RelPair zq = make_rel_pair(RingId::Z(), RingId::Q());
    CHECK(boundary(q_elem("1"), zq).trivial());
    CHECK(boundary(q_elem("-1"), zq).trivial());
    CHECK(format_class(boundary(q_elem("7/2"), zq)) == "7/2");

    RelPair zzm = make_rel_pair(RingId::Z(), RingId::ZInv(6));
    Element m23 = parse_element(RingId::ZInv(6), "-2/3");
    Element p23 = parse_element(RingId::ZInv(6), "2/3");
    CHECK(boundary(m23, zzm) == boundary(p23, zzm));
}

TEST_CASE("swan generators: determinant class, identity, composition") {
    RelPair zq = make_rel_pair(RingId::Z(), RingId::Q());
    const RingId q = RingId::Q();

    SwanGenerator g{2, 2, mat_of(q, {{5, 0}, {0, 3}})};
    CHECK(format_class(swan_eta(g, zq)) == "15");

    SwanGenerator idg{3, 3, mat_identity(q, 3)};
    CHECK(swan_eta(idg, zq).trivial());

    CHECK_THROWS_AS(swan_eta(SwanGenerator{2, 1, mat_of(q, {{1, 0}})}, zq),
                    DomainError);
    CHECK_THROWS_AS(swan_eta(SwanGenerator{2, 2, mat_of(q, {{1, 0}, {2, 0}})}, zq),
                    DomainError);

    // Composition law (P,a,Q)·(Q,b,W) -> class of det(b a) on random pairs.
    std::mt19937 rng(99);
    for (int t = 0; t < 50; ++t) {
        int n = 1 + static_cast<int>(rng() % 3);
        auto rand_invertible = [&]() {
            Matrix m = mat_identity(q, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j)
                        m.at(i, j) = from_int(q, static_cast<long>(rng() % 5) - 2);
            // Unitriangular times unitriangular transpose keeps det = 1, so
            // scale one row by a random nonzero rational to vary it.
            Matrix u = mat_identity(q, n), l = mat_identity(q, n);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    u.at(i, j) = from_int(q, static_cast<long>(rng() % 5) - 2);
                    l.at(j, i) = from_int(q, static_cast<long>(rng() % 5) - 2);
                }
            m = mat_mul(l, u);
            long s = 1 + static_cast<long>(rng() % 6);
            for (int j = 0; j < n; ++j) m.at(0, j) = mul_int(m.at(0, j), s);
            return m;
        };
        Matrix a = rand_invertible(), b = rand_invertible();
        SwanGenerator ga{n, n, a}, gb{n, n, b}, gba{n, n, mat_mul(b, a)};
        CHECK(swan_eta(gba, zq) == k0_mul(swan_eta(ga, zq), swan_eta(gb, zq)));
    }
}

TEST_CASE("fiber tensor matches class multiplication") {
    RelPair zq = make_rel_pair(RingId::Z(), RingId::Q());
    std::mt19937 rng(3);
    for (int t = 0; t < 30; ++t) {
        long a = 1 + static_cast<long>(rng() % 20);
        long b = 1 + static_cast<long>(rng() % 20);
        FiberObj x = make_fiber_obj(zq, 0, make_element(RingId::Q(), mpq_class(a, b)));
        FiberObj y = make_fiber_obj(zq, 0, make_element(RingId::Q(), mpq_class(b + 1, a)));
        CHECK(class_of(fiber_tensor(x, y)) ==
              k0_mul(class_of(x), class_of(y)));
    }
    // Rescaling by a unit from im(R^x) changes no class.
    FiberObj x = make_fiber_obj(zq, 0, q_elem("7/4"));
    FiberObj flip = make_fiber_obj(zq, 0, q_elem("-7/4"));
    CHECK(class_of(x) == class_of(flip));
}

TEST_CASE("abelian invariants of the finite unit groups") {
    // F7^x is cyclic of order 6.
    CHECK(abelian_invariants(RingId::Fp(7),
                             enumerate_units(RingId::Fp(7)).elements) ==
          std::vector<long>{6});
    // (Z/8)^x is the Klein four group.
    CHECK(abelian_invariants(RingId::ZMod(2, 3),
                             enumerate_units(RingId::ZMod(2, 3)).elements) ==
          std::vector<long>{2, 2});
    // (Z/9)^x is cyclic of order 6.
    CHECK(abelian_invariants(RingId::ZMod(3, 2),
                             enumerate_units(RingId::ZMod(3, 2)).elements) ==
          std::vector<long>{6});
    // (F3[e])^x has order 6 = C2 x C3 = C6.
    CHECK(abelian_invariants(RingId::Dual(3),
                             enumerate_units(RingId::Dual(3)).elements) ==
          std::vector<long>{6});
    // (F5[e])^x = C4 x C5 = C20.
    CHECK(abelian_invariants(RingId::Dual(5),
                             enumerate_units(RingId::Dual(5)).elements) ==
          std::vector<long>{20});
    // (F2[e])^x = {1, 1+e} = C2.
    CHECK(abelian_invariants(RingId::Dual(2),
                             enumerate_units(RingId::Dual(2)).elements) ==
          std::vector<long>{2});
    // Units of Z.
    CHECK(abelian_invariants(RingId::Z(), enumerate_units(RingId::Z()).elements) ==
          std::vector<long>{2});
}

TEST_CASE("quotient_units: orders, invariants, witnesses") {
    const RingId f3e = RingId::Dual(3);
    UnitGroup g = enumerate_units(f3e);
    REQUIRE(g.elements.size() == 6);

    Element one_eps = parse_element(f3e, "1+1*e");
    CHECK(unit_order(one_eps) == 3);

    QuotientReport r = quotient_units(g, {one_eps});
    CHECK(r.group_order == 6);
    CHECK(r.subgroup_order == 3);
    CHECK(r.quotient_order == 2);
    CHECK(r.quotient_invariants == std::vector<long>{2});
    CHECK_FALSE(r.injective);
    CHECK(r.collapsed_pairs.size() == 2);
    CHECK(r.quotient_order * r.subgroup_order == r.group_order);

    // Empty relations: quotient is the whole group.
    QuotientReport rid = quotient_units(g, {});
    CHECK(rid.quotient_order == 6);
    CHECK(rid.injective);
    CHECK(rid.quotient_invariants == std::vector<long>{6});
    CHECK(rid.collapsed_pairs.empty());

    // F5^x with relation 2 (a generator): trivial quotient.
    UnitGroup f5 = enumerate_units(RingId::Fp(5));
    QuotientReport r5 = quotient_units(f5, {from_int(RingId::Fp(5), 2)});
    CHECK(r5.quotient_order == 1);
    CHECK(r5.quotient_invariants.empty());

    // Relation not in the group is rejected.
    CHECK_THROWS_AS(quotient_units(f5, {ring_zero(RingId::Fp(5))}), DomainError);

    // |quotient| * |subgroup| = |group| across every cyclic subgroup choice.
    UnitGroup d5 = enumerate_units(RingId::Dual(5));
    for (const Element& u : d5.elements) {
        QuotientReport rr = quotient_units(d5, {u});
        CHECK(rr.quotient_order * rr.subgroup_order == rr.group_order);
        CHECK(rr.subgroup_order == unit_order(u));
    }
}

TEST_CASE("six-term exactness for the three concrete pairs") {
    for (const char* tag : {"Z:Q", "Z:Z[1/6]", "Z[1/6]:Q"}) {
        RelPair pair = parse_rel_pair(tag);
        ExactnessReport rep = check_exact_sequence(pair, 30);
        CAPTURE(tag);
        CHECK(rep.pi1_fiber_trivial);
        CHECK(rep.boundary_kills_image);
        CHECK(rep.boundary_kernel_exact);
        CHECK(rep.degree_zero_only);
        CHECK(rep.units_tested > 0);
        CHECK(rep.ok());
    }
    // Identity pair: everything collapses.
    ExactnessReport idr =
        check_exact_sequence(make_rel_pair(RingId::Fp(5), RingId::Fp(5)), 10);
    CHECK(idr.ok());
}
