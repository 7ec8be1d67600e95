#include <random>

#include "doctest.h"
#include "kdet/ktheory.hpp"

using namespace kdet;

namespace {

Complex two_term(const RingId& ring, int lo, long v) {
    return make_complex(ring, lo, {1, 1}, {mat_of(ring, {{v}})});
}

RelK0Class q_class(const RelPair& pair, const std::string& s) {
    return class_of(make_fiber_obj(pair, 0, parse_element(pair.s, s)));
}

}  // namespace

TEST_CASE("connecting map recovers the twist of a glued sequence") {
    RingId z = RingId::Z();
    Complex a = one_term(z, 0);
    Complex c = one_term(z, -1);
    std::map<int, Matrix> tc{{-1, mat_of(z, {{3}})}};
    ChainMap theta = make_chain_map(c, shift(a, 1), tc);
    Ses s = glue_ses(a, c, theta);
    ChainMap conn = connecting_map(s);
    CHECK(conn.at(-1) == mat_of(z, {{3}}));

    // a wider quotient, twist still recovered on the nose
    Complex a2 = one_term(z, 0);
    Complex c2 = direct_sum(one_term(z, -2), one_term(z, -1));
    std::map<int, Matrix> tc2{{-1, mat_of(z, {{7}})}};
    ChainMap theta2 = make_chain_map(c2, shift(a2, 1), tc2);
    Ses s2 = glue_ses(a2, c2, theta2);
    ChainMap conn2 = connecting_map(s2);
    CHECK(conn2.at(-1) == mat_of(z, {{7}}));
    CHECK(is_zero_matrix(conn2.at(-2)));
}

TEST_CASE("identity ladders harvest the trivial relation") {
    RingId z = RingId::Z();
    Complex a = two_term(z, 0, 5);
    Complex c = direct_sum(one_term(z, -1), one_term(z, 0));
    ChainMap theta = zero_map(c, shift(a, 1));
    Ses s = glue_ses(a, c, theta);
    TriangleIsoScenario scn = make_scenario(
        s, s, identity_map(a), identity_map(s.mid), identity_map(c));
    HarvestedRelation rel = harvest(scn);
    CHECK(is_one(rel.ratio));
    CHECK(rel.provenance.find("sub=") != std::string::npos);
}

TEST_CASE("ladders that only fix two of the three squares are rejected") {
    RingId f3 = RingId::Fp(3);
    Complex a = one_term(f3, 0);
    Complex c = one_term(f3, -1);

    // Different twists with a diagonal middle rung: the inclusion and
    // projection squares commute up to homotopy, the connecting square
    // (which has no homotopy slack here) does not.
    ChainMap th1 = make_chain_map(c, shift(a, 1), {{-1, mat_of(f3, {{1}})}});
    ChainMap th2 = make_chain_map(c, shift(a, 1), {{-1, mat_of(f3, {{2}})}});
    Ses d1 = glue_ses(a, c, th1);
    Ses d2 = glue_ses(a, c, th2);
    std::map<int, Matrix> bc{{-1, mat_of(f3, {{1}})}, {0, mat_of(f3, {{2}})}};
    ChainMap b = make_chain_map(d1.mid, d2.mid, bc);
    CHECK(homotopy_between(compose(d2.inc, identity_map(a)),
                           compose(b, d1.inc))
              .has_value());
    CHECK(homotopy_between(compose(d2.proj, b),
                           compose(identity_map(c), d1.proj))
              .has_value());
    CHECK_THROWS_AS(make_scenario(d1, d2, identity_map(a), b, identity_map(c)),
                    DomainError);

    // Same sequence on both sides, sub and mid scaled by the same unit: the
    // first two squares commute up to homotopy but the connecting square
    // pins the scale to 1.
    Element u = from_int(f3, 2);
    ChainMap au = make_chain_map(a, a, {{0, mat_of(f3, {{2}})}});
    std::map<int, Matrix> bu{{-1, mat_of(f3, {{2}})}, {0, mat_of(f3, {{2}})}};
    ChainMap b2 = make_chain_map(d1.mid, d1.mid, bu);
    CHECK(homotopy_between(compose(d1.inc, au), compose(b2, d1.inc))
              .has_value());
    CHECK(homotopy_between(compose(d1.proj, b2),
                           compose(identity_map(c), d1.proj))
              .has_value());
    CHECK_THROWS_AS(make_scenario(d1, d1, au, b2, identity_map(c)),
                    DomainError);
    CHECK(!is_one(u));
}

TEST_CASE("the dual-number ladder passes all three squares and yields 1+e") {
    RingId d3 = RingId::Dual(3);
    CollapseCertificate cert = collapse_certificate(3);
    CHECK(cert.ratio == make_element(d3, 1, 1));
    CHECK(cert.unit_group_order == 6);
    CHECK(cert.eps_order == 3);
    CHECK(cert.quotient.subgroup_order == 3);
    CHECK(cert.quotient.quotient_order == 2);
    CHECK(cert.quotient.quotient_invariants == std::vector<long>{2});
    CHECK(cert.k1_nontrivial);
    CHECK(cert.not_injective);
    CHECK_FALSE(cert.quotient.injective);
    CHECK_NOTHROW(verify_certificate(cert));
    CHECK(cert.conclusion.size() == 4);
}

TEST_CASE("collapse certificates across primes") {
    CollapseCertificate c2 = collapse_certificate(2);
    CHECK(c2.unit_group_order == 2);
    CHECK(c2.eps_order == 2);
    CHECK(c2.quotient.quotient_order == 1);
    CHECK(c2.quotient.quotient_invariants.empty());
    CHECK(c2.not_injective);
    CHECK_NOTHROW(verify_certificate(c2));

    CollapseCertificate c5 = collapse_certificate(5);
    CHECK(c5.unit_group_order == 20);
    CHECK(c5.eps_order == 5);
    CHECK(c5.quotient.quotient_order == 4);
    CHECK(c5.quotient.quotient_invariants == std::vector<long>{4});
    CHECK_NOTHROW(verify_certificate(c5));

    CHECK_THROWS_AS(collapse_certificate(6), DomainError);
}

TEST_CASE("certificate text is stable and self-describing") {
    std::string text = format_certificate(collapse_certificate(3));
    CHECK(text.find("collapse_certificate\n") == 0);
    CHECK(text.find("prime = 3\n") != std::string::npos);
    CHECK(text.find("ring = F3[e]\n") != std::string::npos);
    CHECK(text.find("unit_group_order = 6\n") != std::string::npos);
    CHECK(text.find("epsilon = 1+1*e\n") != std::string::npos);
    CHECK(text.find("ratio = 1+1*e\n") != std::string::npos);
    CHECK(text.find("quotient_order = 2\n") != std::string::npos);
    CHECK(text.find("quotient_invariants = [2]\n") != std::string::npos);
    CHECK(text.find("not_injective = true\n") != std::string::npos);
    CHECK(text.find("conclusion = ") != std::string::npos);
}

TEST_CASE("tampered certificates fail verification") {
    CollapseCertificate cert = collapse_certificate(3);
    CollapseCertificate bad = cert;
    bad.ratio = ring_one(bad.ring);
    CHECK_THROWS_AS(verify_certificate(bad), DomainError);
    bad = cert;
    bad.quotient.quotient_order = 6;
    CHECK_THROWS_AS(verify_certificate(bad), DomainError);
    bad = cert;
    bad.unit_group_order = 7;
    CHECK_THROWS_AS(verify_certificate(bad), DomainError);
    bad = cert;
    bad.scenario.a = identity_map(bad.scenario.d1.sub);
    CHECK_THROWS_AS(verify_certificate(bad), DomainError);
}

TEST_CASE("exhaustive relation scans over fields come back empty") {
    CHECK(enumerate_relations(RingId::Fp(2), 2, 0, 2).empty());
    CHECK(enumerate_relations(RingId::Fp(3), 2, 0, 1).empty());
}

TEST_CASE("exhaustive relation scan over dual numbers finds the collapse") {
    RingId d3 = RingId::Dual(3);
    auto rels = enumerate_relations(d3, 2, -1, 0);
    REQUIRE(rels.size() == 2);
    CHECK(rels[0].ratio == make_element(d3, 1, 1));
    CHECK(rels[1].ratio == make_element(d3, 1, 2));
    CHECK(mul(rels[0].ratio, rels[1].ratio) == ring_one(d3));
    for (const auto& r : rels) CHECK(!r.provenance.empty());
}

TEST_CASE("relation enumeration guards its domain and budget") {
    CHECK_THROWS_AS(enumerate_relations(RingId::Z(), 1, 0, 1), DomainError);
    CHECK_THROWS_AS(enumerate_relations(RingId::Q(), 1, 0, 1), DomainError);
    CHECK_THROWS_AS(enumerate_relations(RingId::Dual(3), 6, 0, 1), DomainError);
}

TEST_CASE("random ladders over regular rings never harvest a relation") {
    CHECK(sample_relations(RingId::Fp(3), 60, 0).empty());
    CHECK(sample_relations(RingId::Fp(2), 60, 1).empty());
    CHECK(sample_relations(RingId::Z(), 60, 2).empty());
    CHECK(sample_relations(RingId::Q(), 40, 3).empty());
}

TEST_CASE("chi_rel on two-term torsion complexes over Z:Q") {
    RelPair zq = parse_rel_pair("Z:Q");
    CHECK(chi_rel(two_term(RingId::Z(), 0, 5), zq) == q_class(zq, "5"));
    CHECK(chi_rel(two_term(RingId::Z(), 0, 15), zq) == q_class(zq, "15"));
    CHECK(chi_rel(two_term(RingId::Z(), 0, 1), zq).trivial());
    // shifting by one degree inverts the class
    CHECK(chi_rel(two_term(RingId::Z(), 1, 5), zq) == q_class(zq, "1/5"));
    CHECK(chi_rel(two_term(RingId::Z(), -1, 7), zq) == q_class(zq, "1/7"));
    CHECK(chi_rel(zero_complex(RingId::Z()), zq).trivial());
}

TEST_CASE("chi_rel uses the trivialization when cohomology survives") {
    RelPair zq = parse_rel_pair("Z:Q");
    RingId q = RingId::Q();
    Complex c = direct_sum(one_term(RingId::Z(), 0), one_term(RingId::Z(), 1));
    CHECK(chi_rel_rank(c, zq) == 1);
    Matrix t(q, 1, 1);
    t.at(0, 0) = parse_element(q, "2/3");
    CHECK(chi_rel(c, zq, t) == q_class(zq, "2/3"));
    Matrix tid = mat_identity(q, 1);
    CHECK(chi_rel(c, zq, tid).trivial());

    CHECK(chi_rel_rank(two_term(RingId::Z(), 0, 5), zq) == 0);
}

TEST_CASE("chi_rel rejects malformed inputs") {
    RelPair zq = parse_rel_pair("Z:Q");
    RingId z = RingId::Z(), q = RingId::Q();
    // nonzero Euler characteristic
    CHECK_THROWS_AS(chi_rel(one_term(z, 0), zq), DomainError);
    // wrong base ring
    CHECK_THROWS_AS(chi_rel(two_term(q, 0, 5), zq), DomainError);
    // pair whose S side is not a field
    RelPair zz6 = parse_rel_pair("Z:Z[1/6]");
    CHECK_THROWS_AS(chi_rel(two_term(z, 0, 5), zz6), DomainError);
    // missing trivialization
    Complex c = direct_sum(one_term(z, 0), one_term(z, 1));
    CHECK_THROWS_AS(chi_rel(c, zq), DomainError);
    // superfluous trivialization
    CHECK_THROWS_AS(chi_rel(two_term(z, 0, 5), zq, mat_identity(q, 1)),
                    DomainError);
    // wrong shape, wrong ring, singular
    CHECK_THROWS_AS(chi_rel(c, zq, mat_identity(q, 2)), DomainError);
    CHECK_THROWS_AS(chi_rel(c, zq, mat_identity(z, 1)), DomainError);
    CHECK_THROWS_AS(chi_rel(c, zq, Matrix(q, 1, 1)), DomainError);
}

TEST_CASE("both euler routes agree on seeded random complexes") {
    RelPair zq = parse_rel_pair("Z:Q");
    std::mt19937_64 rng(0);
    for (int trial = 0; trial < 40; ++trial) {
        Complex c = random_complex(RingId::Z(), 6, -2, 3, rng);
        int h = chi_rel_rank(c, zq);
        std::optional<Matrix> t;
        if (h > 0) {
            Matrix m = random_invertible(RingId::Q(), h, rng);
            t = m;
        }
        RelK0Class split = chi_rel_route(c, zq, t, EulerRoute::Split);
        RelK0Class trunc = chi_rel_route(c, zq, t, EulerRoute::Truncate);
        CAPTURE(trial);
        CHECK(split == trunc);
        CHECK(chi_rel(c, zq, t) == split);
    }
}

TEST_CASE("chi_rel is independent of pivot randomization") {
    RelPair zq = parse_rel_pair("Z:Q");
    PivotPolicy p1{11, true}, p2{99, true};
    Complex tor = two_term(RingId::Z(), 0, 12);
    CHECK(chi_rel(tor, zq, std::nullopt, p1) == q_class(zq, "12"));
    CHECK(chi_rel(tor, zq, std::nullopt, p2) == q_class(zq, "12"));

    RingId q = RingId::Q();
    Complex c = direct_sum(one_term(RingId::Z(), 0), one_term(RingId::Z(), 1));
    Matrix t(q, 1, 1);
    t.at(0, 0) = parse_element(q, "2/3");
    CHECK(chi_rel(c, zq, t, p1) == q_class(zq, "2/3"));
    CHECK(chi_rel(c, zq, t, p2) == q_class(zq, "2/3"));

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Complex r = random_complex(RingId::Z(), 6, -1, 2, rng);
        int h = chi_rel_rank(r, zq);
        std::optional<Matrix> tr;
        if (h > 0) tr = random_invertible(q, h, rng);
        CAPTURE(trial);
        CHECK(chi_rel(r, zq, tr, p1) == chi_rel(r, zq, tr, p2));
    }
}

TEST_CASE("chi_rel multiplies over coprime torsion orders") {
    RelPair zq = parse_rel_pair("Z:Q");
    RingId z = RingId::Z();
    for (long m : {2, 3, 5, 7}) {
        for (long n : {9, 11, 25}) {
            if (m == n) continue;
            RelK0Class lhs = chi_rel(two_term(z, 0, m * n), zq);
            RelK0Class rhs = k0_mul(chi_rel(two_term(z, 0, m), zq),
                                    chi_rel(two_term(z, 0, n), zq));
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("chi_rel is additive over direct sums") {
    RelPair zq = parse_rel_pair("Z:Q");
    RingId z = RingId::Z(), q = RingId::Q();
    Complex tor5 = two_term(z, 0, 5);
    Complex free01 = direct_sum(one_term(z, 0), one_term(z, 1));
    Matrix t(q, 1, 1);
    t.at(0, 0) = parse_element(q, "2/3");

    AdditivityReport rep =
        chi_rel_additivity_check(tor5, free01, std::nullopt, t, zq);
    CHECK(rep.ok);
    CHECK(rep.left_class == q_class(zq, "5"));
    CHECK(rep.right_class == q_class(zq, "2/3"));
    CHECK(rep.product == q_class(zq, "10/3"));
    CHECK(rep.sum_class == q_class(zq, "10/3"));

    AdditivityReport rep0 = chi_rel_additivity_check(
        tor5, zero_complex(z), std::nullopt, std::nullopt, zq);
    CHECK(rep0.ok);
    CHECK(rep0.sum_class == q_class(zq, "5"));

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        Complex c1 = random_complex(z, 5, -1, 2, rng);
        Complex c2 = random_complex(z, 5, -1, 2, rng);
        std::optional<Matrix> t1, t2;
        int h1 = chi_rel_rank(c1, zq), h2 = chi_rel_rank(c2, zq);
        if (h1 > 0) t1 = random_invertible(q, h1, rng);
        if (h2 > 0) t2 = random_invertible(q, h2, rng);
        CAPTURE(trial);
        CHECK(chi_rel_additivity_check(c1, c2, t1, t2, zq).ok);
    }
}

TEST_CASE("chi_rel of an acyclic-after-base-change complex matches swan_eta") {
    RelPair zq = parse_rel_pair("Z:Q");
    RingId z = RingId::Z(), q = RingId::Q();
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 1 + static_cast<int>(rng() % 3);
        Matrix a(z, n, n);
        bool ok = false;
        while (!ok) {
            for (auto& e : a.entries)
                e = from_int(z, static_cast<long>(rng() % 9) - 4);
            ok = !is_zero(det(a));
        }
        Complex c = make_complex(z, 0, {n, n}, {a});
        SwanGenerator g{n, n, mat_cast(q, a)};
        CAPTURE(trial);
        CHECK(chi_rel(c, zq) == swan_eta(g, zq));
    }
}

TEST_CASE("chi_k0 is the alternating rank sum") {
    RingId z = RingId::Z();
    CHECK(chi_k0(zero_complex(z)) == 0);
    CHECK(chi_k0(one_term(z, 0, 3)) == 3);
    CHECK(chi_k0(one_term(z, 1, 3)) == -3);
    CHECK(chi_k0(two_term(z, 0, 5)) == 0);
}

TEST_CASE("seeded generators have the advertised invariants") {
    std::mt19937_64 rng(42);
    for (const RingId& ring :
         {RingId::Z(), RingId::Q(), RingId::Fp(2), RingId::Fp(3),
          RingId::Dual(3)}) {
        for (int trial = 0; trial < 10; ++trial) {
            Complex c = random_complex(ring, 6, -2, 3, rng);
            CHECK(euler_char(c) == 0);
            Complex ac = random_acyclic(ring, 6, -2, 3, rng);
            CHECK(is_acyclic(ac));
            int n = static_cast<int>(rng() % 4);
            Matrix m = random_invertible(ring, n, rng);
            CHECK(is_unit(det(m)));
            if (ring == RingId::Z())
                CHECK(inverse_matrix(m).has_value());
        }
    }
}

TEST_CASE("harvest re-verifies the scenario it is given") {
    CollapseCertificate cert = collapse_certificate(3);
    TriangleIsoScenario broken = cert.scenario;
    broken.h_sub.comps.clear();
    CHECK_THROWS_AS(harvest(broken), DomainError);
}
