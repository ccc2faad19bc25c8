// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <random>

#include "psl2/group.hpp"

using namespace psl2;

TEST_CASE("element construction", "[group]") {
    auto g = GroupElement::make(2.0, 3.0, 1.0, 2.0);
    CHECK(g.a() * g.d() - g.b() * g.c() == Catch::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(GroupElement::make(1.0, 1.0, 1.0, 1.0), precondition_error);
    CHECK_THROWS_AS(GroupElement::a(-1.0), precondition_error);
    // -g and g are the same point of PSL(2,R)
    auto h = GroupElement::make(-2.0, -3.0, -1.0, -2.0);
    CHECK(g.distance(h) == 0.0);
    CHECK(h.c() > 0.0);
    CHECK((g * g.inverse()).distance(GroupElement::identity()) < 1e-15);
    // k[pi] = -1 is the identity
    CHECK(GroupElement::k(pi).distance(GroupElement::identity()) < 1e-15);
}

TEST_CASE("Iwasawa roundtrip and coordinate ranges", "[group]") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        auto g = random_element(rng);
        auto z = iwasawa_decompose(g);
        CHECK(z.y > 0.0);
        CHECK(z.theta >= 0.0);
        CHECK(z.theta < pi);
        CHECK(compose(z).distance(g) < 1e-12);
    }
    auto z = iwasawa_decompose(GroupElement::n(0.7) * GroupElement::a(2.5) * GroupElement::k(0.4));
    CHECK(z.x == Catch::Approx(0.7).epsilon(1e-14));
    CHECK(z.y == Catch::Approx(2.5).epsilon(1e-14));
    CHECK(z.theta == Catch::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("Bruhat cells", "[group]") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        auto g = random_element(rng);
        auto f = bruhat_decompose(g);
        CHECK(std::holds_alternative<BigCell>(f));
        CHECK(reassemble(f).distance(g) < 1e-12);
    }
    auto b = GroupElement::n(-1.5) * GroupElement::a(0.3);
    auto f = bruhat_decompose(b);
    REQUIRE(std::holds_alternative<SmallCell>(f));
    CHECK(std::get<SmallCell>(f).x == Catch::Approx(-1.5));
    CHECK(std::get<SmallCell>(f).u == Catch::Approx(0.3));
    CHECK(reassemble(f).distance(b) < 1e-15);
    // c below the cell tolerance counts as zero
    auto near = GroupElement::make(1.0, 0.0, 1e-14, 1.0);
    CHECK(std::holds_alternative<SmallCell>(bruhat_decompose(near)));
}

TEST_CASE("left action agrees with multiplication", "[group]") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        auto g = random_element(rng), h = random_element(rng);
        auto z = iwasawa_decompose(h);
        auto w = left_action(g, z);
        auto ref = iwasawa_decompose(g * h);
        CHECK(w.x == Catch::Approx(ref.x).margin(1e-11));
        CHECK(w.y == Catch::Approx(ref.y).epsilon(1e-11));
        double dt = std::abs(w.theta - ref.theta);
        CHECK(std::min(dt, pi - dt) < 1e-11);
    }
}

TEST_CASE("Haar measure is left invariant", "[group]") {
    // |Jacobian of z -> g z| * density(g z) = density(z)
    std::mt19937_64 rng(5);
    const double h = 1e-5;
    for (int i = 0; i < 50; ++i) {
        auto g = random_element(rng);
        auto z = iwasawa_decompose(random_element(rng));
        z.theta = std::clamp(z.theta, 0.1, pi - 0.1);  // stay away from the theta wrap
        double J[3][3];
        for (int k = 0; k < 3; ++k) {
            IwasawaCoords p = z, m = z;
            double* pp = k == 0 ? &p.x : (k == 1 ? &p.y : &p.theta);
            double* mm = k == 0 ? &m.x : (k == 1 ? &m.y : &m.theta);
            *pp += h;
            *mm -= h;
            auto a = left_action(g, p), b = left_action(g, m);
            double dth = a.theta - b.theta;
            if (dth > pi / 2) dth -= pi;
            if (dth < -pi / 2) dth += pi;
            J[0][k] = (a.x - b.x) / (2 * h);
            J[1][k] = (a.y - b.y) / (2 * h);
            J[2][k] = dth / (2 * h);
        }
        double det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) - J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                     J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
        CHECK(std::abs(det) * haar_density(left_action(g, z)) == Catch::Approx(haar_density(z)).epsilon(1e-7));
    }
}
