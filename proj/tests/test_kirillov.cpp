// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "psl2/kirillov.hpp"

using namespace psl2;

namespace {
double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }
} // namespace

TEST_CASE("Bessel kernel matches mpmath", "[kirillov][kernel]") {
    struct R {
        cplx nu;
        double u;
        cplx j;
    };
    std::vector<R> refs = {
        {{0, 0.4}, 0.3, {0.25739075160432467, 0}},
        {{0, 3}, 1.3, {0.3851196437857054, 0}},
        {{0.2, 0.7}, -0.7, {0.00012228525132392459, -7.7623300900816388e-05}},
        {{0.3, 0}, -2.0, {1.8976721986716438e-08, 0}},
        {{0, 9.5}, 0.05, {-0.064302197280470416, 0}},
        {{0, 1}, 5.0, {-1.8170485016724682, 0}},
    };
    for (auto& r : refs) {
        INFO("nu=" << r.nu << " u=" << r.u);
        CHECK(rel(bessel_kernel(r.nu, r.u), r.j) < 1e-10);
    }
}

TEST_CASE("Bessel kernel identities", "[kirillov][kernel]") {
    for (cplx nu : {cplx(0.0, 0.4), cplx(0.2, 0.7), cplx(0.0, 3.0), cplx(0.3, 0.0)})
        for (double u : {0.3, 1.3, -0.7, -2.0}) CHECK(std::abs(bessel_kernel(nu, u) - bessel_kernel(-nu, u)) < 1e-10);
    for (int k : {6, 8, 12})
        for (double u : {-0.1, -1.0, -5.0}) CHECK(bessel_kernel(SpectralParam::discrete(k), u) == 0.0);
    // the general formula at nu = k - 1/2 is a removable singularity; its limit is the discrete kernel
    for (int k : {6, 7})
        for (double u : {0.2, 1.5}) {
            double d = bessel_kernel(SpectralParam::discrete(k), u);
            CHECK(std::abs(bessel_kernel(cplx(k - 0.5, 0.0), u) - d) < 1e-7 * std::max(1.0, std::abs(d)));
        }
    // nu = 0 is also removable
    cplx z0 = bessel_kernel(cplx(0.0, 0.0), 0.8);
    CHECK(std::abs(z0 - bessel_kernel(cplx(0.0, 1e-3), 0.8)) < 1e-5);
    CHECK_THROWS_AS(bessel_kernel(cplx(0.0, 1.0), 0.0), precondition_error);
}

TEST_CASE("Gamma_p matches a direct Mellin transform in mpmath", "[kirillov][gamma_p]") {
    struct R {
        int p;
        cplx s, nu, v;
    };
    std::vector<R> refs = {
        {1, {0.8, 0.3}, {0, 0.4}, {-1.4788076203478353, -0.068768922808877531}},
        {-2, {1.5, 0}, {0.2, 0}, {0.010197401415407909, 0}},
        {0, {0.6, -1}, {0, 1.5}, {-0.61810898536420766, -1.2658131088530076}},
        {3, {2, 0.5}, {0, 0.7}, {-0.95761323153097788, -0.0092920874305939486}},
    };
    for (auto& r : refs) {
        INFO("p=" << r.p << " s=" << r.s << " nu=" << r.nu);
        CHECK(rel(gamma_p(r.p, r.s, r.nu), r.v) < 1e-8);
        CHECK(rel(gamma_p_direct(r.p, r.s, r.nu), r.v) < 1e-8);
        if (in_l_strip(r.s, r.nu)) CHECK(rel(gamma_p_strip(r.p, r.s, r.nu), r.v) < 1e-8);
    }
}

TEST_CASE("local functional equation and Gamma_p recursion", "[kirillov][gamma_p]") {
    for (int p : {-1, 2})
        for (cplx s : {cplx(0.5, 0.0), cplx(0.6, -1.2)})
            for (cplx nu : {cplx(0.0, 0.3), cplx(0.2, 0.0)}) {
                INFO("p=" << p << " s=" << s << " nu=" << nu);
                CHECK(functional_equation_residual(p, s, nu) < 1e-6);
                CHECK(gamma_p_recursion_residual(p, s, nu) < 1e-7);
            }
    CHECK_THROWS_AS(gamma_p(0, cplx(0.5), cplx(-0.7, 0.0)), precondition_error);
}

TEST_CASE("Kirillov model: quadrature and series routes agree", "[kirillov]") {
    for (int p : {-2, 0, 3})
        for (double u : {-1.2, -0.1, 0.05, 0.7, 2.5}) {
            cplx nu(0.0, 1.4);
            cplx a = kirillov_phi(p, nu, u), b = kirillov_phi_series(p, nu, u);
            INFO("p=" << p << " u=" << u);
            CHECK(std::abs(a - b) < 1e-8 * std::max(std::abs(b), 1e-12));
        }
    auto v = KirillovVector::principal(cplx(0.0, 0.8), {{0, 1.0}, {2, cplx(0.0, 0.5)}});
    std::vector<double> us = {-3.0, -0.2, 0.4, 1.1};
    auto s = kirillov_sample(v, us);
    for (std::size_t i = 0; i < us.size(); ++i) {
        cplx e = kirillov_phi_series(0, v.nu, us[i]) + cplx(0.0, 0.5) * kirillov_phi_series(2, v.nu, us[i]);
        CHECK(std::abs(s[i] - e) < 1e-9 * std::abs(e));
    }
    // D_k lives on u > 0
    auto sp = SpectralParam::discrete(6);
    CHECK(kirillov_phi(6, sp, -0.5) == 0.0);
    CHECK(std::abs(kirillov_phi(6, sp, 0.5)) > 0.0);
    CHECK_THROWS_AS(kirillov_phi(5, sp, 0.5), precondition_error);
    CHECK_THROWS_AS(KirillovVector::discrete(6, {{5, 1.0}}), precondition_error);
    CHECK_THROWS_AS(KirillovVector::principal(cplx(0.6, 0.0), {{0, 1.0}}), precondition_error);
}

TEST_CASE("kernel Mellin pairs", "[kirillov][mellin]") {
    for (auto [s, nu] : std::vector<std::pair<cplx, cplx>>{{0.2, {0.0, 0.1}}, {{0.1, 2.0}, {0.0, 0.3}}}) {
        auto m = mellin_pair_positive(s, nu);
        CHECK(m.residual < 1e-7);
    }
    for (auto [s, nu] : std::vector<std::pair<cplx, cplx>>{{0.7, {0.0, 0.1}}, {{1.1, 2.0}, {0.0, 0.3}}}) {
        auto m = mellin_pair_negative(s, nu);
        CHECK(m.residual < 1e-7);
    }
    CHECK_THROWS_AS(mellin_pair_positive(0.3, cplx(0.0, 0.1)), precondition_error);
}

TEST_CASE("Whittaker product integrals against mpmath", "[kirillov][whittaker]") {
    struct R {
        cplx a, b, mu, v;
    };
    std::vector<R> refs = {
        {1.0, 0.0, {0, 0.3}, {0.27565026084710303, 0}},
        {{0.3, 0.2}, {-1, 0.5}, {0.1, 0.3}, {0.68125292236247958, 0.28877740012275993}},
        {2.0, 2.0, {0, 1}, {0.94015203891527976, 0}},
    };
    for (auto& r : refs) {
        auto w = whittaker_product_integral(r.a, r.b, r.mu);
        INFO("alpha=" << r.a << " beta=" << r.b << " mu=" << r.mu);
        CHECK(rel(w.closed, r.v) < 1e-10);
        CHECK(rel(w.numeric, r.v) < 1e-8);
    }
}

TEST_CASE("Gram matrix is the identity", "[kirillov][gram]") {
    for (auto sp : {SpectralParam::principal(0.5), SpectralParam::discrete(6)}) {
        auto g = gram_matrix(sp, 2);
        CHECK(g.max_deviation() < 1e-6);
        CHECK(g.hermitian_defect() < 1e-10);
    }
    CHECK(discrete_norm_sq(6, 6) == Catch::Approx(std::pow(pi, 11) / std::tgamma(12.0)));
    CHECK_THROWS_AS(gram_matrix(SpectralParam::principal(0.0), 1), precondition_error);
}

TEST_CASE("Weyl action: kernel integral against the group side", "[kirillov][weyl]") {
    auto v = KirillovVector::principal({0.0, 0.3}, {{1, 1.0}, {-2, 0.5}});
    for (double u : {0.8, -0.4}) {
        auto r = weyl_action_report(v, u);
        cplx d = weyl_action_direct(v, u);
        INFO("u=" << u);
        CHECK(rel(r.value, d) < 1e-4);
        CHECK(r.error < 1e-4 * std::abs(d));
    }
}
