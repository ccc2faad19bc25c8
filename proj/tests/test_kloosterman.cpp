// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <numeric>

#include "psl2/kloosterman.hpp"
#include "psl2/suites.hpp"

using namespace psl2;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

const SpectralDataset& full_dataset() {
    static const SpectralDataset ds = load(PSL2_DATA "/maass_sl2z.csv");
    return ds;
}

} // namespace

TEST_CASE("Kloosterman sums against the double-loop oracle", "[kloosterman]") {
    for (int m = -5; m <= 5; ++m)
        for (int n = -5; n <= 5; ++n)
            for (int ell = 1; ell <= 30; ++ell) {
                if (m == 0 || n == 0) continue;
                INFO("S(" << m << "," << n << ";" << ell << ")");
                CHECK(std::abs(kloosterman_sum(m, n, ell) - detail::kloosterman_naive(m, n, ell)) < 1e-10);
            }
    CHECK(kloosterman_sum(1, 1, 1) == 1.0);
    CHECK(kloosterman_sum(0, 0, 7) == Catch::Approx(6.0));  // Ramanujan sum c_7(0) = phi(7)
    CHECK_THROWS_AS(kloosterman_sum(1, 1, 0), precondition_error);
}

TEST_CASE("Kloosterman sum identities", "[kloosterman]") {
    for (int ell : {7, 12, 15, 49}) {
        for (int m = 1; m <= 6; ++m)
            for (int n = 1; n <= 6; ++n) {
                double s = kloosterman_sum(m, n, ell);
                CHECK(s == kloosterman_sum(n, m, ell));
                CHECK(std::abs(s - kloosterman_sum(-m, -n, ell)) < 1e-12);
                if (std::gcd(m, ell) == 1) CHECK(std::abs(s - kloosterman_sum(1, m * n, ell)) < 1e-10);
            }
    }
    // twisted multiplicativity: S(m,n;qr) = S(m rbar, n rbar; q) S(m qbar, n qbar; r)
    for (auto [q, r] : std::vector<std::pair<int, int>>{{3, 5}, {4, 7}, {8, 9}})
        for (int m : {1, 2, 5})
            for (int n : {1, 3, 4}) {
                std::int64_t rb = mod_inverse(r, q), qb = mod_inverse(q, r);
                double lhs = kloosterman_sum(m, n, q * r);
                double rhs = kloosterman_sum(m * rb, n * rb, q) * kloosterman_sum(m * qb, n * qb, r);
                CHECK(std::abs(lhs - rhs) < 1e-10);
            }
    // Weil bound at primes
    for (int p : {101, 211, 997}) CHECK(std::abs(kloosterman_sum(1, 1, p)) <= 2.0 * std::sqrt(double(p)));
    CHECK(mod_inverse(3, 7) == 5);
    CHECK_THROWS_AS(mod_inverse(4, 8), precondition_error);
}

TEST_CASE("weights", "[kloosterman][weights]") {
    auto f = SpectralWeight::gaussian(0.7, 2.0);
    CHECK(f.evenness_defect() < 1e-15);
    CHECK(std::abs(f(cplx(0.0, f.cutoff(1e-12)))) <= 1.0001e-12);
    auto phi = GeometricWeight::bump();
    CHECK(phi.support_defect() == 0.0);
    CHECK(phi(std::sqrt(2.0)) == Catch::Approx(std::exp(-3.0)));
    CHECK(phi.scaled(2.0)(1.3) == Catch::Approx(2.0 * phi(1.3)));
    CHECK_THROWS_AS(GeometricWeight::bump(2.0, 1.0), precondition_error);
    CHECK_THROWS_AS(SpectralWeight::gaussian(-1.0), precondition_error);
}

TEST_CASE("bracket equals the scaled Bessel kernel", "[kloosterman][transforms]") {
    for (int d : {1, -1})
        for (cplx nu : {cplx(0.0, 0.4), cplx(0.0, 12.0), cplx(0.3, 0.0), cplx(0.0, 0.0)})
            for (double x : {0.7, 3.0, 6.5}) {
                double r = x / (4.0 * pi);
                cplx k = 4.0 * bessel_kernel(nu, d * r * r) / x;
                INFO("delta=" << d << " nu=" << nu << " x=" << x);
                CHECK(std::abs(sum_bracket(d, nu, x) - k) < 1e-10 * std::max(1.0, std::abs(k)));
            }
}

TEST_CASE("transform B against mpmath", "[kloosterman][transforms]") {
    struct R {
        int delta;
        cplx nu, v;
    };
    std::vector<R> refs = {
        {1, {0, 0.4}, {-0.039928605442565983, 0}}, {1, {0, 2}, {-0.027596480885636418, 0}},
        {1, {0.25, 0}, {-0.072432618719241657, 0}}, {1, {0, 7.5}, {0.0012953434621097927, 0}},
        {-1, {0, 0.4}, {0.045140450846450957, 0}}, {-1, {0, 2}, {-0.04396914623374848, 0}},
        {-1, {0.25, 0}, {0.021643716817042996, 0}}, {-1, {0, 7.5}, {0.0018747650601379881, 0}},
    };
    auto phi = GeometricWeight::bump();
    for (auto& r : refs) {
        INFO("delta=" << r.delta << " nu=" << r.nu);
        auto q = transform_B_quad(phi, r.delta, r.nu);
        CHECK(rel(q.value, r.v) < 1e-9);
        CHECK(q.error < 1e-9);
    }
}

TEST_CASE("transform B properties", "[kloosterman][transforms]") {
    auto phi = GeometricWeight::bump();
    cplx nu(0.0, 0.4);
    // refinement: a tighter tolerance moves the value by less than the reported error
    auto a = transform_B_quad(phi, 1, nu), b = transform_B_quad(phi, 1, nu, QuadratureSpec{}.with_tol(1e-14, 1e-13));
    CHECK(std::abs(a.value - b.value) <= std::max(a.error, 1e-15));
    CHECK(rel(transform_B(phi.scaled(-3.0), 1, nu), -3.0 * a.value) < 1e-14);
    for (int d : {1, -1}) CHECK(std::abs(transform_B(phi, d, nu) - transform_B(phi, d, -nu)) < 1e-13);
    // discrete point: nu = k - 1/2 through the limit equals the J_{2k-1} form
    for (int k : {6, 8}) {
        double x = 1.4;
        double r = x / (4.0 * pi);
        double direct = 4.0 * bessel_kernel(SpectralParam::discrete(k), r * r) / x;
        CHECK(std::abs(sum_bracket(1, cplx(k - 0.5, 0.0), x) - direct) < 1e-8 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("transform A against mpmath", "[kloosterman][transforms]") {
    struct R {
        int delta;
        double x;
        double v;
    };
    std::vector<R> refs = {{1, 0.5, 0.040074800080784068},  {1, 2.0, -0.023064526466615498},
                           {1, 3.7, -0.035298452226130782}, {-1, 0.5, 0.042949199578019792},
                           {-1, 2.0, 0.042901257368755372}, {-1, 3.7, 0.012189253808179501}};
    auto f = SpectralWeight::gaussian(1.0);
    for (auto& r : refs) {
        INFO("delta=" << r.delta << " x=" << r.x);
        CHECK(rel(transform_A(f, r.delta, r.x), r.v) < 1e-9);
    }
}

TEST_CASE("transform A properties", "[kloosterman][transforms]") {
    auto f = SpectralWeight::gaussian(1.0), g = SpectralWeight::gaussian(0.4, 0.5);
    // linearity
    SpectralWeight sum = f;
    sum.f = [f, g](cplx nu) { return f(nu) + g(nu); };
    sum.rate = 0.4;
    sum.bound = 1.5;
    for (int d : {1, -1}) {
        cplx l = transform_A(sum, d, 1.3), r = transform_A(f, d, 1.3) + transform_A(g, d, 1.3);
        CHECK(std::abs(l - r) < 1e-11);
    }
    // cutoff doubling: integrating twice as far changes nothing
    auto base = transform_A_quad(f, 1, 2.0);
    SpectralWeight wide = f;
    wide.bound = 1e30;  // pushes the cutoff out by about 2x
    auto far = transform_A_quad(wide, 1, 2.0);
    CHECK(std::abs(base.value - far.value) < 1e-13);
    CHECK_THROWS_AS(transform_A(f, 0, 1.0), precondition_error);
    CHECK_THROWS_AS(transform_A(f, 1, -1.0), precondition_error);
    SpectralWeight slow = f;
    slow.decay = SpectralWeight::Decay::exponential;
    slow.rate = 0.01;
    CHECK_THROWS_AS(transform_A(slow, 1, 1.0), precondition_error);
}

TEST_CASE("delta term", "[kloosterman][transforms]") {
    CHECK(rel(delta_term(3, 3, SpectralWeight::gaussian(1.0)), 0.023515897889579619) < 1e-11);
    CHECK(rel(delta_term(1, 1, SpectralWeight::gaussian(0.3)), 0.082426349244254307) < 1e-11);
    CHECK(delta_term(2, 3, SpectralWeight::gaussian(1.0)) == 0.0);
    CHECK(rel(delta_term(1, 1, SpectralWeight::gaussian(1.0, 4.0)), 4.0 * 0.023515897889579619) < 1e-11);
    CHECK_THROWS_AS(delta_term(0, 1, SpectralWeight::gaussian(1.0)), precondition_error);
}

TEST_CASE("continuous spectrum density", "[kloosterman][spectral]") {
    for (double t : {0.3, 2.0, 17.5})
        for (auto [m, n] : std::vector<std::pair<int, int>>{{1, 1}, {2, 3}, {4, -6}}) {
            cplx d = continuous_density(m, n, t);
            CHECK(std::abs(d.imag()) < 1e-12 * std::abs(d));
            CHECK(std::abs(d - continuous_density(m, n, -t)) < 1e-12 * std::abs(d));
            CHECK(std::abs(d - continuous_density(n, m, t)) < 1e-12 * std::abs(d));
        }
    CHECK(continuous_density(1, 1, 0.0) == 0.0);
    CHECK(std::abs(divisor_factor(1, cplx(0.0, 3.0)) - 1.0) < 1e-15);
    CHECK(std::abs(divisor_factor(12, cplx(0.2, 1.0)) - divisor_factor(12, cplx(-0.2, -1.0))) < 1e-13);
    // sigma_{2r}(m) m^{-r} = sum_{d|m} d^{2r} / m^r
    cplx r(0.0, 0.7);
    cplx direct = sigma(2.0 * r, 6) * std::exp(-r * std::log(6.0));
    CHECK(std::abs(divisor_factor(6, r) - direct) < 1e-14);
}

TEST_CASE("geometric side", "[kloosterman][sum-formula]") {
    auto phi = GeometricWeight::bump();
    auto g = geometric_side(1, 1, phi, 12);
    CHECK(g.ell_needed == 12);
    CHECK(g.terms.size() == 6);  // 4 pi / ell in (1, 2) for ell = 7..12
    double s = 0.0;
    for (auto& t : g.terms) {
        CHECK(t.x > 1.0);
        CHECK(t.x < 2.0);
        s += t.contribution;
    }
    CHECK(std::abs(s - g.value) < 1e-16);
    CHECK(geometric_side(1, 1, phi, 100).value == g.value);
    CHECK_THROWS_AS(geometric_side(1, 1, phi, 11), range_error);
}

TEST_CASE("spectral side on the fixture", "[kloosterman][sum-formula]") {
    auto ds = load(PSL2_TEST_DATA "/fixture10.csv");
    auto h = weight_from(SpectralWeight::gaussian(0.05));
    SpectralSideOptions opt;
    auto s = spectral_side(1, 1, h, ds, opt);
    CHECK(s.num_forms == 10);
    cplx disc = 0.0;
    for (auto& t : s.terms) disc += t.contribution;
    CHECK(std::abs(disc - s.discrete) < 1e-15);
    CHECK(s.value() == s.discrete + s.continuous);
    // opposite signs: no holomorphic terms, parity enters the coefficient
    auto s2 = spectral_side(1, -1, h, ds, opt);
    CHECK_FALSE(s2.discrete_series_present);
    for (std::size_t i = 0; i < s.terms.size(); ++i) CHECK(s2.terms[i].coefficient == double(s.terms[i].epsilon) * s.terms[i].coefficient);
    // asking beyond the complete range is a data error
    opt.nu_cutoff = 30.0;
    CHECK_THROWS_AS(spectral_side(1, 1, h, ds, opt), data_error);
}

TEST_CASE("sum formula closes on the full dataset", "[kloosterman][sum-formula]") {
    auto phi = GeometricWeight::bump();
    auto r = sum_formula(1, 1, phi, full_dataset());
    CHECK(r.delta == 1);
    CHECK(r.discrete_series_present);
    CHECK(r.relative_error < 1e-2);
    // the residual sits inside the stated budgets with room to spare
    CHECK(std::abs(r.spectral_side - r.geometric_side) < r.budget());
    CHECK(r.quadrature_budget < 1e-8);
    CHECK(r.truncation.num_forms == 99);
}

TEST_CASE("sum formula rejects an invalid dataset before computing", "[kloosterman][sum-formula]") {
    auto bad = load(PSL2_TEST_DATA "/bad_kappa.csv");
    CHECK_THROWS_AS(sum_formula(1, 1, GeometricWeight::bump(), bad), data_error);
}

TEST_CASE("Xi kernel", "[kloosterman][xi]") {
    for (auto [u, nu] : std::vector<std::pair<double, cplx>>{{1.0, 0.0}, {2.0, {0.0, 0.7}}, {0.5, 0.2}}) {
        auto d = xi_kernel(u, nu), m = xi_kernel_mellin(u, nu);
        INFO("u=" << u << " nu=" << nu);
        CHECK(std::abs(d.value - m.value) < 1e-5 * std::abs(m.value));
        // evenness in nu
        CHECK(std::abs(xi_kernel_mellin(u, -nu).value - m.value) < 1e-9 * std::abs(m.value));
        // a tighter window leaves the value in place
        auto tight = xi_kernel(u, nu, QuadratureSpec{}.with_tol(1e-14, 1e-12));
        CHECK(std::abs(tight.value - d.value) < 1e-8 * std::abs(m.value));
    }
    CHECK_THROWS_AS(xi_kernel(-1.0, 0.0), precondition_error);
    CHECK_THROWS_AS(xi_kernel_mellin(1.0, cplx(0.6, 0.0)), precondition_error);
}
