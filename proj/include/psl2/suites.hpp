// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "group.hpp"
#include "jacquet.hpp"
#include "kirillov.hpp"
#include "kloosterman.hpp"
#include "lie.hpp"
#include "report.hpp"
#include "spectral.hpp"

namespace psl2 {

struct SuiteOptions {
    std::uint64_t seed = 20240611;
    int points = 100;                        // randomized points (lie suite)
    int group_samples = 1000;                // random elements for the decomposition roundtrips
    std::optional<SpectralParam> param;      // restricts gram to one parameter
    int pmax = 3;                            // gram
    bool weyl_double = true;                 // kirillov: include the slow double application
};

namespace detail {

inline std::string fmt_inputs(std::initializer_list<std::pair<const char*, std::string>> kv) {
    std::string s;
    for (auto& [k, v] : kv) {
        if (!s.empty()) s += ' ';
        s += k;
        s += '=';
        s += v;
    }
    return s;
}

inline std::string fc(cplx z) { return format_complex(z); }
inline std::string fr(double v) { return format_real(v); }

inline std::string param_label(const SpectralParam& sp) {
    return sp.is_discrete() ? "k=" + std::to_string(sp.k) : "nu=" + fc(sp.nu());
}

} // namespace detail

// grids shared by the suites and the tests
struct SuiteGrids {
    // (p, s, nu) for the local functional equation and the Gamma_p recursion
    static std::vector<std::tuple<int, cplx, cplx>> gamma_grid() {
        std::vector<std::tuple<int, cplx, cplx>> g;
        for (int p : {-2, 0, 3})
            for (cplx s : {cplx(0.5, 0.0), cplx(0.3, 0.7), cplx(0.6, -1.2)})
                for (cplx nu : {cplx(0.0, 0.3), cplx(0.0, 2.0), cplx(0.2, 0.0)}) g.emplace_back(p, s, nu);
        return g;
    }
    // (s, nu) for the positive-axis Mellin pair: |Re nu| < Re s < 1/4
    static std::vector<std::pair<cplx, cplx>> mellin_positive() {
        return {{0.2, {0.0, 0.1}},          {0.05, {0.0, 2.0}},        {{0.15, 0.3}, {0.02, 0.5}},
                {{0.22, -1.0}, {0.0, 1.0}}, {{0.1, 2.0}, {0.0, 0.3}}, {0.12, 0.05}};
    }
    // (s, nu) for the negative-axis pair: |Re nu| < Re s
    static std::vector<std::pair<cplx, cplx>> mellin_negative() {
        return {{0.7, {0.0, 0.1}},          {0.55, {0.0, 2.0}},        {{0.65, 0.3}, {0.02, 0.5}},
                {{0.72, -1.0}, {0.0, 1.0}}, {{1.1, 2.0}, {0.0, 0.3}}, {0.3, 0.05}};
    }
    // (p, nu, y) for the Whittaker equation; nu = 5.5 is the discrete series D_6
    static std::vector<std::tuple<int, cplx, double>> whittaker_grid() {
        std::vector<std::tuple<int, cplx, double>> g;
        for (int p : {0, 2, 6})
            for (cplx nu : {cplx(0.0, 0.3), cplx(0.0, 2.0), cplx(5.5, 0.0)})
                for (double y : {0.1, 0.6, 2.0}) g.emplace_back(p, nu, y);
        return g;
    }
    // (vec, u) for the Weyl action
    static std::vector<std::pair<KirillovVector, double>> weyl_pairs() {
        return {{KirillovVector::principal({0.0, 0.3}, {{0, 1.0}}), 1.0},
                {KirillovVector::principal({0.0, 0.3}, {{0, 1.0}}), -0.5},
                {KirillovVector::principal({0.0, 0.3}, {{1, 1.0}, {-2, 0.5}}), 0.8},
                {KirillovVector::discrete(6, {{6, 1.0}, {7, 0.3}}), 0.6}};
    }
    // (alpha, beta, mu) for the Whittaker product integrals
    static std::vector<std::tuple<cplx, cplx, cplx>> whittaker_products() {
        return {{1.0, 0.0, {0.0, 0.3}}, {0.0, 0.0, 0.25}, {{0.3, 0.2}, {-1.0, 0.5}, {0.1, 0.3}}, {2.0, 2.0, {0.0, 1.0}}};
    }
};

// ---------------------------------------------------------------- group and Lie algebra

inline SuiteReport suite_group(const SuiteOptions& o = {}) {
    SuiteReport rep{"group", {}};
    std::mt19937_64 rng(o.seed);
    double iw = 0.0, br = 0.0;
    for (int i = 0; i < o.group_samples; ++i) {
        auto g = random_element(rng);
        iw = std::max(iw, compose(iwasawa_decompose(g)).distance(g));
        br = std::max(br, reassemble(bruhat_decompose(g)).distance(g));
    }
    std::string in = detail::fmt_inputs({{"samples", std::to_string(o.group_samples)}, {"seed", std::to_string(o.seed)}});
    rep.add(make_check("iwasawa_roundtrip", in, iw, iw, 1e-12));
    rep.add(make_check("bruhat_roundtrip", in, br, br, 1e-12));
    return rep;
}

inline SuiteReport suite_lie(const SuiteOptions& o = {}) {
    using L = LieOperator;
    SuiteReport rep{"lie", {}};
    const std::pair<L, L> pairs[] = {{L::X1, L::X2}, {L::X1, L::X3},    {L::X2, L::X3},
                                     {L::X3, L::Eplus}, {L::X3, L::Eminus}, {L::Eplus, L::Eminus}};
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> ux(-1.0, 1.0), ul(-1.0, 1.0), ut(0.0, pi);
    std::vector<double> worst(6, 0.0);
    double cas = 0.0;
    FiniteDifferenceSpec fd{1e-3, 4, false};
    for (int i = 0; i < o.points; ++i) {
        auto q = random_test_params(rng);
        auto f = make_test_function(q);
        auto z = IwasawaCoords::make(ux(rng), std::exp(ul(rng)), ut(rng));
        for (int k = 0; k < 6; ++k) worst[k] = std::max(worst[k], commutator_residual(pairs[k].first, pairs[k].second, f, z, fd));
        cas = std::max(cas, casimir_consistency(f, z, fd));
    }
    std::string in = detail::fmt_inputs({{"points", std::to_string(o.points)}, {"seed", std::to_string(o.seed)}});
    for (int k = 0; k < 6; ++k)
        rep.add(make_check(std::string("commutator_") + to_string(pairs[k].first) + "_" + to_string(pairs[k].second), in,
                           worst[k], worst[k], 1e-5));
    rep.add(make_check("casimir_consistency", in, cas, cas, 1e-5));
    // phi_p is a Casimir eigenfunction with eigenvalue 1/4 - nu^2
    {
        cplx nu(0.0, 1.3);
        auto f = phi_function(2, nu);
        auto z = IwasawaCoords::make(0.3, 1.7, 0.4);
        auto c = casimir_forms(f, z, fd);
        cplx ev = (0.25 - nu * nu) * f(z);
        double r = std::abs(c.coordinate - ev) / std::abs(ev);
        rep.add(make_check("casimir_eigenvalue_phi", "p=2 nu=" + detail::fc(nu), c.coordinate, r, 1e-5));
    }
    return rep;
}

// ---------------------------------------------------------------- Jacquet integral

inline SuiteReport suite_jacquet(const SuiteOptions& = {}) {
    SuiteReport rep{"jacquet", {}};
    for (cplx nu : {cplx(0.0, 0.3), cplx(0.0, 1.0), cplx(0.0, 3.0)})
        for (double y : {0.1, 0.3, 1.0, 2.5, 5.0}) {
            cplx a = jacquet_a(0, nu, 1, y).value;
            cplx k = jacquet_p0_prefactor(nu) * std::sqrt(y) * bessel_k(nu, 2.0 * pi * y);
            double r = std::abs(a - k) / std::abs(k);
            rep.add(make_check("jacquet_p0_bessel_k", detail::fmt_inputs({{"nu", detail::fc(nu)}, {"y", detail::fr(y)}}), a, r,
                               1e-8));
        }
    for (auto [p, nu, y] : SuiteGrids::whittaker_grid()) {
        double r = whittaker_ode_residual(p, nu, 1, y);
        rep.add(make_check("whittaker_ode",
                           detail::fmt_inputs({{"p", std::to_string(p)}, {"nu", detail::fc(nu)}, {"y", detail::fr(y)}}), r,
                           r, 1e-6));
    }
    for (auto [p, d] : std::vector<std::pair<int, int>>{{1, 1}, {2, -1}, {-3, 1}}) {
        cplx nu(0.0, 0.7);
        cplx a = jacquet_a(p, nu, d, 0.8).value, b = jacquet_a_by_parts(p, nu, d, 0.8).value;
        double r = std::abs(a - b) / std::abs(a);
        rep.add(make_check("jacquet_by_parts",
                           detail::fmt_inputs({{"p", std::to_string(p)}, {"delta", std::to_string(d)}, {"y", "0.8"}}), a, r,
                           1e-8));
    }
    return rep;
}

// ---------------------------------------------------------------- Kirillov model

inline SuiteReport suite_kirillov(const SuiteOptions& o = {}) {
    SuiteReport rep{"kirillov", {}};
    for (auto [p, s, nu] : SuiteGrids::gamma_grid()) {
        std::string in = detail::fmt_inputs({{"p", std::to_string(p)}, {"s", detail::fc(s)}, {"nu", detail::fc(nu)}});
        double fe = functional_equation_residual(p, s, nu);
        rep.add(make_check("local_functional_equation", in, fe, fe, 1e-6));
        double rc = gamma_p_recursion_residual(p, s, nu);
        rep.add(make_check("gamma_p_recursion", in, rc, rc, 1e-7));
    }
    double ev = 0.0;
    for (cplx nu : {cplx(0.0, 0.4), cplx(0.2, 0.7), cplx(0.0, 3.0), cplx(0.3, 0.0)})
        for (double u : {0.3, 1.3, -0.7, -2.0}) ev = std::max(ev, std::abs(bessel_kernel(nu, u) - bessel_kernel(-nu, u)));
    rep.add(make_check("kernel_evenness", "nu in {0.4i,0.2+0.7i,3i,0.3} u in {0.3,1.3,-0.7,-2}", ev, ev, 1e-10));
    double dv = 0.0;
    for (int k : {6, 8, 12})
        for (double u : {-0.1, -1.0, -5.0}) dv = std::max(dv, std::abs(bessel_kernel(SpectralParam::discrete(k), u)));
    rep.add(make_check("discrete_kernel_vanishes", "k in {6,8,12} u<0", dv, dv, 0.0));
    int idx = 0;
    for (auto& [v, u] : SuiteGrids::weyl_pairs()) {
        cplx a = weyl_action(v, u), b = weyl_action_direct(v, u);
        double r = std::abs(a - b) / std::abs(b);
        rep.add(make_check("weyl_action", detail::fmt_inputs({{"pair", std::to_string(idx++)}, {"u", detail::fr(u)}}), a, r,
                           1e-4));
    }
    if (o.weyl_double) {
        auto v = KirillovVector::principal({0.0, 0.3}, {{0, 1.0}});
        cplx t = weyl_action_twice(v, 1.0, 1e-9, 12), k = kirillov_phi(0, cplx(0.0, 0.3), 1.0);
        double r = std::abs(t - k) / std::abs(k);
        rep.add(make_check("weyl_double_application", "nu=0.3i p=0 u=1", t, r, 1e-3));
    }
    return rep;
}

// ---------------------------------------------------------------- Mellin pairs

inline SuiteReport suite_mellin_pairs(const SuiteOptions& = {}) {
    SuiteReport rep{"mellin-pairs", {}};
    for (auto [s, nu] : SuiteGrids::mellin_positive()) {
        auto m = mellin_pair_positive(s, nu);
        rep.add(make_check("mellin_pair_positive", detail::fmt_inputs({{"s", detail::fc(s)}, {"nu", detail::fc(nu)}}),
                           m.numeric, m.residual, 1e-7));
    }
    for (auto [s, nu] : SuiteGrids::mellin_negative()) {
        auto m = mellin_pair_negative(s, nu);
        rep.add(make_check("mellin_pair_negative", detail::fmt_inputs({{"s", detail::fc(s)}, {"nu", detail::fc(nu)}}),
                           m.numeric, m.residual, 1e-7));
    }
    return rep;
}

// ---------------------------------------------------------------- Gram matrix

inline SuiteReport suite_gram(const SuiteOptions& o = {}) {
    SuiteReport rep{"gram", {}};
    std::vector<SpectralParam> ps;
    if (o.param)
        ps.push_back(*o.param);
    else
        ps = {SpectralParam::principal(0.5), SpectralParam::principal(2.0), SpectralParam::discrete(6)};
    for (auto& sp : ps) {
        auto g = gram_matrix(sp, o.pmax);
        std::string in = detail::param_label(sp) + " pmax=" + std::to_string(o.pmax);
        rep.add(make_check("gram_deviation", in, g.max_deviation(), g.max_deviation(), 1e-6));
        rep.add(make_check("gram_hermitian", in, g.hermitian_defect(), g.hermitian_defect(), 1e-10));
    }
    if (!o.param)
        for (auto [a, b, mu] : SuiteGrids::whittaker_products()) {
            auto w = whittaker_product_integral(a, b, mu);
            double r = std::abs(w.numeric - w.closed) / std::max(1.0, std::abs(w.closed));
            rep.add(make_check("whittaker_product",
                               detail::fmt_inputs({{"alpha", detail::fc(a)}, {"beta", detail::fc(b)}, {"mu", detail::fc(mu)}}),
                               w.numeric, r, 1e-6));
        }
    return rep;
}

// ---------------------------------------------------------------- Kloosterman sums

namespace detail {

// S(m,n;ell) by a double loop over residues: no modular inverse routine
inline double kloosterman_naive(std::int64_t m, std::int64_t n, std::int64_t ell) {
    double s = 0.0;
    for (std::int64_t d = 0; d < ell; ++d)
        for (std::int64_t e = 0; e < ell; ++e)
            if ((d * e) % ell == 1 % ell) s += std::cos(2.0 * pi * double(floor_mod(m * d + n * e, ell)) / double(ell));
    return s;
}

} // namespace detail

inline SuiteReport suite_kloosterman_basic(const SuiteOptions& = {}) {
    SuiteReport rep{"kloosterman-basic", {}};
    double worst = 0.0, sym = 0.0;
    for (int m = 1; m <= 5; ++m)
        for (int n = 1; n <= 5; ++n)
            for (int l = 1; l <= 50; ++l) {
                double s = kloosterman_sum(m, n, l);
                worst = std::max(worst, std::abs(s - detail::kloosterman_naive(m, n, l)));
                sym = std::max(sym, std::abs(s - kloosterman_sum(n, m, l)));
            }
    rep.add(make_check("kloosterman_oracle", "1<=m,n<=5 ell<=50", worst, worst, 1e-10));
    rep.add(make_check("kloosterman_symmetry", "1<=m,n<=5 ell<=50", sym, sym, 0.0));
    double weil = 0.0;
    for (int p = 2; p <= 1000; ++p) {
        bool prime = true;
        for (int d = 2; d * d <= p; ++d)
            if (p % d == 0) prime = false;
        if (prime) weil = std::max(weil, std::abs(kloosterman_sum(1, 1, p)) / (2.0 * std::sqrt(double(p))));
    }
    rep.add(make_check("weil_bound", "S(1,1;p)/(2 sqrt p) primes p<=1000", weil, weil, 1.0 + 1e-12));
    for (auto [l, v] : std::vector<std::pair<int, double>>{{1, 1.0}, {2, 1.0}, {3, -1.0}}) {
        double s = kloosterman_sum(1, 1, l);
        rep.add(make_check("kloosterman_value", "m=1 n=1 ell=" + std::to_string(l), s, std::abs(s - v), 1e-12));
    }
    auto phi = GeometricWeight::bump();
    auto g = geometric_side(1, 1, phi, 20);
    rep.add(make_check("geometric_support_terms", "m=n=1 bump on [1,2]", double(g.terms.size()),
                       std::abs(double(g.terms.size()) - 6.0), 0.5));
    double neg = 0.0;
    for (int l = 1; l <= 50; ++l) neg = std::max(neg, std::abs(kloosterman_sum(1, -1, l) - detail::kloosterman_naive(1, -1, l)));
    rep.add(make_check("kloosterman_negative_index", "m=1 n=-1 ell<=50", neg, neg, 1e-10));
    return rep;
}

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> n = {"lie", "jacquet", "kirillov", "mellin-pairs", "gram", "kloosterman-basic"};
    return n;
}

inline SuiteReport run_suite(const std::string& name, const SuiteOptions& o = {}) {
    if (name == "lie") {
        auto r = suite_lie(o);
        for (auto& c : suite_group(o).records) r.add(c);
        return r;
    }
    if (name == "jacquet") return suite_jacquet(o);
    if (name == "kirillov") return suite_kirillov(o);
    if (name == "mellin-pairs") return suite_mellin_pairs(o);
    if (name == "gram") return suite_gram(o);
    if (name == "kloosterman-basic") return suite_kloosterman_basic(o);
    throw precondition_error("unknown suite '" + name + "'");
}

} // namespace psl2
