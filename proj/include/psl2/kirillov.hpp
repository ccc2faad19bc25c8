// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>
#include <thread>
#include <vector>

#include "error.hpp"
#include "group.hpp"
#include "jacquet.hpp"
#include "spectral.hpp"
#include "specfun/bessel.hpp"
#include "specfun/complex.hpp"
#include "specfun/gamma.hpp"
#include "specfun/quadrature.hpp"
#include "specfun/summation.hpp"

namespace psl2 {

// phi = sum c_p phi_p in U_nu (discrete_k == 0) or in D_k.
struct KirillovVector {
    std::map<int, cplx> coeffs;
    cplx nu = 0.0;
    int discrete_k = 0;

    static KirillovVector principal(cplx nu, std::map<int, cplx> c) {
        KirillovVector v{std::move(c), nu, 0};
        v.validate();
        return v;
    }
    static KirillovVector discrete(int k, std::map<int, cplx> c) {
        KirillovVector v{std::move(c), cplx(k - 0.5, 0.0), k};
        v.validate();
        return v;
    }
    static KirillovVector basis(const SpectralParam& sp, int p) {
        return sp.is_discrete() ? discrete(sp.k, {{p, 1.0}}) : principal(sp.nu(), {{p, 1.0}});
    }

    bool is_discrete() const { return discrete_k > 0; }
    int max_abs_p() const {
        int m = 0;
        for (auto& [p, c] : coeffs) m = std::max(m, std::abs(p));
        return m;
    }

    void validate() const {
        if (coeffs.empty()) throw precondition_error("KirillovVector: no coefficients");
        if (discrete_k < 0) throw precondition_error("KirillovVector: discrete k must be positive");
        if (is_discrete()) {
            for (auto& [p, c] : coeffs)
                if (p < discrete_k && c != 0.0) throw precondition_error("KirillovVector: D_k needs p >= k");
        } else if (!(std::abs(nu.real()) < 0.5)) {
            throw precondition_error("KirillovVector: |Re nu| must be below 1/2");
        }
    }
};

namespace detail {

inline cplx ipow(cplx z, int n) {
    cplx r = 1.0;
    unsigned m = static_cast<unsigned>(std::abs(n));
    while (m) {
        if (m & 1u) r *= z;
        z *= z;
        m >>= 1;
    }
    return n < 0 ? 1.0 / r : r;
}

// (-1)^p pi^{nu+1/2} / Gamma(dp + nu + 1/2): A^delta phi_p(a[y]) = this * W_{dp,nu}(4 pi y)
inline cplx kirillov_weight(int dp, cplx nu) {
    return (dp % 2 ? -1.0 : 1.0) * std::exp((nu + 0.5) * std::log(pi)) * rgamma(double(dp) + nu + 0.5);
}

// Frobenius coefficients of M_{alpha,mu}(z) = z^{mu+1/2} sum d_n z^n
inline std::vector<cplx> whittaker_m_coeffs(cplx alpha, cplx mu, int n) {
    std::vector<cplx> d(n + 1, 0.0);
    d[0] = 1.0;
    for (int k = 1; k <= n; ++k) {
        cplx prev2 = k >= 2 ? d[k - 2] : cplx(0.0);
        d[k] = (0.25 * prev2 - alpha * d[k - 1]) / (double(k) * (double(k) + 2.0 * mu));
    }
    return d;
}

// weights of M_{alpha,+mu} and M_{alpha,-mu} in W_{alpha,mu}
inline std::pair<cplx, cplx> whittaker_m_weights(cplx alpha, cplx mu) {
    return {gamma(-2.0 * mu) * rgamma(0.5 - alpha - mu), gamma(2.0 * mu) * rgamma(0.5 - alpha + mu)};
}

inline constexpr int frobenius_terms = 80;

} // namespace detail

// K phi_p(u) = A^{sgn u} phi_p(a[|u|]) by the Jacquet integral. Exactly zero when
// Gamma(sgn(u) p + nu + 1/2) has a pole.
inline cplx kirillov_phi(int p, cplx nu, double u, const QuadratureSpec& spec = {}) {
    if (u == 0.0 || !std::isfinite(u)) throw precondition_error("kirillov_phi: u must be finite and nonzero");
    int delta = u > 0.0 ? 1 : -1;
    if (is_nonpositive_integer(double(delta * p) + nu + 0.5)) return 0.0;
    return jacquet_a(p, nu, delta, std::abs(u), spec).value;
}

inline cplx kirillov_phi(int p, const SpectralParam& sp, double u, const QuadratureSpec& spec = {}) {
    if (sp.is_discrete()) {
        if (p < sp.k) throw precondition_error("kirillov_phi: D_k needs p >= k");
        if (u == 0.0 || !std::isfinite(u)) throw precondition_error("kirillov_phi: u must be finite and nonzero");
        if (u < 0.0) return 0.0;
    }
    return kirillov_phi(p, sp.nu(), u, spec);
}

// K phi_p(u) through the Whittaker function, no quadrature
inline cplx kirillov_phi_series(int p, cplx nu, double u) {
    if (u == 0.0 || !std::isfinite(u)) throw precondition_error("kirillov_phi: u must be finite and nonzero");
    int dp = u > 0.0 ? p : -p;
    cplx c = detail::kirillov_weight(dp, nu);
    if (c == 0.0) return 0.0;
    return c * whittaker_w_series(double(dp), nu, 4.0 * pi * std::abs(u));
}

// K vec at many points
inline std::vector<cplx> kirillov_sample(const KirillovVector& v, const std::vector<double>& us) {
    std::vector<cplx> out(us.size(), 0.0);
    std::vector<double> zp, zn;
    std::vector<std::size_t> ip, in;
    for (std::size_t i = 0; i < us.size(); ++i) {
        if (us[i] == 0.0 || !std::isfinite(us[i])) throw precondition_error("kirillov: u must be finite and nonzero");
        if (us[i] > 0.0) {
            zp.push_back(4.0 * pi * us[i]);
            ip.push_back(i);
        } else if (!v.is_discrete()) {
            zn.push_back(4.0 * pi * -us[i]);
            in.push_back(i);
        }
    }
    for (auto& [p, c] : v.coeffs) {
        if (c == 0.0) continue;
        for (int delta : {1, -1}) {
            auto& zs = delta > 0 ? zp : zn;
            auto& idx = delta > 0 ? ip : in;
            if (zs.empty()) continue;
            cplx w = c * detail::kirillov_weight(delta * p, v.nu);
            if (w == 0.0) continue;
            auto vals = whittaker_w_batch(double(delta * p), v.nu, zs);
            for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] += w * vals[j];
        }
    }
    return out;
}

// ---------------------------------------------------------------- Bessel kernel

// Below this |sin pi nu| the kernel is taken as a limit in nu.
inline constexpr double kernel_sin_floor = 1e-6;
// step of the centered nu-difference used for that limit
inline constexpr double kernel_nu_step = 1e-4;

namespace detail {

inline cplx bessel_kernel_raw(cplx nu, double u) {
    double r = std::sqrt(std::abs(u)), x = 4.0 * pi * r;
    // (I_{-2nu} - I_{2nu}) / sin(pi nu) = (4/pi) cos(pi nu) K_{2nu}
    if (u < 0.0) return 4.0 * cospi(nu) * r * bessel_k(2.0 * nu, x);
    return pi * r * (bessel_j(-2.0 * nu, x) - bessel_j(2.0 * nu, x)) / sinpi(nu);
}

} // namespace detail

// j_nu(u) for a general parameter nu
inline cplx bessel_kernel(cplx nu, double u) {
    if (u == 0.0 || !std::isfinite(u)) throw precondition_error("bessel_kernel: u must be finite and nonzero");
    if (u < 0.0 || std::abs(sinpi(nu)) >= kernel_sin_floor) return detail::bessel_kernel_raw(nu, u);
    // removable singularity: symmetric averages at h and 2h, Richardson on the h^2 term
    double h = kernel_nu_step;
    cplx a1 = 0.5 * (detail::bessel_kernel_raw(nu + h, u) + detail::bessel_kernel_raw(nu - h, u));
    cplx a2 = 0.5 * (detail::bessel_kernel_raw(nu + 2.0 * h, u) + detail::bessel_kernel_raw(nu - 2.0 * h, u));
    return (4.0 * a1 - a2) / 3.0;
}

inline double bessel_kernel(const SpectralParam& sp, double u) {
    if (u == 0.0 || !std::isfinite(u)) throw precondition_error("bessel_kernel: u must be finite and nonzero");
    if (sp.is_discrete()) {
        if (u < 0.0) return 0.0;
        double r = std::sqrt(u);
        return 2.0 * pi * (sp.k % 2 ? -1.0 : 1.0) * r * bessel_j(2.0 * sp.k - 1.0, 4.0 * pi * r).real();
    }
    return bessel_kernel(sp.nu(), u).real();
}

// ---------------------------------------------------------------- Mellin transform Gamma_p

namespace detail {

// L_p(s) on the ray xi = e^{t + i phi}
inline QuadResult mellin_l_ray(int p, cplx s, cplx nu, double phi, const QuadratureSpec& spec) {
    double left = (1.0 - s + nu).real(), right = (s + nu).real();
    if (!(left > 0.0 && right > 0.0)) throw range_error("mellin_l: s outside -Re nu < Re s < 1 + Re nu");
    auto f = [&](double t) {
        cplx lx(t, phi);
        cplx xi = std::exp(lx);
        cplx v = std::exp((1.0 - s + nu) * lx - (nu + 0.5) * std::log(xi * xi + 1.0));
        return v * ipow((xi + I) / (xi - I), p);
    };
    double a = -42.0 / left, b = 42.0 / right;
    std::vector<double> br;
    double step = 2.0 / (1.0 + std::abs((nu - s).imag()));
    step = std::max(step, (b - a) / 2000.0);
    for (double t = a + step; t < b; t += step) br.push_back(t);
    QuadratureSpec q = spec;
    q.max_panels = std::max(spec.max_panels, static_cast<int>(br.size()) + 4000);
    return integrate_gk(f, a, b, q, br);
}

} // namespace detail

// L_p(s) = int_0^inf xi^{nu-s} (xi^2+1)^{-nu-1/2} ((xi+i)/(xi-i))^p dxi. For |Im s| > 1 the ray
// is turned by an angle against the oscillation of xi^{nu-s}.
inline QuadResult mellin_l(int p, cplx s, cplx nu, const QuadratureSpec& spec = {}) {
    spec.validate();
    double om = (nu - s).imag();
    double phi = std::abs(om) > 1.0 ? std::copysign(std::min(0.5, 0.25 * (std::abs(om) - 1.0)), om) : 0.0;
    return detail::mellin_l_ray(p, s, nu, phi, spec);
}

inline bool in_l_strip(cplx s, cplx nu) { return (s + nu).real() > 0.0 && (1.0 - s + nu).real() > 0.0; }

// Gamma_p through the L-integrals; requires -Re nu < Re s < 1 + Re nu. The weight e^{+i pi (s-nu)/2}
// belongs to L_p: folding the line Im xi = 1/2 onto the real axis puts arg(-i xi) = -pi/2 on xi > 0.
inline cplx gamma_p_strip(int p, cplx s, cplx nu, const QuadratureSpec& spec = {}) {
    if (!in_l_strip(s, nu)) throw range_error("gamma_p: s outside -Re nu < Re s < 1 + Re nu");
    if (is_nonpositive_integer(s - nu)) throw pole_error("gamma_p: pole of Gamma(s - nu)");
    cplx h = 0.5 * pi * I * (s - nu);
    cplx lp = mellin_l(p, s, nu, spec).value, lm = mellin_l(-p, s, nu, spec).value;
    return std::exp((nu - s) * std::log(2.0 * pi) + log_gamma(s - nu)) * (std::exp(h) * lp + std::exp(-h) * lm);
}

// Gamma_p(s) = int_0^inf A^+ phi_p(a[y]) y^{s-3/2} dy. On [0, z0] in z = 4 pi y the near-origin
// series is integrated termwise, which also continues the integral to the left of Re s = |Re nu|.
inline cplx gamma_p_direct(int p, cplx s, cplx nu, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (!(nu.real() > -0.5)) throw precondition_error("gamma_p: Re nu must exceed -1/2");
    cplx c = detail::kirillov_weight(p, nu);
    if (c == 0.0) return 0.0;
    cplx alpha = double(p);
    constexpr double z0 = 1.0;
    cplx head = 0.0;
    bool series_ok = !detail::near_integer(2.0 * nu, 0.05);
    if (series_ok) {
        auto [wp, wm] = detail::whittaker_m_weights(alpha, nu);
        for (int sg : {1, -1}) {
            cplx mu = double(sg) * nu;
            auto d = detail::whittaker_m_coeffs(alpha, mu, detail::frobenius_terms);
            kahan_csum acc;
            for (int n = 0; n <= detail::frobenius_terms; ++n) {
                cplx ex = s + mu + double(n);
                if (std::abs(ex) < 1e-12) throw pole_error("gamma_p: pole of the continued Mellin transform");
                acc.add(d[n] / ex);  // z0 = 1
            }
            head += (sg > 0 ? wp : wm) * acc.value();
        }
    } else {
        if (!(s.real() > std::abs(nu.real())))
            throw range_error("gamma_p: 2 nu near an integer; only Re s > |Re nu| is reachable");
        auto f = [&](double t) {
            double z = std::exp(t);
            return whittaker_w_series(alpha, nu, z) * std::exp((s - 0.5) * t);
        };
        double rate = s.real() - std::abs(nu.real());
        head = integrate_gk(f, -40.0 / rate, 0.0, spec).value;
    }
    double zhi = 60.0 + 4.0 * (std::abs(p) + std::abs(nu) + std::abs(s));
    std::vector<double> br;
    for (double z = z0 + 2.0; z < zhi; z += 2.0) br.push_back(z);
    std::vector<double> nodes;
    auto g = [&](double z) { return whittaker_w_series(alpha, nu, z) * std::exp((s - 1.5) * std::log(z)); };
    cplx tail = integrate_gk(g, z0, zhi, spec, br).value;
    return c * std::exp((0.5 - s) * std::log(4.0 * pi)) * (head + tail);
}

// Gamma_p(s, nu): L-integral route inside its strip, continued direct Mellin transform elsewhere.
inline cplx gamma_p(int p, cplx s, cplx nu, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (!(nu.real() > -0.5)) throw precondition_error("gamma_p: Re nu must exceed -1/2");
    if (in_l_strip(s, nu)) return gamma_p_strip(p, s, nu, spec);
    return gamma_p_direct(p, s, nu, spec);
}

inline QuadratureSpec residual_spec() { return QuadratureSpec{}.with_tol(1e-14, 1e-13); }

// |LHS - RHS| / (1 + |LHS|) of the local functional equation
inline double functional_equation_residual(int p, cplx s, cplx nu, const QuadratureSpec& spec = residual_spec()) {
    cplx lhs = (p % 2 ? -1.0 : 1.0) * gamma_p(p, s, nu, spec);
    cplx f = std::exp((1.0 - 2.0 * s) * std::log(2.0) - 2.0 * s * std::log(pi)) * gamma(s + nu) * gamma(s - nu);
    cplx rhs = f * (cospi(s) * gamma_p(p, 1.0 - s, nu, spec) + cospi(nu) * gamma_p(-p, 1.0 - s, nu, spec));
    return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
}

// residual of Gamma_p(s) = 4 pi (pi Gamma_p(s+2) - p Gamma_p(s+1)) / (s^2 - nu^2), relative to 1 + |Gamma_p(s)|
inline double gamma_p_recursion_residual(int p, cplx s, cplx nu, const QuadratureSpec& spec = residual_spec()) {
    cplx den = s * s - nu * nu;
    if (std::abs(den) < 1e-12) throw precondition_error("gamma_p_recursion: s^2 = nu^2");
    cplx g0 = gamma_p(p, s, nu, spec);
    cplx rhs = 4.0 * pi * (pi * gamma_p(p, s + 2.0, nu, spec) - double(p) * gamma_p(p, s + 1.0, nu, spec)) / den;
    return std::abs(g0 - rhs) / (1.0 + std::abs(g0));
}

// ---------------------------------------------------------------- kernel Mellin pairs

struct MellinCheck {
    cplx numeric = 0.0;
    cplx closed = 0.0;
    double error = 0.0;     // quadrature error estimate
    double residual = 0.0;  // |numeric - closed| / |closed|
};

namespace detail {

// int_0^{v1} v^{2s-1} J^{sgn}_mu(4 pi v) dv from the power series of J (sgn > 0) or I (sgn < 0)
inline cplx bessel_power_head(cplx mu, cplx s, double v1, int sgn) {
    kahan_csum acc;
    double l = std::log(2.0 * pi * v1);
    for (int m = 0; m < 120; ++m) {
        cplx ex = 2.0 * s + 2.0 * m + mu;
        cplx t = std::exp((2.0 * m + mu) * l - std::lgamma(m + 1.0) + 2.0 * s * std::log(v1)) *
                 rgamma(double(m) + mu + 1.0) / ex;
        if (sgn > 0 && (m % 2)) t = -t;
        acc.add(t);
        if (m > 5 && std::abs(t) < 1e-18 * std::abs(acc.value())) break;
    }
    return acc.value();
}

inline cplx mellin_pair_factor(cplx s, cplx nu) {
    return std::exp((1.0 - 2.0 * s) * std::log(2.0) - 2.0 * s * std::log(pi)) * gamma(s + nu) * gamma(s - nu);
}

} // namespace detail

// int_0^inf j_nu(u) u^{s-3/2} du against 2^{1-2s} pi^{-2s} cos(pi s) Gamma(s+nu) Gamma(s-nu),
// for |Re nu| < Re s < 1/4. With u = v^2 the tail oscillates with period 1/2 in v.
inline MellinCheck mellin_pair_positive(cplx s, cplx nu, const QuadratureSpec& spec = {}) {
    if (!(std::abs(nu.real()) < s.real() && s.real() < 0.25))
        throw precondition_error("mellin pair (+): needs |Re nu| < Re s < 1/4");
    if (std::abs(sinpi(nu)) < 1e-3) throw precondition_error("mellin pair (+): nu too close to an integer");
    constexpr double v1 = 0.25;
    MellinCheck m;
    cplx head = 2.0 * pi / sinpi(nu) *
                (detail::bessel_power_head(-2.0 * nu, s, v1, 1) - detail::bessel_power_head(2.0 * nu, s, v1, 1));
    auto g = [&](double v) { return 2.0 * std::exp((2.0 * s - 2.0) * std::log(v)) * bessel_kernel(nu, v * v); };
    auto tail = integrate_tail(g, v1, 0.25, spec, 200, 16);
    m.numeric = head + tail.value;
    m.error = tail.error;
    m.closed = detail::mellin_pair_factor(s, nu) * cospi(s);
    m.residual = std::abs(m.numeric - m.closed) / std::abs(m.closed);
    return m;
}

// int_{-inf}^0 j_nu(u) |u|^{s-3/2} du against the same with cos(pi nu), for |Re nu| < Re s.
inline MellinCheck mellin_pair_negative(cplx s, cplx nu, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (!(std::abs(nu.real()) < s.real())) throw precondition_error("mellin pair (-): needs |Re nu| < Re s");
    if (std::abs(sinpi(nu)) < 1e-3) throw precondition_error("mellin pair (-): nu too close to an integer");
    constexpr double v1 = 0.25;
    MellinCheck m;
    cplx head = 2.0 * pi / sinpi(nu) *
                (detail::bessel_power_head(-2.0 * nu, s, v1, -1) - detail::bessel_power_head(2.0 * nu, s, v1, -1));
    auto g = [&](double v) { return 2.0 * std::exp((2.0 * s - 2.0) * std::log(v)) * bessel_kernel(nu, -v * v); };
    double vhi = v1 + (45.0 + 2.0 * std::abs(s) + 2.0 * std::abs(nu)) / (4.0 * pi);
    std::vector<double> br;
    for (double v = v1 + 0.25; v < vhi; v += 0.25) br.push_back(v);
    auto tail = integrate_gk(g, v1, vhi, spec, br);
    m.numeric = head + tail.value;
    m.error = tail.error;
    m.closed = detail::mellin_pair_factor(s, nu) * cospi(nu);
    m.residual = std::abs(m.numeric - m.closed) / std::abs(m.closed);
    return m;
}

// ---------------------------------------------------------------- Whittaker product integrals

struct WhittakerProduct {
    cplx numeric = 0.0;
    cplx closed = 0.0;
    double error = 0.0;
};

// Closed form of int_0^inf W_{alpha,mu} W_{beta,mu} dy / y; the digamma form when alpha = beta.
inline cplx whittaker_product_closed(cplx alpha, cplx beta, cplx mu) {
    if (!(std::abs(mu.real()) < 0.5)) throw precondition_error("whittaker product: |Re mu| must be below 1/2");
    cplx s2 = std::sin(2.0 * pi * mu);
    if (std::abs(s2) < 1e-12) throw precondition_error("whittaker product: sin(2 pi mu) vanishes");
    if (alpha == beta) {
        cplx a = 0.5 - alpha + mu, b = 0.5 - alpha - mu;
        if (is_nonpositive_integer(a) || is_nonpositive_integer(b))
            throw pole_error("whittaker product: digamma form at a Gamma pole");
        return pi / s2 * rgamma(a) * rgamma(b) * (digamma(a) - digamma(b));
    }
    cplx br = rgamma(0.5 - alpha + mu) * rgamma(0.5 - beta - mu) - rgamma(0.5 - alpha - mu) * rgamma(0.5 - beta + mu);
    return pi / ((alpha - beta) * s2) * br;
}

// Numerical value by quadrature on [1, inf) and the termwise near-origin expansion on [0, 1],
// paired with the closed form.
inline WhittakerProduct whittaker_product_integral(cplx alpha, cplx beta, cplx mu, const QuadratureSpec& spec = {}) {
    spec.validate();
    WhittakerProduct out;
    out.closed = whittaker_product_closed(alpha, beta, mu);
    if (detail::near_integer(2.0 * mu, 0.05))
        throw precondition_error("whittaker product: near-origin expansion needs 2 mu away from integers");
    constexpr int N = detail::frobenius_terms;
    auto [ap, am] = detail::whittaker_m_weights(alpha, mu);
    auto [bp, bm] = detail::whittaker_m_weights(beta, mu);
    kahan_csum head;
    for (int sa : {1, -1}) {
        auto da = detail::whittaker_m_coeffs(alpha, double(sa) * mu, N);
        cplx wa = sa > 0 ? ap : am;
        for (int sb : {1, -1}) {
            auto db = detail::whittaker_m_coeffs(beta, double(sb) * mu, N);
            cplx wb = sb > 0 ? bp : bm;
            cplx e0 = double(sa + sb) * mu + 1.0;
            for (int n = 0; n <= N; ++n) {
                cplx cn = 0.0;
                for (int k = 0; k <= n; ++k) cn += da[k] * db[n - k];
                head.add(wa * wb * cn / (e0 + double(n)));  // y0 = 1
            }
        }
    }
    double yhi = 60.0 + 6.0 * (std::abs(alpha) + std::abs(beta)) + 2.0 * std::abs(mu);
    std::vector<double> br;
    for (double y = 2.0; y < yhi; y += 1.0) br.push_back(y);
    auto f = [&](double y) { return whittaker_w_series(alpha, mu, y) * whittaker_w_series(beta, mu, y) / y; };
    auto tail = integrate_gk(f, 1.0, yhi, spec, br);
    out.numeric = head.value() + tail.value;
    out.error = tail.error;
    return out;
}

// ---------------------------------------------------------------- d^x u grids, Gram matrix

// Dyadic window 2^{-lo} <= |u| <= 2^{hi}; zero exponents are chosen from the decay of the integrand.
struct DyadicWindow {
    int lo = 0;
    int hi = 0;
    int nodes = 20;
};

namespace detail {

struct log_grid {
    std::vector<double> u;  // signed nodes
    std::vector<double> w;  // weights for d^x u
};

// Composite Gauss-Legendre in t = log|u| over [t_lo, t_hi], each dyadic cell split so that a phase
// rate omega(t) advances at most `phase` radians per panel.
template <class Omega>
log_grid make_log_grid(double t_lo, double t_hi, int nodes, bool both_signs, Omega omega, double phase = 4.0) {
    const auto& gl = gauss_legendre(nodes);
    log_grid g;
    const double l2 = std::log(2.0);
    std::vector<double> cuts{t_lo};
    for (double t = std::ceil(t_lo / l2) * l2; t < t_hi; t += l2)
        if (t > t_lo) cuts.push_back(t);
    cuts.push_back(t_hi);
    for (int sgn : {1, -1}) {
        if (sgn < 0 && !both_signs) break;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            double a = cuts[c], b = cuts[c + 1];
            int sub = std::max(1, static_cast<int>(std::ceil((b - a) * std::max(1.0, omega(b)) / phase)));
            double h = (b - a) / sub;
            for (int i = 0; i < sub; ++i)
                for (std::size_t j = 0; j < gl.first.size(); ++j) {
                    double t = a + h * (i + 0.5 + 0.5 * gl.first[j]);
                    g.u.push_back(sgn * std::exp(t));
                    g.w.push_back(0.5 * h * gl.second[j]);
                }
        }
    }
    return g;
}

// |u| beyond which K phi_p is below e^{-40} relative to its bulk
inline double kirillov_upper(int pmax, cplx nu) {
    double z = 100.0 + 6.0 * pmax + 4.0 * std::abs(nu);
    return z / (4.0 * pi);
}

} // namespace detail

struct GramReport {
    int pmax = 0;
    std::vector<int> index;                 // p labels of rows and columns
    std::vector<std::vector<cplx>> matrix;  // (1/pi) int K phi_p conj(K phi_q) d^x u, normalized
    double max_offdiag = 0.0;
    double max_diag_dev = 0.0;
    double quad_error = 0.0;  // change between two node counts

    double max_deviation() const { return std::max(max_offdiag, max_diag_dev); }
    double hermitian_defect() const {
        double d = 0.0;
        for (std::size_t i = 0; i < matrix.size(); ++i)
            for (std::size_t j = 0; j < matrix.size(); ++j)
                d = std::max(d, std::abs(matrix[i][j] - std::conj(matrix[j][i])));
        return d;
    }
};

// D_k norm ||phi_p||^2 = pi^{2k-1} Gamma(p-k+1) / Gamma(p+k)
inline double discrete_norm_sq(int k, int p) {
    if (p < k) throw precondition_error("discrete_norm_sq: p must be >= k");
    return std::exp((2 * k - 1) * std::log(pi) + std::lgamma(p - k + 1.0) - std::lgamma(double(p + k)));
}

namespace detail {

inline std::vector<std::vector<cplx>> gram_raw(const SpectralParam& sp, const std::vector<int>& idx,
                                               const DyadicWindow& win, int nodes) {
    cplx nu = sp.nu();
    int pm = 0;
    for (int p : idx) pm = std::max(pm, std::abs(p));
    double t_hi = win.hi ? win.hi * std::log(2.0) : std::log(kirillov_upper(pm, nu));
    // |K phi_p|^2 ~ |u| (principal) or |u|^{2k} (discrete) near the origin
    double t_lo = win.lo ? -win.lo * std::log(2.0) : (sp.is_discrete() ? -40.0 / (2.0 * sp.k) : -40.0);
    double kap = std::abs(nu.imag());
    auto omega = [&](double) { return kap + 1.0; };
    auto g = make_log_grid(t_lo, t_hi, nodes, !sp.is_discrete(), omega, 4.0);
    std::vector<std::future<std::vector<cplx>>> jobs;
    for (int p : idx)
        jobs.push_back(std::async(std::launch::async, [&, p] {
            return kirillov_sample(KirillovVector::basis(sp, p), g.u);
        }));
    std::vector<std::vector<cplx>> vals;
    for (auto& j : jobs) vals.push_back(j.get());
    std::size_t n = idx.size();
    std::vector<std::vector<cplx>> G(n, std::vector<cplx>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            kahan_csum s;
            for (std::size_t i = 0; i < g.u.size(); ++i) s.add(g.w[i] * vals[a][i] * std::conj(vals[b][i]));
            G[a][b] = s.value() / pi;
            G[b][a] = std::conj(G[a][b]);
        }
    return G;
}

} // namespace detail

// Gram matrix of K phi_p in L^2(R^x, pi^{-1} d^x u): |p|,|q| <= pmax on U_nu (nu = i kappa), or
// k <= p,q <= k + pmax on D_k with entries divided by the D_k norms.
inline GramReport gram_matrix(const SpectralParam& sp, int pmax, const DyadicWindow& win = {}) {
    if (pmax < 0) throw precondition_error("gram_matrix: pmax must be nonnegative");
    if (!sp.is_discrete() && sp.kappa == 0.0) throw precondition_error("gram_matrix: kappa must be nonzero");
    if (win.nodes < 4) throw precondition_error("gram_matrix: at least 4 nodes per panel");
    GramReport r;
    r.pmax = pmax;
    if (sp.is_discrete())
        for (int p = sp.k; p <= sp.k + pmax; ++p) r.index.push_back(p);
    else
        for (int p = -pmax; p <= pmax; ++p) r.index.push_back(p);
    auto G = detail::gram_raw(sp, r.index, win, win.nodes);
    auto G2 = detail::gram_raw(sp, r.index, win, win.nodes + 8);
    std::size_t n = r.index.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            double scale = 1.0;
            if (sp.is_discrete())
                scale = 1.0 / std::sqrt(discrete_norm_sq(sp.k, r.index[a]) * discrete_norm_sq(sp.k, r.index[b]));
            G[a][b] *= scale;
            G2[a][b] *= scale;
            r.quad_error = std::max(r.quad_error, std::abs(G[a][b] - G2[a][b]));
            if (a == b)
                r.max_diag_dev = std::max(r.max_diag_dev, std::abs(G2[a][b] - 1.0));
            else
                r.max_offdiag = std::max(r.max_offdiag, std::abs(G2[a][b]));
        }
    r.matrix = G2;
    return r;
}

// ---------------------------------------------------------------- Weyl element

// Default tolerance for the Weyl action: the integrand oscillates in both factors.
inline constexpr double weyl_tolerance = 1e-4;
inline QuadratureSpec weyl_default_spec() { return QuadratureSpec{}.with_tol(1e-10, weyl_tolerance); }

namespace detail {

inline void require_weyl(const KirillovVector& v) {
    v.validate();
    if (!v.is_discrete() && !(std::abs(v.nu.real()) < 0.5))
        throw precondition_error("weyl_action: needs |Re nu| < 1/2 or a discrete series vector");
}

inline cplx weyl_kernel(const KirillovVector& v, double x) {
    if (v.is_discrete()) return bessel_kernel(SpectralParam::discrete(v.discrete_k), x);
    return bessel_kernel(v.nu, x);
}

struct weyl_setup {
    log_grid grid;
    std::vector<cplx> values;  // K vec on the grid
};

// grid over lambda for kernel arguments u lambda with |u| <= umax, truncated at relative size eps
inline weyl_setup weyl_grid(const KirillovVector& v, double umax, double eps, int nodes, const DyadicWindow& win) {
    double re = v.is_discrete() ? 0.0 : std::abs(v.nu.real());
    // j(u lambda) K vec(lambda) ~ |lambda|^{1 - 2|Re nu|} near the origin
    double rate = v.is_discrete() ? 2.0 * v.discrete_k : std::max(0.05, 1.0 - 2.0 * re);
    double t_lo = win.lo ? -win.lo * std::log(2.0) : std::log(eps) / rate;
    double upper = kirillov_upper(v.max_abs_p(), v.nu);
    if (eps > 1e-14) upper = std::min(upper, (-std::log(eps) + 10.0 + 2.0 * v.max_abs_p()) / (2.0 * pi));
    double t_hi = win.hi ? win.hi * std::log(2.0) : std::log(upper);
    double kap = v.is_discrete() ? 0.0 : std::abs(v.nu.imag());
    auto omega = [&](double t) { return 2.0 * pi * std::sqrt(umax * std::exp(t)) + kap + 1.0; };
    weyl_setup s;
    s.grid = make_log_grid(t_lo, t_hi, nodes, !v.is_discrete(), omega, 4.0);
    s.values = kirillov_sample(v, s.grid.u);
    return s;
}

inline cplx weyl_sum(const KirillovVector& v, const weyl_setup& s, double u) {
    kahan_csum acc;
    for (std::size_t i = 0; i < s.grid.u.size(); ++i) {
        if (s.values[i] == 0.0) continue;
        double x = u * s.grid.u[i];
        if (v.is_discrete() && x < 0.0) continue;
        acc.add(s.grid.w[i] * weyl_kernel(v, x) * s.values[i]);
    }
    return acc.value();
}

} // namespace detail

// K(omega(w) vec)(u) = int_{R^x} j_nu(u lambda) K vec(lambda) d^x lambda, with the error estimate
// taken from two node counts.
inline QuadResult weyl_action_report(const KirillovVector& vec, double u, const QuadratureSpec& spec = weyl_default_spec(),
                                     const DyadicWindow& win = {}) {
    spec.validate();
    detail::require_weyl(vec);
    if (u == 0.0 || !std::isfinite(u)) throw precondition_error("weyl_action: u must be finite and nonzero");
    QuadResult r;
    if (vec.is_discrete() && u < 0.0) return r;
    auto a = detail::weyl_grid(vec, std::abs(u), 1e-16, win.nodes, win);
    auto b = detail::weyl_grid(vec, std::abs(u), 1e-16, win.nodes + 8, win);
    cplx va = detail::weyl_sum(vec, a, u), vb = detail::weyl_sum(vec, b, u);
    r.value = vb;
    r.error = std::abs(va - vb);
    r.evaluations = static_cast<long>(a.grid.u.size() + b.grid.u.size());
    if (r.error > std::max(spec.abs_tol, spec.rel_tol * std::abs(vb)))
        throw convergence_error("weyl_action: tolerance not reached", r.error);
    return r;
}

inline cplx weyl_action(const KirillovVector& vec, double u, const QuadratureSpec& spec = weyl_default_spec(),
                        const DyadicWindow& win = {}) {
    return weyl_action_report(vec, u, spec, win).value;
}

// The same quantity from the group side: A^{sgn u} applied to vec at a[|u|] w.
inline cplx weyl_action_direct(const KirillovVector& vec, double u, const QuadratureSpec& spec = {}) {
    detail::require_weyl(vec);
    if (u == 0.0 || !std::isfinite(u)) throw precondition_error("weyl_action: u must be finite and nonzero");
    if (vec.is_discrete() && u < 0.0) return 0.0;
    int delta = u > 0.0 ? 1 : -1;
    auto at = iwasawa_decompose(GroupElement::a(std::abs(u)) * GroupElement::weyl());
    cplx s = 0.0;
    for (auto& [p, c] : vec.coeffs) {
        if (c == 0.0 || is_nonpositive_integer(double(delta * p) + vec.nu + 0.5)) continue;
        s += c * jacquet_phi(p, vec.nu, delta, at, spec);
    }
    return s;
}

// w applied twice on the Kirillov side, evaluated at u: should return K vec(u) since w^2 = 1 in PSL(2,R).
inline cplx weyl_action_twice(const KirillovVector& vec, double u, double eps = 1e-9, int nodes = 14) {
    detail::require_weyl(vec);
    if (u == 0.0 || !std::isfinite(u)) throw precondition_error("weyl_action: u must be finite and nonzero");
    if (!(eps > 0.0 && eps < 1e-2)) throw precondition_error("weyl_action_twice: eps must lie in (0, 1e-2)");
    DyadicWindow win;
    double probe = (-std::log(eps) + 10.0 + 2.0 * vec.max_abs_p()) / (2.0 * pi);
    auto s = detail::weyl_grid(vec, std::max(std::abs(u), probe), eps, nodes, win);
    // inner transform at the grid nodes, then the outer one at u
    std::size_t n = s.grid.u.size();
    detail::weyl_setup outer{s.grid, std::vector<cplx>(n)};
    unsigned nt = std::max(1u, std::min(16u, std::thread::hardware_concurrency()));
    std::vector<std::future<void>> jobs;
    for (unsigned t = 0; t < nt; ++t)
        jobs.push_back(std::async(std::launch::async, [&, t] {
            for (std::size_t i = t; i < n; i += nt) outer.values[i] = detail::weyl_sum(vec, s, s.grid.u[i]);
        }));
    for (auto& j : jobs) j.get();
    return detail::weyl_sum(vec, outer, u);
}

} // namespace psl2
