// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "../error.hpp"
#include "complex.hpp"
#include "gamma.hpp"
#include "summation.hpp"

namespace psl2 {

enum class BesselKind { J, I, K };

// Evaluation envelope. Inside the series region (x <= series_x) any order is accepted.
struct BesselEnvelope {
    double max_order = 30.0;
    double max_x = 200.0;
    double series_x = 12.0;
};

namespace detail {

// Ascending series for J (sgn = -1) or I (sgn = +1), returned as
// value = exp(log_scale) * sum and derivative = exp(log_scale) * dsum.
struct series_value {
    cplx sum, dsum;
    cplx log_scale;
    double mass = 0.0;  // sum of term magnitudes, for the cancellation ratio
    double cancellation() const { return mass / std::max(std::abs(sum), 1e-300); }
    cplx value() const { return std::exp(log_scale) * sum; }
    cplx derivative() const { return std::exp(log_scale) * dsum; }
};

inline series_value bessel_series_raw(cplx mu, double x, int sgn) {
    // integer negative order: reflect
    if (mu.imag() == 0.0 && mu.real() < 0.0 && mu.real() == std::floor(mu.real())) {
        auto r = bessel_series_raw(-mu, x, sgn);
        int n = static_cast<int>(-mu.real());
        if (sgn < 0 && (n % 2)) {
            r.sum = -r.sum;
            r.dsum = -r.dsum;
        }
        return r;
    }
    double q = sgn * 0.25 * x * x;
    kahan_csum s, ds;
    kahan_sum mass;
    cplx t = 1.0;
    s.add(t);
    mass.add(1.0);
    ds.add(t * mu / x);
    for (int k = 0; k < 2000; ++k) {
        t *= q / ((k + 1.0) * (cplx(k + 1.0) + mu));
        s.add(t);
        ds.add(t * (mu + 2.0 * (k + 1)) / x);
        double mag = std::abs(t);
        mass.add(mag);
        if (k > 2 && mag < 1e-18 * std::abs(s.value()) && std::abs(q) < (k + 1.0) * std::abs(cplx(k + 1.0) + mu))
            break;
        if (mag == 0.0) break;
    }
    series_value out;
    out.sum = s.value();
    out.dsum = ds.value();
    out.mass = mass.value();
    out.log_scale = mu * std::log(0.5 * x) - log_gamma(mu + 1.0);
    return out;
}

// Hankel asymptotic expansion for J; empty when it does not reach full precision.
inline std::optional<cplx> bessel_j_hankel(cplx mu, double x) {
    cplx m4 = 4.0 * mu * mu;
    cplx P = 1.0, Q = 0.0, b = 1.0;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        b *= (m4 - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * x);
        double mag = std::abs(b);
        // terms alternate in pairs: k=1 -> Q (+), k=2 -> P (-), k=3 -> Q (-), k=4 -> P (+)
        int r = k % 4;
        cplx term = (r == 1 || r == 0) ? b : -b;
        if (k % 2) Q += term;
        else P += term;
        if (mag < 1e-17 * (std::abs(P) + std::abs(Q))) {
            cplx chi = x - (0.5 * mu + 0.25) * pi;
            return std::sqrt(2.0 / (pi * x)) * (P * std::cos(chi) - Q * std::sin(chi));
        }
        if (mag > last && k > 2) return std::nullopt;
        last = mag;
    }
    return std::nullopt;
}

// Taylor stepping of x^2 y'' + x y' + (sgn_x x^2 - mu^2) y = 0 (sgn_x = +1 for J, -1 for I).
inline std::pair<cplx, cplx> bessel_ode_step(cplx mu, double x0, cplx y0, cplx dy0, double x1, int sgn_x) {
    double x = x0;
    cplx y = y0, dy = dy0;
    cplx m2 = mu * mu;
    while (x != x1) {
        double h = std::clamp(x1 - x, -std::min(1.0, 0.4 * x), std::min(1.0, 0.4 * x));
        // coefficients c_n of y(x + t) = sum c_n t^n
        cplx cm2 = 0.0, cm1 = 0.0, c0 = y, c1 = dy;
        cplx val = c0 + c1 * h, der = c1;
        double hp = h;  // h^(n+1) for the value update
        int small = 0;
        for (int n = 0; n < 200; ++n) {
            // x^2 (n+2)(n+1) c_{n+2} + (2x n(n+1) + x(n+1)) c_{n+1} + (n^2 + sgn x^2 - mu^2) c_n
            //   + sgn (2x c_{n-1} + c_{n-2}) = 0
            cplx c2 = -((2.0 * x * n * (n + 1.0) + x * (n + 1.0)) * c1 + (double(n) * n + sgn_x * x * x - m2) * c0 +
                        double(sgn_x) * (2.0 * x * cm1 + cm2)) /
                      (x * x * (n + 1.0) * (n + 2.0));
            hp *= h;  // h^(n+2)
            cplx tv = c2 * hp, td = (n + 2.0) * c2 * (hp / h);
            val += tv;
            der += td;
            if (std::abs(tv) < 1e-18 * std::abs(val) && std::abs(td) < 1e-18 * (std::abs(der) + std::abs(val)))
                ++small;
            else
                small = 0;
            if (small >= 3) break;
            cm2 = cm1;
            cm1 = c0;
            c0 = c1;
            c1 = c2;
        }
        x += h;
        if (std::abs(x - x1) < 1e-14 * std::abs(x1)) x = x1;
        y = val;
        dy = der;
    }
    return {y, dy};
}

inline cplx bessel_k_any(cplx mu, double x);

inline bool is_integer_order(cplx mu) { return mu.imag() == 0.0 && mu.real() == std::floor(mu.real()); }

// Series below series_x; beyond it Hankel (J), the series itself while cancellation
// stays mild, and ODE stepping from the last point where the series was clean.
inline cplx bessel_ji(cplx mu, double x, int sgn, double series_x) {
    constexpr double max_cancel = 1e4;
    if (x <= series_x) return bessel_series_raw(mu, x, sgn).value();
    if (sgn > 0 && mu.real() < 0.0 && !is_integer_order(mu)) {
        // I_{-v} = I_v + (2/pi) sin(v pi) K_v with v = -mu
        return bessel_ji(-mu, x, 1, series_x) + (2.0 / pi) * sinpi(-mu) * bessel_k_any(-mu, x);
    }
    if (sgn < 0) {
        if (auto h = bessel_j_hankel(mu, x)) return *h;
    }
    auto direct = bessel_series_raw(mu, x, sgn);
    if (direct.cancellation() <= max_cancel) return direct.value();
    double x0 = series_x;
    for (double t = series_x * 1.25; t < x; t *= 1.25) {
        if (bessel_series_raw(mu, t, sgn).cancellation() > max_cancel) break;
        x0 = t;
    }
    auto s = bessel_series_raw(mu, x0, sgn);
    return bessel_ode_step(mu, x0, s.value(), s.derivative(), x, sgn < 0 ? 1 : -1).first;
}

// (1/2) int_R exp(-x cosh t - mu t) dt on the line Im t = phi through the saddle region.
inline cplx bessel_k_contour(cplx mu, double x) {
    cplx ts = std::asinh(-mu / x);
    double eps = std::min(0.5, 3.0 / std::max(1.0, std::abs(mu)));
    double phi = std::clamp(ts.imag(), -(0.5 * pi - eps), 0.5 * pi - eps);
    double cphi = std::cos(phi);
    double a = x * cphi, rm = mu.real();
    // log|g(s)| = -a cosh s - Re(mu) s + Im(mu) phi
    auto L = [&](double s) { return -a * std::cosh(s) - rm * s; };
    double sm = std::asinh(-rm / a);
    double Lmax = L(sm), drop = 43.0;
    auto edge = [&](double dir) {
        double lo = sm, step = 1.0;
        double hi = sm + dir * step;
        while (L(hi) > Lmax - drop) {
            lo = hi;
            step *= 2.0;
            hi = sm + dir * step;
        }
        for (int i = 0; i < 60; ++i) {
            double m = 0.5 * (lo + hi);
            if (L(m) > Lmax - drop) lo = m;
            else hi = m;
        }
        return hi;
    };
    double s0 = edge(-1.0), s1 = edge(1.0);
    cplx iphi(0.0, phi);
    auto g = [&](double s) {
        cplx t = cplx(s, 0.0) + iphi;
        return std::exp(-x * std::cosh(t) - mu * t);
    };
    int n = 64;
    double h = (s1 - s0) / n;
    kahan_csum acc;
    kahan_sum mass;
    for (int k = 0; k <= n; ++k) {
        cplx v = g(s0 + k * h);
        acc.add(v);
        mass.add(std::abs(v));
    }
    cplx T = h * acc.value();
    for (int level = 0; level < 16; ++level) {
        kahan_csum mid;
        for (int k = 0; k < n; ++k) {
            cplx v = g(s0 + (k + 0.5) * h);
            mid.add(v);
            mass.add(std::abs(v));
        }
        cplx Tn = 0.5 * T + 0.5 * h * mid.value();
        n *= 2;
        h *= 0.5;
        double m = mass.value() * h;
        bool done = level >= 2 && std::abs(Tn - T) <= 1e-15 * std::abs(Tn) + 4e-17 * m;
        T = Tn;
        if (done) return 0.5 * T;
    }
    return 0.5 * T;
}

inline cplx bessel_k_any(cplx mu, double x) {
    if (x <= 2.0 && std::abs(sinpi(mu)) >= 0.1) {
        auto a = bessel_series_raw(-mu, x, 1), b = bessel_series_raw(mu, x, 1);
        cplx ls = log_sinpi(mu);
        return 0.5 * pi * (std::exp(a.log_scale - ls) * a.sum - std::exp(b.log_scale - ls) * b.sum);
    }
    return bessel_k_contour(mu, x);
}

} // namespace detail

// J, I or K of complex order at real x > 0 inside the envelope.
inline cplx bessel(BesselKind kind, cplx order, double x, const BesselEnvelope& env = {}) {
    if (!(x > 0.0)) throw precondition_error("bessel: x must be positive");
    if (x > env.max_x) throw range_error("bessel: x beyond envelope");
    if (std::abs(order) > env.max_order && (kind == BesselKind::K || x > env.series_x))
        throw range_error("bessel: order beyond envelope");
    switch (kind) {
        case BesselKind::J: return detail::bessel_ji(order, x, -1, env.series_x);
        case BesselKind::I: return detail::bessel_ji(order, x, 1, env.series_x);
        case BesselKind::K: return detail::bessel_k_any(order, x);
    }
    return 0.0;
}

inline cplx bessel_j(cplx order, double x, const BesselEnvelope& env = {}) {
    return bessel(BesselKind::J, order, x, env);
}
inline cplx bessel_i(cplx order, double x, const BesselEnvelope& env = {}) {
    return bessel(BesselKind::I, order, x, env);
}
inline cplx bessel_k(cplx order, double x, const BesselEnvelope& env = {}) {
    return bessel(BesselKind::K, order, x, env);
}

} // namespace psl2
