// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "error.hpp"
#include "group.hpp"
#include "lie.hpp"
#include "specfun/complex.hpp"
#include "specfun/gamma.hpp"
#include "specfun/quadrature.hpp"
#include "specfun/summation.hpp"

namespace psl2 {

// phi_p(g; nu) = y^{nu + 1/2} e^{2 p i theta}
struct PhiVector {
    int p = 0;
    cplx nu = 0.0;
};

namespace detail {

// log(xi - i) with the branch cut pointing upward from i, arg in (-3pi/2, pi/2]
inline cplx log_xi_minus_i(cplx xi) {
    cplx l = std::log(xi - I);
    if (l.imag() > 0.5 * pi) l -= cplx(0.0, 2.0 * pi);
    return l;
}

// xi(t) = t + i (c0 + a (sqrt(1+t^2) - 1)): passes below i, rises with slope a at both ends.
struct bent_contour {
    double c0 = 0.5;
    double a = 0.5;

    cplx at(double t) const { return {t, c0 + a * (std::sqrt(1.0 + t * t) - 1.0)}; }
    cplx dxi(double t) const { return {1.0, a * t / std::sqrt(1.0 + t * t)}; }

    // |t| beyond which e(y xi) has decayed by e^{-45} relative to t = 0
    double half_width(double y) const {
        double q = 1.0 + 45.0 / (2.0 * pi * y * a);
        return std::sqrt(q * q - 1.0) + 1.0;
    }

    std::vector<double> breaks(double T) const {
        std::vector<double> b{0.0};
        double gap = 1.0 - c0;
        for (double s = gap; s < 1.0; s *= 2.0) {
            b.push_back(s);
            b.push_back(-s);
        }
        for (double s = 1.0; s < T; s *= 2.0) {
            b.push_back(s);
            b.push_back(-s);
        }
        return b;
    }
};

// Bottom height c0 moves toward i as y grows so that e(y xi) does not cancel.
inline bent_contour jacquet_contour(int dp, cplx nu, double y, const QuadratureSpec& spec) {
    bent_contour c;
    double base = std::min(0.5, 1.0 / (std::abs(nu) + std::abs(dp) + 1.0));
    c.a = base;
    if (spec.contour_shift != 0.0) {
        c.c0 = spec.contour_shift;
        return c;
    }
    double gap = std::max(1.0, std::abs(double(dp) + 0.5 + nu)) / (2.0 * pi * y);
    c.c0 = 1.0 - std::clamp(gap, 0.02, 1.0 - base);
    return c;
}

inline QuadratureSpec jacquet_strip(QuadratureSpec s) {
    s.strip_lo = 0.0;
    s.strip_hi = 1.0;
    return s;
}

// int e(y xi) (xi^2+1)^{-nu-1/2} ((xi+i)/(xi-i))^{dp} dxi, and the integrated-by-parts form
// int ((1+2nu) xi + 2 dp i) e(y xi) (xi^2+1)^{-nu-3/2} ((xi+i)/(xi-i))^{dp} dxi.
template <bool by_parts>
QuadResult jacquet_integral(int dp, cplx nu, double y, const QuadratureSpec& spec) {
    if (!(y > 0.0)) throw precondition_error("jacquet: y must be positive");
    QuadratureSpec q = jacquet_strip(spec);
    q.validate();
    auto c = jacquet_contour(dp, nu, y, q);
    double T = c.half_width(y);
    auto f = [&](double t) {
        cplx xi = c.at(t);
        cplx lp = std::log(xi + I), lm = log_xi_minus_i(xi);
        cplx expo = cplx(0.0, 2.0 * pi * y) * xi + double(dp) * (lp - lm);
        if constexpr (by_parts) {
            expo -= (nu + 1.5) * (lp + lm);
            return ((1.0 + 2.0 * nu) * xi + cplx(0.0, 2.0 * dp)) * std::exp(expo) * c.dxi(t);
        } else {
            expo -= (nu + 0.5) * (lp + lm);
            return std::exp(expo) * c.dxi(t);
        }
    };
    // absolute tolerance measured against the integrand size near the bottom of the contour
    double m = 0.0;
    for (double t : {0.0, 1.0 - c.c0, c.c0 - 1.0, 1.0, -1.0}) m = std::max(m, std::abs(f(t)));
    QuadratureSpec inner = q;
    inner.abs_tol = q.abs_tol * m;
    inner.max_panels = std::max(q.max_panels, 4000);
    return integrate_gk(f, -T, T, inner, c.breaks(T));
}

} // namespace detail

// A^delta phi_p(a[y]; nu) with its quadrature error estimate.
inline QuadResult jacquet_a(int p, cplx nu, int delta, double y, const QuadratureSpec& spec = {}) {
    if (delta != 1 && delta != -1) throw precondition_error("jacquet: delta must be +1 or -1");
    if (!(nu.real() > -0.5)) throw precondition_error("jacquet: Re nu must exceed -1/2");
    auto r = detail::jacquet_integral<false>(delta * p, nu, y, spec);
    cplx pre = std::exp((0.5 - nu) * std::log(y));
    r.value *= pre;
    r.error *= std::abs(pre);
    return r;
}

// integrated-by-parts route for the same quantity
inline QuadResult jacquet_a_by_parts(int p, cplx nu, int delta, double y, const QuadratureSpec& spec = {}) {
    if (delta != 1 && delta != -1) throw precondition_error("jacquet: delta must be +1 or -1");
    if (!(nu.real() > -0.5)) throw precondition_error("jacquet: Re nu must exceed -1/2");
    auto r = detail::jacquet_integral<true>(delta * p, nu, y, spec);
    cplx pre = std::exp((-0.5 - nu) * std::log(y)) / cplx(0.0, 2.0 * pi);
    r.value *= pre;
    r.error *= std::abs(pre);
    return r;
}

// A^delta phi_p(g; nu) at g = n[x] a[y] k[theta]; x and theta enter as exact factors.
inline cplx jacquet_phi(int p, cplx nu, int delta, const IwasawaCoords& at, const QuadratureSpec& spec = {}) {
    cplx v = jacquet_a(p, nu, delta, at.y, spec).value;
    return v * std::exp(cplx(0.0, 2.0 * p * at.theta)) * e(delta * at.x);
}

// closed form for p = 0: 2 pi^{1/2+nu} / Gamma(1/2+nu) y^{1/2} K_nu(2 pi y), K supplied by the caller
inline cplx jacquet_p0_prefactor(cplx nu) { return 2.0 * std::exp((0.5 + nu) * std::log(pi)) * rgamma(0.5 + nu); }

namespace detail {

inline bool near_integer(cplx z, double tol) {
    return std::abs(z.imag()) <= tol && std::abs(z.real() - std::round(z.real())) <= tol;
}

// nonnegative integer n with alpha - mu - 1/2 = n, or -1
inline int laguerre_degree(cplx alpha, cplx mu) {
    cplx n = alpha - mu - 0.5;
    if (n.imag() != 0.0 || n.real() < 0.0 || n.real() != std::floor(n.real()) || n.real() > 400.0) return -1;
    return static_cast<int>(n.real());
}

// (-1)^n n! e^{-z/2} z^{mu+1/2} L_n^{(2 mu)}(z)
inline cplx whittaker_laguerre(int n, cplx mu, double z) {
    cplx a = 2.0 * mu;
    cplx l0 = 1.0, l1 = 1.0 + a - z;
    cplx ln = n == 0 ? l0 : l1;
    for (int m = 1; m < n; ++m) {
        cplx l2 = ((2.0 * m + 1.0 + a - z) * l1 - (double(m) + a) * l0) / (m + 1.0);
        l0 = l1;
        l1 = l2;
        ln = l2;
    }
    double lf = std::lgamma(n + 1.0);
    cplx scale = std::exp(lf - 0.5 * z + (mu + 0.5) * std::log(z));
    return (n % 2 ? -1.0 : 1.0) * scale * ln;
}

// e^{-z/2} z^{mu+1/2} 1F1(1/2+mu-alpha; 1+2mu; z), returned with the Gamma-ratio weight applied
inline cplx whittaker_m_term(cplx alpha, cplx mu, double z) {
    cplx w = rgamma(0.5 - alpha - mu);
    if (w == 0.0) return 0.0;
    cplx a = 0.5 + mu - alpha, b = 1.0 + 2.0 * mu;
    kahan_csum s;
    cplx t = 1.0;
    s.add(t);
    for (int n = 0; n < 500; ++n) {
        t *= (a + double(n)) / ((b + double(n)) * (n + 1.0)) * z;
        s.add(t);
        if (std::abs(t) < 1e-17 * std::abs(s.value()) && n > 3) break;
    }
    cplx lg = log_gamma(-2.0 * mu);
    return std::exp(lg - 0.5 * z + (mu + 0.5) * std::log(z)) * w * s.value();
}

// W = Gamma(-2mu)/Gamma(1/2-alpha-mu) M_{alpha,mu} + Gamma(2mu)/Gamma(1/2-alpha+mu) M_{alpha,-mu}
inline cplx whittaker_near_origin(cplx alpha, cplx mu, double z) {
    return whittaker_m_term(alpha, mu, z) + whittaker_m_term(alpha, -mu, z);
}

// W and W' as mantissas relative to exp(log_scale)
struct WhittakerState {
    cplx w, dw, log_scale;
};

// large-z expansion e^{-z/2} z^alpha sum (1/2+mu-alpha)_n (1/2-mu-alpha)_n / n! (-z)^{-n};
// empty if it does not settle
inline std::optional<WhittakerState> whittaker_asymptotic(cplx alpha, cplx mu, double z) {
    cplx a = 0.5 + mu - alpha, b = 0.5 - mu - alpha;
    cplx s = 1.0, ds = 0.0, t = 1.0;
    double last = 1.0;
    bool done = false;
    for (int n = 0; n < 400; ++n) {
        t *= -(a + double(n)) * (b + double(n)) / ((n + 1.0) * z);
        s += t;
        ds += -(n + 1.0) / z * t;
        double m = std::abs(t);
        if (m < 1e-17 * std::abs(s) || t == 0.0) {
            done = true;
            break;
        }
        if (m > last && n > 2) return std::nullopt;
        last = m;
    }
    if (!done) return std::nullopt;
    return WhittakerState{s, (alpha / z - 0.5) * s + ds, -0.5 * z + alpha * std::log(z)};
}

// asymptotic start at the first Z >= z0 (doubling) where the expansion settles; Z is updated
inline WhittakerState whittaker_start(cplx alpha, cplx mu, double& Z) {
    for (;;) {
        if (auto st = whittaker_asymptotic(alpha, mu, Z)) return *st;
        Z *= 2.0;
        if (Z > 4000.0) throw convergence_error("whittaker: asymptotic start not reached", Z);
    }
}

// Taylor stepping of z^2 W'' = (z^2/4 - alpha z - (1/4 - mu^2)) W, rescaling the mantissa.
inline void whittaker_ode_step(cplx alpha, cplx mu, double z0, double z1, cplx& y, cplx& dy, cplx& log_scale) {
    cplx b = 0.25 - mu * mu;
    double z = z0;
    while (z != z1) {
        double hmax = std::min(1.0, 0.4 * z);
        double h = std::clamp(z1 - z, -hmax, hmax);
        cplx cm2 = 0.0, cm1 = 0.0, c0 = y, c1 = dy;
        cplx val = c0 + c1 * h, der = c1;
        double hp = h;
        int small = 0;
        for (int n = 0; n < 300; ++n) {
            cplx c2 = ((0.25 * z * z - alpha * z - b - double(n) * (n - 1.0)) * c0 + (0.5 * z - alpha) * cm1 +
                       0.25 * cm2 - 2.0 * z * n * (n + 1.0) * c1) /
                      (z * z * (n + 1.0) * (n + 2.0));
            hp *= h;
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
        z += h;
        if (std::abs(z - z1) < 1e-14 * std::abs(z1)) z = z1;
        y = val;
        dy = der;
        double m = std::abs(y);
        if (m > 1e100 || (m < 1e-100 && m > 0.0)) {
            double l = std::log(m);
            y /= m;
            dy /= m;
            log_scale += l;
        }
    }
}

} // namespace detail

// W_{alpha,mu}(z) for complex alpha, mu and z > 0 without quadrature: Laguerre form when
// alpha -+ mu - 1/2 is a nonnegative integer, the M-series for small z, otherwise the
// large-z expansion carried back by the Whittaker equation.
inline cplx whittaker_w_series(cplx alpha, cplx mu, double z) {
    if (!(z > 0.0)) throw precondition_error("whittaker: argument must be positive");
    if (int n = detail::laguerre_degree(alpha, mu); n >= 0) return detail::whittaker_laguerre(n, mu, z);
    if (int n = detail::laguerre_degree(alpha, -mu); n >= 0) return detail::whittaker_laguerre(n, -mu, z);
    if (z <= 2.0 && !detail::near_integer(2.0 * mu, 0.05)) return detail::whittaker_near_origin(alpha, mu, z);
    double Z = std::max({40.0, z, 4.0 * (std::norm(mu) + std::norm(alpha) + 1.0)});
    auto [w, dw, ls] = detail::whittaker_start(alpha, mu, Z);
    if (Z != z) detail::whittaker_ode_step(alpha, mu, Z, z, w, dw, ls);
    return std::exp(ls) * w;
}

// W_{alpha,mu} at many points: one downward sweep of the Whittaker equation through the sorted nodes.
inline std::vector<cplx> whittaker_w_batch(cplx alpha, cplx mu, const std::vector<double>& zs) {
    std::vector<cplx> out(zs.size());
    if (zs.empty()) return out;
    for (double z : zs)
        if (!(z > 0.0)) throw precondition_error("whittaker: argument must be positive");
    if (detail::laguerre_degree(alpha, mu) >= 0 || detail::laguerre_degree(alpha, -mu) >= 0) {
        for (std::size_t i = 0; i < zs.size(); ++i) out[i] = whittaker_w_series(alpha, mu, zs[i]);
        return out;
    }
    std::vector<std::size_t> order(zs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return zs[a] > zs[b]; });
    bool series_ok = !detail::near_integer(2.0 * mu, 0.05);
    double Z = std::max({40.0, zs[order[0]], 4.0 * (std::norm(mu) + std::norm(alpha) + 1.0)});
    auto [w, dw, ls] = detail::whittaker_start(alpha, mu, Z);
    double zc = Z;
    for (std::size_t i : order) {
        double z = zs[i];
        if (z <= 2.0 && series_ok) {
            out[i] = detail::whittaker_near_origin(alpha, mu, z);
            continue;
        }
        if (z != zc) detail::whittaker_ode_step(alpha, mu, zc, z, w, dw, ls);
        zc = z;
        out[i] = std::exp(ls) * w;
    }
    return out;
}

// W_{delta p, nu}(arg) recovered from the Jacquet integral:
// W = (-1)^p pi^{-nu-1/2} Gamma(delta p + nu + 1/2) A^delta phi_p(a[arg / 4 pi]).
// W is even in the second index; nu with Re nu < 0 is reflected.
inline cplx whittaker_w(cplx alpha, cplx mu, double arg, const QuadratureSpec& spec = {}) {
    if (!(arg > 0.0)) throw precondition_error("whittaker_w: argument must be positive");
    if (alpha.imag() != 0.0 || alpha.real() != std::round(alpha.real()))
        throw precondition_error("whittaker_w: integral route needs an integer first index");
    int dp = static_cast<int>(std::round(alpha.real()));
    int delta = dp < 0 ? -1 : 1, p = std::abs(dp);
    cplx nu = mu.real() < 0.0 ? -mu : mu;
    if (is_nonpositive_integer(alpha + mu + 0.5) || is_nonpositive_integer(alpha - mu + 0.5))
        throw pole_error("whittaker_w: Gamma(delta p + nu + 1/2) has a pole; the Jacquet value vanishes");
    auto A = jacquet_a(p, nu, delta, arg / (4.0 * pi), spec);
    cplx f = std::exp(-(nu + 0.5) * std::log(pi) + log_gamma(alpha + nu + 0.5));
    return (p % 2 ? -1.0 : 1.0) * f * A.value;
}

// Normalized residual of -y^2 b'' + ((2 pi n y)^2 - 4 pi n p y - (1/4 - nu^2)) b = 0 with
// b(y) = W_{sgn(n) p, nu}(4 pi |n| y). Steps are relative to y.
inline double whittaker_ode_residual(int p, cplx nu, int n, double y, const FiniteDifferenceSpec& fd = {1e-2, 4, true},
                                     const QuadratureSpec& spec = QuadratureSpec{}.with_tol(1e-14, 1e-14)) {
    fd.validate();
    if (n == 0) throw precondition_error("whittaker_ode_residual: n must be nonzero");
    if (!(y > 0.0)) throw precondition_error("whittaker_ode_residual: y must be positive");
    int delta = n > 0 ? 1 : -1;
    cplx alpha = double(delta * p);
    bool elementary = detail::laguerre_degree(alpha, nu) >= 0 || detail::laguerre_degree(alpha, -nu) >= 0;
    auto b = [&](double s) {
        double z = 4.0 * pi * std::abs(n) * (y + s);
        return elementary ? whittaker_w_series(alpha, nu, z) : whittaker_w(alpha, nu, z, spec);
    };
    double h = fd.step * y;
    cplx b0 = b(0.0);
    cplx b2 = detail::diff2(b, h, fd);
    double q0 = 2.0 * pi * n * y;
    cplx q = q0 * q0 - 4.0 * pi * n * p * y - (0.25 - nu * nu);
    cplx lhs = -y * y * b2 + q * b0;
    double scale = y * y * std::abs(b2) + std::abs(q * b0);
    return scale > 0.0 ? std::abs(lhs) / scale : std::abs(lhs);
}

// ||e^{+-} f||^2 / ||f||^2 = 4 (kappa^2 + (p +- 1/2)^2) on the principal series nu = i kappa.
inline double ladder_norm_ratio(int p, cplx nu, int sign = +1) {
    if (nu.real() != 0.0) throw precondition_error("ladder_norm_ratio: nu must lie on the imaginary axis");
    if (sign != 1 && sign != -1) throw precondition_error("ladder_norm_ratio: sign must be +1 or -1");
    double k = nu.imag(), q = p + 0.5 * sign;
    return 4.0 * (k * k + q * q);
}

} // namespace psl2
