// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <queue>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "../error.hpp"
#include "complex.hpp"
#include "summation.hpp"

namespace psl2 {

enum class QuadScheme { adaptive_gauss, double_exponential };

struct QuadratureSpec {
    QuadScheme scheme = QuadScheme::adaptive_gauss;
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_panels = 4000;
    // imaginary offset of the integration line; 0 means the real axis
    double contour_shift = 0.0;
    // analyticity strip lo < Im < hi declared by the caller (only checked when contour_shift != 0)
    double strip_lo = 0.0;
    double strip_hi = 0.0;

    void validate() const {
        auto in = [](double t) { return t >= 1e-14 && t <= 1e-2; };
        if (!in(abs_tol) || !in(rel_tol))
            throw precondition_error("QuadratureSpec: tolerances must lie in [1e-14, 1e-2]");
        if (max_panels < 1) throw precondition_error("QuadratureSpec: max_panels must be positive");
        if (contour_shift != 0.0 && !(contour_shift > strip_lo && contour_shift < strip_hi))
            throw precondition_error("QuadratureSpec: contour_shift outside the declared analyticity strip");
    }

    QuadratureSpec with_tol(double a, double r) const {
        QuadratureSpec s = *this;
        s.abs_tol = a;
        s.rel_tol = r;
        return s;
    }
};

struct QuadResult {
    cplx value = 0.0;
    double error = 0.0;
    long evaluations = 0;
    int panels = 0;
};

namespace detail {

inline constexpr std::array<double, 11> gk21_x = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> gk21_wk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208707219444, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> gk21_wg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class F>
cplx call(F& f, double x) {
    if constexpr (std::is_convertible_v<std::invoke_result_t<F&, double>, double>)
        return cplx(static_cast<double>(f(x)), 0.0);
    else
        return cplx(f(x));
}

struct panel {
    double a, b;
    cplx value;
    double error;
    bool operator<(const panel& o) const { return error < o.error; }
};

template <class F>
panel gk21(F& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx fc = call(f, c);
    cplx k = gk21_wk[10] * fc, g = 0.0;
    for (int j = 0; j < 10; ++j) {
        double dx = h * gk21_x[j];
        cplx s = call(f, c - dx) + call(f, c + dx);
        k += gk21_wk[j] * s;
        if (j % 2 == 1) g += gk21_wg[j / 2] * s;
    }
    return {a, b, k * h, std::abs((k - g) * h)};
}

} // namespace detail

// Adaptive Gauss-Kronrod on a finite interval. Breakpoints split the interval up front.
template <class F>
QuadResult integrate_gk(F&& f, double a, double b, const QuadratureSpec& spec,
                        const std::vector<double>& breaks = {}) {
    QuadResult out;
    if (a == b) return out;
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::vector<double> pts{a};
    for (double p : breaks)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    std::priority_queue<detail::panel> q;
    cplx total = 0.0;
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto p = detail::gk21(f, pts[i], pts[i + 1]);
        total += p.value;
        err += p.error;
        q.push(p);
    }
    out.evaluations = 21L * static_cast<long>(q.size());
    while (err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (static_cast<int>(q.size()) >= spec.max_panels)
            throw convergence_error("integrate: panel budget exhausted", err);
        auto p = q.top();
        q.pop();
        double m = 0.5 * (p.a + p.b);
        if (!(m > p.a && m < p.b)) throw convergence_error("integrate: interval underflow", err);
        auto l = detail::gk21(f, p.a, m), r = detail::gk21(f, m, p.b);
        out.evaluations += 42;
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        q.push(l);
        q.push(r);
    }
    // recompute the totals from the surviving panels to shed accumulated rounding
    kahan_csum s;
    kahan_sum e;
    out.panels = static_cast<int>(q.size());
    while (!q.empty()) {
        s.add(q.top().value);
        e.add(q.top().error);
        q.pop();
    }
    out.value = sign * s.value();
    out.error = e.value();
    return out;
}

// Double-exponential rule: tanh-sinh on [a,b], exp-sinh on [a,inf), sinh-sinh on R.
template <class F>
QuadResult integrate_de(F&& f, double a, double b, const QuadratureSpec& spec) {
    const double inf = std::numeric_limits<double>::infinity();
    QuadResult out;
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    // (-inf, b] -> [-b, inf) with reflected integrand
    const bool reflect = std::isinf(a) && !std::isinf(b);
    if (reflect) {
        a = -b;
        b = inf;
    }
    enum { finite, half, line } kind = std::isinf(a) && std::isinf(b) ? line : (std::isinf(b) ? half : finite);
    auto node = [&](double t, double& x, double& w) {
        double u = 0.5 * pi * std::sinh(t), du = 0.5 * pi * std::cosh(t);
        if (kind == finite) {
            double c = 0.5 * (a + b), h = 0.5 * (b - a);
            double th = std::tanh(u), ch = std::cosh(u);
            x = c + h * th;
            w = h * du / (ch * ch);
            // keep nodes strictly inside
            if (!(x > a && x < b)) w = 0.0;
        } else if (kind == half) {
            double ex = std::exp(u);
            x = a + ex;
            w = ex * du;
        } else {
            x = std::sinh(u);
            w = std::cosh(u) * du;
        }
    };
    const double tmax = kind == finite ? 3.2 : 4.5;
    auto sum_level = [&](double h, bool odd_only) {
        kahan_csum s;
        long n = static_cast<long>(std::ceil(tmax / h));
        for (long k = -n; k <= n; ++k) {
            if (odd_only && k % 2 == 0) continue;
            double x, w;
            node(k * h, x, w);
            if (w == 0.0 || !std::isfinite(w) || !std::isfinite(x)) continue;
            cplx v = detail::call(f, reflect ? -x : x);
            ++out.evaluations;
            if (std::isfinite(v.real()) && std::isfinite(v.imag())) s.add(w * v);
        }
        return s.value();
    };
    double h = 0.5;
    cplx I = h * sum_level(h, false);
    double err = inf;
    for (int level = 1; level <= 10; ++level) {
        h *= 0.5;
        cplx In = 0.5 * I + h * sum_level(h, true);
        err = std::abs(In - I);
        I = In;
        if (level >= 3 && err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(I))) {
            out.value = sign * I;
            out.error = err;
            out.panels = level;
            return out;
        }
    }
    throw convergence_error("integrate: double-exponential levels exhausted", err);
}

// Generic entry: finite or infinite limits, real parameter. Infinite ends use
// the double-exponential rule or a rational map for the adaptive scheme.
template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadratureSpec& spec) {
    spec.validate();
    if (spec.scheme == QuadScheme::double_exponential) return integrate_de(f, a, b, spec);
    bool ia = std::isinf(a), ib = std::isinf(b);
    if (!ia && !ib) return integrate_gk(f, a, b, spec);
    if (ia && ib) {
        auto g = [&](double t) {
            double x = t / (1.0 - t * t), dx = (1.0 + t * t) / ((1.0 - t * t) * (1.0 - t * t));
            return detail::call(f, x) * dx;
        };
        double s = (a < b) ? 1.0 : -1.0;
        auto r = integrate_gk(g, -1.0, 1.0, spec, {0.0});
        r.value *= s;
        return r;
    }
    if (a > b) throw precondition_error("integrate: reversed infinite limits");
    double base = ia ? b : a;
    double dir = ia ? -1.0 : 1.0;
    auto g = [&](double t) {
        double x = base + dir * (1.0 - t) / t;
        return detail::call(f, x) / (t * t);
    };
    return integrate_gk(g, 0.0, 1.0, spec);
}

// Integral over the horizontal line Im = spec.contour_shift of a function of a complex variable.
template <class F>
QuadResult integrate_line(F&& f, const QuadratureSpec& spec, const std::vector<double>& breaks = {},
                          double half_width = std::numeric_limits<double>::infinity()) {
    spec.validate();
    double c = spec.contour_shift;
    auto g = [&](double t) { return cplx(f(cplx(t, c))); };
    if (std::isinf(half_width)) return integrate(g, -half_width, half_width, spec);
    return integrate_gk(g, -half_width, half_width, spec, breaks);
}

// Wynn epsilon extrapolation of a sequence of partial sums.
inline cplx wynn_epsilon(const std::vector<cplx>& s, double* err = nullptr) {
    std::size_t n = s.size();
    if (n < 3) {
        if (err) *err = n >= 2 ? std::abs(s[n - 1] - s[n - 2]) : std::numeric_limits<double>::infinity();
        return n ? s.back() : cplx(0.0);
    }
    std::vector<cplx> e0(n + 1, 0.0), e1(s.begin(), s.end());
    cplx best = s.back();
    double best_err = std::abs(s[n - 1] - s[n - 2]);
    std::vector<cplx> prev = e0, cur = e1;
    for (std::size_t k = 1; k < n; ++k) {
        std::vector<cplx> next(n - k);
        bool ok = true;
        for (std::size_t j = 0; j + 1 < cur.size(); ++j) {
            cplx d = cur[j + 1] - cur[j];
            if (std::abs(d) < 1e-300) {
                ok = false;
                break;
            }
            next[j] = prev[j + 1] + 1.0 / d;
        }
        if (!ok) break;
        if (k % 2 == 0 && next.size() >= 2) {
            double e = std::abs(next.back() - next[next.size() - 2]);
            if (e < best_err) {
                best_err = e;
                best = next.back();
            }
        }
        prev = cur;
        cur = next;
    }
    if (err) *err = best_err;
    return best;
}

// Integral over [a, inf) of an oscillatory integrand with slowly decaying envelope:
// panels of length `step`, partial sums accelerated by Wynn epsilon.
template <class F>
QuadResult integrate_tail(F&& f, double a, double step, const QuadratureSpec& spec, int max_terms = 60,
                          int min_terms = 12) {
    spec.validate();
    QuadResult out;
    std::vector<cplx> partial;
    kahan_csum acc;
    double qerr = 0.0;
    double err = std::numeric_limits<double>::infinity();
    cplx best = 0.0;
    QuadratureSpec ps = spec.with_tol(std::max(1e-14, spec.abs_tol * 0.01), std::max(1e-14, spec.rel_tol * 0.1));
    for (int k = 0; k < max_terms; ++k) {
        auto r = integrate_gk(f, a + k * step, a + (k + 1) * step, ps);
        out.evaluations += r.evaluations;
        qerr += r.error;
        acc.add(r.value);
        partial.push_back(acc.value());
        if (k + 1 >= min_terms) {
            double e;
            // extrapolate on the most recent part of the sequence
            std::size_t start = partial.size() > 24 ? partial.size() - 24 : 0;
            std::vector<cplx> tailseq(partial.begin() + static_cast<long>(start), partial.end());
            best = wynn_epsilon(tailseq, &e);
            err = e + qerr;
            if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(best))) {
                out.value = best;
                out.error = err;
                out.panels = k + 1;
                return out;
            }
        }
    }
    throw convergence_error("integrate_tail: extrapolation did not settle", err);
}

// Gauss-Legendre nodes and weights on [-1,1], cached per order.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5)), pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

} // namespace psl2
