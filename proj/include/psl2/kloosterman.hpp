// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"
#include "kirillov.hpp"
#include "spectra_data.hpp"
#include "spectral.hpp"
#include "specfun/bessel.hpp"
#include "specfun/complex.hpp"
#include "specfun/gamma.hpp"
#include "specfun/quadrature.hpp"
#include "specfun/summation.hpp"
#include "specfun/zeta.hpp"

namespace psl2 {

// ---------------------------------------------------------------- Kloosterman sums

namespace detail {

inline std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

} // namespace detail

// d^{-1} mod ell by the extended Euclidean algorithm
inline std::int64_t mod_inverse(std::int64_t d, std::int64_t ell) {
    if (ell < 1) throw precondition_error("mod_inverse: modulus must be >= 1");
    std::int64_t r0 = detail::floor_mod(d, ell), r1 = ell, s0 = 1, s1 = 0;
    while (r1 != 0) {
        std::int64_t q = r0 / r1;
        std::int64_t t = r0 - q * r1;
        r0 = r1;
        r1 = t;
        t = s0 - q * s1;
        s0 = s1;
        s1 = t;
    }
    if (r0 != 1 && ell != 1) throw precondition_error("mod_inverse: not a unit");
    return ell == 1 ? 0 : detail::floor_mod(s0, ell);
}

// S(m, n; ell) = sum over d mod ell, (d, ell) = 1, of e((m d + n dbar) / ell).
// Residues are exact; d and -d give conjugate terms, so the sum is real.
inline double kloosterman_sum(std::int64_t m, std::int64_t n, std::int64_t ell) {
    if (ell < 1) throw precondition_error("kloosterman_sum: ell must be >= 1");
    if (ell == 1) return 1.0;
    if (ell > (std::int64_t(1) << 30)) throw precondition_error("kloosterman_sum: ell too large for exact residues");
    std::int64_t mm = detail::floor_mod(m, ell), nn = detail::floor_mod(n, ell);
    kahan_sum re, im;
    for (std::int64_t d = 1; d < ell; ++d) {
        if (std::gcd(d, ell) != 1) continue;
        std::int64_t r = (mm * d + nn * mod_inverse(d, ell)) % ell;
        double a = 2.0 * pi * static_cast<double>(r) / static_cast<double>(ell);
        re.add(std::cos(a));
        im.add(std::sin(a));
    }
    if (std::abs(im.value()) > 1e-10)
        throw convergence_error("kloosterman_sum: imaginary part did not cancel", std::abs(im.value()));
    return re.value();
}

// ---------------------------------------------------------------- test weights

// Spectral weight f: even, entire, evaluated at nu; decay on the imaginary axis
// |f(it)| <= bound * exp(-rate t^2) (gaussian) or bound * exp(-rate |t|) (exponential).
struct SpectralWeight {
    enum class Decay { gaussian, exponential };
    std::function<cplx(cplx)> f;
    Decay decay = Decay::gaussian;
    double rate = 1.0;
    double bound = 1.0;

    cplx operator()(cplx nu) const { return f(nu); }

    // |t| beyond which |f(it)| < eps
    double cutoff(double eps) const {
        double l = std::log(std::max(bound, 1e-300) / eps);
        if (l <= 0.0) return 1.0;
        return decay == Decay::gaussian ? std::sqrt(l / rate) : l / rate;
    }

    double evenness_defect(int samples = 16) const {
        double d = 0.0;
        for (int j = 1; j <= samples; ++j) {
            cplx nu(0.37 * j / samples, 3.0 * j / samples);
            d = std::max(d, std::abs(f(nu) - f(-nu)));
        }
        return d;
    }

    // f(nu) = amplitude * exp(c nu^2), so f(it) = amplitude * exp(-c t^2)
    static SpectralWeight gaussian(double c, double amplitude = 1.0) {
        if (!(c > 0.0)) throw precondition_error("SpectralWeight: gaussian rate must be positive");
        SpectralWeight w;
        w.f = [c, amplitude](cplx nu) { return amplitude * std::exp(c * nu * nu); };
        w.decay = Decay::gaussian;
        w.rate = c;
        w.bound = std::abs(amplitude);
        return w;
    }

    SpectralWeight scaled(cplx alpha) const {
        SpectralWeight w = *this;
        auto g = f;
        w.f = [g, alpha](cplx nu) { return alpha * g(nu); };
        w.bound = bound * std::abs(alpha);
        return w;
    }
};

// Geometric weight phi on (0, inf), vanishing outside [lo, hi].
struct GeometricWeight {
    std::function<double(double)> phi;
    double lo = 1.0, hi = 2.0;

    double operator()(double x) const { return phi(x); }

    // max |phi| sampled just outside the declared support
    double support_defect(int samples = 64) const {
        double d = 0.0;
        for (int j = 0; j <= samples; ++j) {
            double f = double(j) / samples;
            d = std::max(d, std::abs(phi(lo * (0.5 + 0.5 * f))));
            d = std::max(d, std::abs(phi(hi * (1.0 + f))));
        }
        return d;
    }

    // exp(-a / (1 - s^2)) with s the position in [lo, hi] on the log scale
    static GeometricWeight bump(double lo = 1.0, double hi = 2.0, double a = 3.0) {
        if (!(lo > 0.0 && hi > lo)) throw precondition_error("GeometricWeight: need 0 < lo < hi");
        if (!(a > 0.0)) throw precondition_error("GeometricWeight: bump steepness must be positive");
        GeometricWeight w;
        double c = 0.5 * (std::log(lo) + std::log(hi)), h = 0.5 * (std::log(hi) - std::log(lo));
        w.phi = [c, h, a](double x) {
            if (!(x > 0.0)) return 0.0;
            double s = (std::log(x) - c) / h;
            return std::abs(s) < 1.0 ? std::exp(-a / (1.0 - s * s)) : 0.0;
        };
        w.lo = lo;
        w.hi = hi;
        return w;
    }

    GeometricWeight scaled(double c) const {
        GeometricWeight w = *this;
        auto g = phi;
        w.phi = [g, c](double x) { return c * g(x); };
        return w;
    }
};

// ---------------------------------------------------------------- Bessel transforms

// [J^delta_{-2nu}(x) - J^delta_{2nu}(x)] / sin(pi nu), J^+ = J and J^- = I.
// Equals 4 j_nu(delta (x / 4 pi)^2) / x.
inline cplx sum_bracket(int delta, cplx nu, double x) {
    if (delta != 1 && delta != -1) throw precondition_error("sum_bracket: delta must be +1 or -1");
    if (!(x > 0.0)) throw precondition_error("sum_bracket: x must be positive");
    bool regular = std::abs(sinpi(nu)) >= kernel_sin_floor;
    if (regular && x <= 4.0) {
        // scaled series: J_{2it} and cosh(pi t) alone overflow near t = 230
        auto a = detail::bessel_series_raw(-2.0 * nu, x, -delta), b = detail::bessel_series_raw(2.0 * nu, x, -delta);
        cplx ls = log_sinpi(nu);
        return std::exp(a.log_scale - ls) * a.sum - std::exp(b.log_scale - ls) * b.sum;
    }
    if (delta < 0) {
        // (I_{-2nu} - I_{2nu}) / sin(pi nu) = (4 / pi) cos(pi nu) K_{2nu}
        BesselEnvelope env;
        env.max_order = std::max(env.max_order, 2.0 * std::abs(nu) + 1.0);
        return 4.0 / pi * cospi(nu) * bessel_k(2.0 * nu, x, env);
    }
    if (!regular) {
        double r = x / (4.0 * pi);
        return 4.0 * bessel_kernel(nu, r * r) / x;
    }
    return (bessel_j(-2.0 * nu, x) - bessel_j(2.0 * nu, x)) / sinpi(nu);
}

namespace detail {

inline void require_delta(int delta, const char* who) {
    if (delta != 1 && delta != -1) throw precondition_error(std::string(who) + ": delta must be +1 or -1");
}

} // namespace detail

// B^delta phi(nu) = 2 pi int_0^inf bracket(x) phi(x) dx / x, over the support in log x.
inline QuadResult transform_B_quad(const GeometricWeight& phi, int delta, cplx nu, const QuadratureSpec& spec = {}) {
    spec.validate();
    detail::require_delta(delta, "transform_B");
    double a = std::log(phi.lo), b = std::log(phi.hi);
    std::vector<double> br;
    for (int j = 1; j < 8; ++j) br.push_back(a + (b - a) * j / 8.0);
    auto g = [&](double t) -> cplx {
        double x = std::exp(t), w = phi(x);
        return w == 0.0 ? cplx(0.0) : w * sum_bracket(delta, nu, x);
    };
    auto r = integrate_gk(g, a, b, spec, br);
    r.value *= 2.0 * pi;
    r.error *= 2.0 * pi;
    return r;
}

inline cplx transform_B(const GeometricWeight& phi, int delta, cplx nu, const QuadratureSpec& spec = {}) {
    return transform_B_quad(phi, delta, nu, spec).value;
}

// smallest exponential decay rate accepted for the spectral weight of transform_A
inline constexpr double weight_decay_margin = 0.05;

namespace detail {

inline double weight_cutoff(const SpectralWeight& f, const QuadratureSpec& spec, const char* who) {
    if (!(f.rate > 0.0)) throw precondition_error(std::string(who) + ": weight must declare a positive decay rate");
    if (f.decay == SpectralWeight::Decay::exponential && f.rate < weight_decay_margin)
        throw precondition_error(std::string(who) + ": declared decay leaves no margin for convergence");
    return f.cutoff(std::max(1e-16, 1e-2 * spec.abs_tol));
}

inline std::vector<double> unit_breaks(double a, double b, double w) {
    std::vector<double> br;
    for (double t = a + w; t < b - 1e-12; t += w) br.push_back(t);
    return br;
}

} // namespace detail

// A^delta f(x) = (1/4 pi) int_R bracket(it; x) t tanh(pi t) f(it) dt; the integrand is even in t.
inline QuadResult transform_A_quad(const SpectralWeight& f, int delta, double x, const QuadratureSpec& spec = {}) {
    spec.validate();
    detail::require_delta(delta, "transform_A");
    if (!(x > 0.0)) throw precondition_error("transform_A: x must be positive");
    double T = detail::weight_cutoff(f, spec, "transform_A");
    if (x > 4.0 && 2.0 * T > BesselEnvelope{}.max_order && delta > 0)
        throw range_error("transform_A: order range exceeds the Bessel envelope at this x");
    auto g = [&](double t) -> cplx {
        cplx nu(0.0, t);
        return sum_bracket(delta, nu, x) * t * std::tanh(pi * t) * f(nu);
    };
    auto r = integrate_gk(g, 0.0, T, spec, detail::unit_breaks(0.0, T, 1.0));
    r.value *= 2.0 / (4.0 * pi);
    r.error *= 2.0 / (4.0 * pi);
    return r;
}

inline cplx transform_A(const SpectralWeight& f, int delta, double x, const QuadratureSpec& spec = {}) {
    return transform_A_quad(f, delta, x, spec).value;
}

// delta_{mn} (1 / 4 pi^2) int_R t tanh(pi t) f(it) dt
inline QuadResult delta_term_quad(std::int64_t m, std::int64_t n, const SpectralWeight& f,
                                  const QuadratureSpec& spec = {}) {
    spec.validate();
    if (m == 0 || n == 0) throw precondition_error("delta_term: m and n must be nonzero");
    if (m != n) return {};
    double T = detail::weight_cutoff(f, spec, "delta_term");
    auto g = [&](double t) -> cplx { return t * std::tanh(pi * t) * f(cplx(0.0, t)); };
    // odd part cancels over R; integrate both halves so a non-even f is not silently folded
    auto r = integrate_gk(g, -T, T, spec, detail::unit_breaks(-T, T, 1.0));
    r.value /= 4.0 * pi * pi;
    r.error /= 4.0 * pi * pi;
    return r;
}

inline cplx delta_term(std::int64_t m, std::int64_t n, const SpectralWeight& f, const QuadratureSpec& spec = {}) {
    return delta_term_quad(m, n, f, spec).value;
}

// ---------------------------------------------------------------- geometric side

struct GeometricTerm {
    std::int64_t ell;
    double kloosterman;
    double x;  // 4 pi sqrt|mn| / ell
    double contribution;
};

struct GeometricSide {
    double value = 0.0;
    std::vector<GeometricTerm> terms;
    std::int64_t ell_needed = 0;  // largest ell whose x can meet the support
    double tail = 0.0;            // zero once ell_max >= ell_needed
};

inline std::int64_t geometric_ell_needed(std::int64_t m, std::int64_t n, const GeometricWeight& phi) {
    double X = 4.0 * pi * std::sqrt(std::abs(double(m) * double(n)));
    return static_cast<std::int64_t>(std::floor(X / phi.lo));
}

// sum_ell S(m, n; ell) / ell * phi(4 pi sqrt|mn| / ell); finite for compactly supported phi
inline GeometricSide geometric_side(std::int64_t m, std::int64_t n, const GeometricWeight& phi, std::int64_t ell_max) {
    if (m == 0 || n == 0) throw precondition_error("geometric_side: m and n must be nonzero");
    GeometricSide g;
    g.ell_needed = geometric_ell_needed(m, n, phi);
    if (ell_max < g.ell_needed)
        throw range_error("geometric_side: ell_max = " + std::to_string(ell_max) + " is below " +
                          std::to_string(g.ell_needed) + " required by the support of phi");
    double X = 4.0 * pi * std::sqrt(std::abs(double(m) * double(n)));
    kahan_sum acc;
    std::int64_t first = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(X / phi.hi)));
    for (std::int64_t ell = first; ell <= g.ell_needed; ++ell) {
        double x = X / double(ell);
        double w = phi(x);
        if (w == 0.0) continue;
        double s = kloosterman_sum(m, n, ell);
        double c = s / double(ell) * w;
        acc.add(c);
        g.terms.push_back({ell, s, x, c});
    }
    g.value = acc.value();
    return g;
}

// ---------------------------------------------------------------- spectral side

// Spectral weight h(nu) with a quadrature error: B^delta phi(nu) or a directly given f(nu).
using WeightFunction = std::function<QuadResult(cplx)>;

inline WeightFunction weight_from(const GeometricWeight& phi, int delta, const QuadratureSpec& spec = {}) {
    return [phi, delta, spec](cplx nu) { return transform_B_quad(phi, delta, nu, spec); };
}

inline WeightFunction weight_from(const SpectralWeight& f) {
    return [f](cplx nu) {
        QuadResult r;
        r.value = f(nu);
        return r;
    };
}

// sigma_{2r}(|m|) |m|^{-r} = sum_{d | m} (d^2 / |m|)^r, even in r
inline cplx divisor_factor(std::int64_t m, cplx r) {
    std::int64_t a = std::abs(m);
    kahan_csum s;
    for (std::int64_t d = 1; d * d <= a; ++d) {
        if (a % d) continue;
        double q = double(d) * double(d) / double(a);
        s.add(std::exp(r * std::log(q)));
        if (d * d != a) s.add(std::exp(-r * std::log(q)));
    }
    return s.value();
}

// sigma_{2r}(m) sigma_{2r}(n) (mn)^{-r} / (zeta(1 + 2r) zeta(1 - 2r)) at r = it; vanishes at t = 0
inline cplx continuous_density(std::int64_t m, std::int64_t n, double t) {
    if (t == 0.0) return 0.0;
    cplx r(0.0, t);
    return divisor_factor(m, r) * divisor_factor(n, r) / (zeta(1.0 + 2.0 * r) * zeta(1.0 - 2.0 * r));
}

struct SpectralTerm {
    std::string label;
    SpectralParam param;
    int epsilon = 0;   // parity for Maass forms, 0 for the discrete series
    cplx coefficient;  // conj(varrho_V(m)) varrho_V(n)
    cplx weight;       // h(nu_V)
    cplx contribution;
    double error = 0.0;
};

struct SpectralSide {
    cplx discrete = 0.0;  // Maass plus discrete-series sum
    cplx continuous = 0.0;
    double discrete_error = 0.0;
    double continuous_error = 0.0;
    double continuous_cutoff = 0.0;
    double continuous_tail = 0.0;  // last panel magnitude
    double truncation = 0.0;       // estimate for forms beyond nu_cutoff
    std::vector<SpectralTerm> terms;
    int num_forms = 0;
    bool discrete_series_present = false;
    cplx value() const { return discrete + continuous; }
};

struct SpectralSideOptions {
    double nu_cutoff = 0.0;        // 0: the dataset's complete range
    double continuous_min = 0.0;   // continuous integral runs at least this far (0: nu_cutoff)
    double continuous_max = 400.0;
    double panel = 2.0;
    int threads = 0;  // 0: hardware concurrency
};

namespace detail {

inline unsigned pool_size(int requested) {
    unsigned h = std::thread::hardware_concurrency();
    if (requested > 0) return unsigned(requested);
    return h ? h : 4u;
}

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
    unsigned p = std::min<std::size_t>(pool_size(threads), std::max<std::size_t>(count, 1));
    std::vector<std::future<void>> fut;
    for (unsigned w = 0; w < p; ++w)
        fut.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < count; i += p) body(i);
        }));
    for (auto& f : fut) f.get();
}

// Weyl law density kappa / 6 times a mean coefficient size times |h(i kappa)|, beyond kc
inline double truncation_estimate(const WeightFunction& h, double kc, double mean_coeff, double tol) {
    if (mean_coeff == 0.0) return 0.0;
    kahan_sum acc;
    double step = 0.5, prev = std::abs(h(cplx(0.0, kc)).value) * kc / 6.0;
    for (double k = kc + step; k <= kc + 400.0; k += step) {
        double cur = std::abs(h(cplx(0.0, k)).value) * k / 6.0;
        acc.add(0.5 * step * (prev + cur));
        prev = cur;
        if (cur * mean_coeff < tol && k > kc + 4.0) break;
    }
    return mean_coeff * acc.value();
}

} // namespace detail

// sum_V conj(varrho_V(m)) varrho_V(n) h(nu_V) + (1/4 pi) int_R density(t) h(it) dt.
// Maass forms enter up to nu_cutoff; the discrete series only when m, n have the same sign
// (V+ for positive, V- for negative indices).
inline SpectralSide spectral_side(std::int64_t m, std::int64_t n, const WeightFunction& h, const SpectralDataset& ds,
                                  const SpectralSideOptions& opt = {}, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (m == 0 || n == 0) throw precondition_error("spectral_side: m and n must be nonzero");
    double kc = opt.nu_cutoff > 0.0 ? opt.nu_cutoff : ds.complete_kappa();
    if (kc > ds.complete_kappa() * (1.0 + 1e-12))
        throw data_error("spectral_side: dataset is complete only below kappa = " + std::to_string(ds.complete_kappa()));
    SpectralSide out;
    for (auto& r : ds.forms) {
        if (r.kappa > kc) continue;
        SpectralTerm t;
        char b[48];
        std::snprintf(b, sizeof b, "maass kappa=%.10g", r.kappa);
        t.label = b;
        t.param = r.param();
        t.epsilon = r.epsilon;
        t.coefficient = std::conj(normalize(r, int(m))) * normalize(r, int(n));
        out.terms.push_back(t);
    }
    out.num_forms = int(out.terms.size());
    bool same_sign = (m > 0) == (n > 0);
    if (same_sign)
        for (auto& r : ds.holo) {
            SpectralTerm t;
            t.label = "holomorphic k=" + std::to_string(r.k) + (m > 0 ? " V+" : " V-");
            t.param = r.param();
            // V- mirrors V+: varrho_{V-}(-n) = varrho_{V+}(n)
            int sm = m > 0 ? 1 : -1;
            t.coefficient = std::conj(normalize(r, int(sm * m))) * normalize(r, int(sm * n));
            out.terms.push_back(t);
        }
    out.discrete_series_present = same_sign && !ds.holo.empty();
    detail::parallel_for(out.terms.size(), opt.threads, [&](std::size_t i) {
        auto& t = out.terms[i];
        auto q = h(t.param.nu());
        t.weight = q.value;
        t.contribution = t.coefficient * q.value;
        t.error = std::abs(t.coefficient) * q.error;
    });
    kahan_csum acc;
    kahan_sum err;
    for (auto& t : out.terms) {
        acc.add(t.contribution);
        err.add(t.error);
    }
    out.discrete = acc.value();
    out.discrete_error = err.value();

    // continuous spectrum: even integrand, folded to t > 0, panels until two consecutive ones are negligible
    double tmin = opt.continuous_min > 0.0 ? opt.continuous_min : kc;
    auto g = [&](double t) { return continuous_density(m, n, t) * h(cplx(0.0, t)).value; };
    QuadratureSpec ps = spec.with_tol(std::max(1e-14, 0.1 * spec.abs_tol), spec.rel_tol);
    std::vector<QuadResult> panels;
    double T = 0.0;
    int quiet = 0;
    unsigned batch = detail::pool_size(opt.threads);
    while (T < opt.continuous_max && quiet < 2) {
        std::vector<QuadResult> part(batch);
        detail::parallel_for(batch, opt.threads, [&](std::size_t i) {
            double a = T + opt.panel * double(i);
            part[i] = integrate_gk(g, a, a + opt.panel, ps);
        });
        for (auto& p : part) {
            panels.push_back(p);
            T += opt.panel;
            bool small = std::abs(p.value) < spec.abs_tol;
            quiet = (T >= tmin && small) ? quiet + 1 : 0;
            if (quiet >= 2 || T >= opt.continuous_max) break;
        }
    }
    kahan_csum c;
    kahan_sum ce;
    for (auto& p : panels) {
        c.add(p.value);
        ce.add(p.error);
    }
    out.continuous = 2.0 / (4.0 * pi) * c.value();
    out.continuous_error = 2.0 / (4.0 * pi) * ce.value();
    out.continuous_cutoff = T;
    out.continuous_tail = 2.0 / (4.0 * pi) * std::abs(panels.back().value);

    // truncation: mean |coefficient| over the upper third of the Maass range
    double mean = 0.0;
    int cnt = 0;
    for (std::size_t i = 0; i < std::size_t(out.num_forms); ++i)
        if (3 * i >= 2 * std::size_t(out.num_forms)) {
            mean += std::abs(out.terms[i].coefficient);
            ++cnt;
        }
    if (cnt) mean /= cnt;
    out.truncation = detail::truncation_estimate(h, kc, mean, 1e-3 * spec.abs_tol);
    return out;
}

// ---------------------------------------------------------------- sum formula report

struct SumFormulaTruncation {
    int num_forms = 0;
    std::int64_t ell_max = 0;
    double nu_cutoff = 0.0;
    double continuous_cutoff = 0.0;
};

struct SumFormulaReport {
    std::int64_t m = 0, n = 0;
    int delta = 1;
    cplx spectral_side = 0.0;
    cplx geometric_side = 0.0;
    std::vector<SpectralTerm> contributions;
    std::vector<GeometricTerm> geometric_terms;
    cplx continuous_term = 0.0;
    cplx delta_term = 0.0;
    SumFormulaTruncation truncation;
    bool discrete_series_present = false;
    double truncation_budget = 0.0;  // forms beyond nu_cutoff plus the continuous tail
    double quadrature_budget = 0.0;
    double residual = 0.0;           // |spectral - geometric| / (1 + |geometric|)
    double relative_error = 0.0;     // |spectral - geometric| / |geometric|

    double budget() const { return truncation_budget + quadrature_budget; }
};

struct SumFormulaOptions {
    SpectralSideOptions spectral;
    std::int64_t ell_max = 0;  // 0: exactly what the support of phi needs
    QuadratureSpec spec;
    bool validate_dataset = true;
};

// Both sides of the Kloosterman sum formula for a compactly supported phi:
// sum_ell S(m,n;ell)/ell phi(4 pi sqrt|mn|/ell) = sum_V conj(varrho_V(m)) varrho_V(n) B^delta phi(nu_V) + continuous.
inline SumFormulaReport sum_formula(std::int64_t m, std::int64_t n, const GeometricWeight& phi, const SpectralDataset& ds,
                                    const SumFormulaOptions& opt = {}) {
    if (m == 0 || n == 0) throw precondition_error("sum_formula: m and n must be nonzero");
    if (opt.validate_dataset) {
        auto rep = validate(ds);
        if (!rep.pass())
            throw data_error("sum_formula: dataset validation failed (" + std::to_string(rep.failures()) +
                             " records)");
    }
    SumFormulaReport r;
    r.m = m;
    r.n = n;
    r.delta = (m > 0) == (n > 0) ? 1 : -1;
    std::int64_t ell_max = opt.ell_max > 0 ? opt.ell_max : std::max<std::int64_t>(1, geometric_ell_needed(m, n, phi));
    auto geo = geometric_side(m, n, phi, ell_max);
    r.geometric_side = geo.value;
    r.geometric_terms = geo.terms;
    auto sp = spectral_side(m, n, weight_from(phi, r.delta, opt.spec), ds, opt.spectral, opt.spec);
    r.spectral_side = sp.value();
    r.contributions = sp.terms;
    r.continuous_term = sp.continuous;
    r.discrete_series_present = sp.discrete_series_present;
    r.truncation = {sp.num_forms, ell_max, opt.spectral.nu_cutoff > 0.0 ? opt.spectral.nu_cutoff : ds.complete_kappa(),
                    sp.continuous_cutoff};
    r.truncation_budget = sp.truncation + sp.continuous_tail;
    r.quadrature_budget = sp.discrete_error + sp.continuous_error;
    double d = std::abs(r.spectral_side - r.geometric_side);
    r.residual = d / (1.0 + std::abs(r.geometric_side));
    r.relative_error = std::abs(r.geometric_side) > 0.0 ? d / std::abs(r.geometric_side) : d;
    return r;
}

// ---------------------------------------------------------------- fourth-moment kernel

struct XiResult {
    cplx value = 0.0;
    double error = 0.0;
    double tail = 0.0;
};

namespace detail {

inline void require_xi(double u, cplx nu) {
    if (!(u > 0.0) || !std::isfinite(u)) throw precondition_error("xi_kernel: u must be positive");
    if (!(std::abs(nu.real()) < 0.5)) throw precondition_error("xi_kernel: needs |Re nu| < 1/2");
}

} // namespace detail

// Xi(u; nu) = int_{R^x} j_0(-v) j_nu(v / u) d^x v / sqrt|v|. With v = +-w^2 and w = e^t the integrand is
// 2 e^{-t} [j_0(-w^2) j_nu(w^2/u) + j_0(w^2) j_nu(-w^2/u)], exponentially small for large w
// and of size w^{1 - 2|Re nu|} (up to logarithms) near 0.
inline XiResult xi_kernel(double u, cplx nu, const QuadratureSpec& spec = {}) {
    spec.validate();
    detail::require_xi(u, nu);
    double eps = std::max(1e-17, 1e-3 * spec.abs_tol);
    double expo = 1.0 - 2.0 * std::abs(nu.real());
    double t_lo = std::log(eps) / expo - 4.0;
    double w_hi = (-std::log(eps) + 6.0) / (4.0 * pi * std::min(1.0, 1.0 / std::sqrt(u)));
    double t_hi = std::log(w_hi);
    auto g = [&](double t) -> cplx {
        double w = std::exp(t), w2 = w * w;
        return 2.0 * std::exp(-t) *
               (bessel_kernel(0.0, -w2) * bessel_kernel(nu, w2 / u) + bessel_kernel(0.0, w2) * bessel_kernel(nu, -w2 / u));
    };
    std::vector<double> br;
    for (double t = std::ceil(t_lo) ; t < std::min(0.0, t_hi); t += 1.0) br.push_back(t);
    for (double w = 1.0; w < w_hi; w += 0.25) br.push_back(std::log(w));
    std::sort(br.begin(), br.end());
    br.erase(std::remove_if(br.begin(), br.end(), [&](double t) { return t <= t_lo || t >= t_hi; }), br.end());
    auto r = integrate_gk(g, t_lo, t_hi, spec, br);
    XiResult out;
    out.value = r.value;
    out.error = r.error;
    out.tail = std::abs(g(t_lo)) * (1.0 + std::abs(t_lo)) / expo;
    return out;
}

// Mellin route: pair the Mellin transforms of the two Bessel kernels,
//   int_0^inf j_nu(u) u^{s-3/2} du = F_nu(s) cos(pi s),  int_0^inf j_nu(-u) u^{s-3/2} du = F_nu(s) cos(pi nu),
// F_nu(s) = 2^{1-2s} pi^{-2s} Gamma(s+nu) Gamma(s-nu). Each line integrand decays like exp(-pi |t|).
inline XiResult xi_kernel_mellin(double u, cplx nu, const QuadratureSpec& spec = {}) {
    spec.validate();
    detail::require_xi(u, nu);
    double a = std::abs(nu.real());
    double b1 = 0.5 * (a + 0.25);                  // |Re nu| < b1 < 1/4
    double b2 = 0.5 * (std::max(0.25, a) + 0.5);   // max(1/4, |Re nu|) < b2 < 1/2
    double L = std::log(u);
    cplx cn = cospi(nu);
    auto pplus = [&](double t) -> cplx {
        cplx s(b1, t);
        return detail::mellin_pair_factor(s, nu) * cospi(s) * detail::mellin_pair_factor(0.5 - s, 0.0) *
               std::exp((s - 0.5) * L);
    };
    auto pminus = [&](double t) -> cplx {
        cplx s(b2, t);
        return detail::mellin_pair_factor(s, nu) * cn * detail::mellin_pair_factor(0.5 - s, 0.0) * sinpi(s) *
               std::exp((s - 0.5) * L);
    };
    double eps = std::max(1e-17, 1e-3 * spec.abs_tol);
    double T = (-std::log(eps) + 4.0) / pi + 2.0 * std::abs(nu.imag()) + std::abs(L) / pi;
    auto br = detail::unit_breaks(-T, T, 1.0);
    auto r1 = integrate_gk(pplus, -T, T, spec, br);
    auto r2 = integrate_gk(pminus, -T, T, spec, br);
    XiResult out;
    out.value = (r1.value + r2.value) / (2.0 * pi);
    out.error = (r1.error + r2.error) / (2.0 * pi);
    out.tail = (std::abs(pplus(T)) + std::abs(pplus(-T)) + std::abs(pminus(T)) + std::abs(pminus(-T))) / (2.0 * pi * pi);
    return out;
}

} // namespace psl2
