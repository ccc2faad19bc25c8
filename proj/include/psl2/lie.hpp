// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "group.hpp"
#include "specfun/complex.hpp"

namespace psl2 {

// Smooth function on G in Iwasawa coordinates, pi-periodic in theta.
struct JetFunction {
    std::function<cplx(double x, double y, double theta)> evaluator;
    int smoothness_hint = 4;
    double scale_hint = 1.0;

    cplx operator()(double x, double y, double theta) const { return evaluator(x, y, theta); }
    cplx operator()(const IwasawaCoords& z) const { return evaluator(z.x, z.y, z.theta); }

    // max |f(x,y,theta+pi) - f(x,y,theta)| over a fixed sample
    double periodicity_defect() const {
        double worst = 0.0;
        for (double x : {-0.7, 0.1, 1.3})
            for (double y : {0.4, 1.0, 2.5})
                for (double t : {0.0, 0.6, 2.1}) {
                    cplx v = evaluator(x, y, t);
                    worst = std::max(worst, std::abs(evaluator(x, y, t + pi) - v) / (1.0 + std::abs(v)));
                }
        return worst;
    }
};

enum class LieOperator { X1, X2, X3, W, Eplus, Eminus, Casimir };

inline const char* to_string(LieOperator op) {
    switch (op) {
        case LieOperator::X1: return "X1";
        case LieOperator::X2: return "X2";
        case LieOperator::X3: return "X3";
        case LieOperator::W: return "W";
        case LieOperator::Eplus: return "Eplus";
        case LieOperator::Eminus: return "Eminus";
        case LieOperator::Casimir: return "Casimir";
    }
    return "?";
}

struct FiniteDifferenceSpec {
    double step = 1e-4;  // multiplied by the function's scale_hint
    int order = 4;
    bool richardson = false;

    void validate() const {
        if (!(step >= 1e-8 && step <= 1e-1)) throw precondition_error("FiniteDifferenceSpec: step outside [1e-8, 1e-1]");
        if (order != 2 && order != 4) throw precondition_error("FiniteDifferenceSpec: order must be 2 or 4");
    }
};

namespace detail {

// first derivative of a scalar function by a central stencil
template <class G>
cplx central1(G&& g, double h, int order) {
    if (order == 2) return (g(h) - g(-h)) / (2.0 * h);
    return (8.0 * (g(h) - g(-h)) - (g(2.0 * h) - g(-2.0 * h))) / (12.0 * h);
}

template <class G>
cplx central2(G&& g, double h, int order) {
    if (order == 2) return (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h);
    return (-(g(2.0 * h) + g(-2.0 * h)) + 16.0 * (g(h) + g(-h)) - 30.0 * g(0.0)) / (12.0 * h * h);
}

template <class G>
cplx diff1(G&& g, double h, const FiniteDifferenceSpec& fd) {
    cplx d = central1(g, h, fd.order);
    if (!fd.richardson) return d;
    cplx d2 = central1(g, 0.5 * h, fd.order);
    double r = std::pow(2.0, fd.order);
    return (r * d2 - d) / (r - 1.0);
}

template <class G>
cplx diff2(G&& g, double h, const FiniteDifferenceSpec& fd) {
    cplx d = central2(g, h, fd.order);
    if (!fd.richardson) return d;
    cplx d2 = central2(g, 0.5 * h, fd.order);
    double r = std::pow(2.0, fd.order);
    return (r * d2 - d) / (r - 1.0);
}

inline void require_order(const JetFunction& f, int k) {
    if (k > f.smoothness_hint)
        throw precondition_error("lie: derivative order " + std::to_string(k) + " exceeds smoothness_hint");
}

// coordinate partials; steps in y are relative to y
struct partials {
    cplx f, fx, fy, ft;
};

inline partials first_partials(const JetFunction& f, const IwasawaCoords& z, const FiniteDifferenceSpec& fd) {
    double h = fd.step * f.scale_hint, hy = h * z.y;
    partials p;
    p.f = f(z);
    p.fx = diff1([&](double s) { return f(z.x + s, z.y, z.theta); }, h, fd);
    p.fy = diff1([&](double s) { return f(z.x, z.y + s, z.theta); }, hy, fd);
    p.ft = diff1([&](double s) { return f(z.x, z.y, z.theta + s); }, h, fd);
    return p;
}

} // namespace detail

// Coefficients (c_x, c_y, c_theta) of the first-order operators in (x, y, theta).
inline std::array<cplx, 3> operator_coefficients(LieOperator op, const IwasawaCoords& z) {
    double y = z.y, s2 = std::sin(2.0 * z.theta), c2 = std::cos(2.0 * z.theta), s = std::sin(z.theta);
    switch (op) {
        case LieOperator::X1: return {y * c2, y * s2, s * s};
        case LieOperator::X2: return {-2.0 * y * s2, 2.0 * y * c2, s2};
        case LieOperator::X3:
        case LieOperator::W: return {0.0, 0.0, 1.0};
        case LieOperator::Eplus: {
            cplx e = std::exp(cplx(0.0, 2.0 * z.theta));
            return {e * 2.0 * I * y, e * 2.0 * y, -e * I};
        }
        case LieOperator::Eminus: {
            cplx e = std::exp(cplx(0.0, -2.0 * z.theta));
            return {-e * 2.0 * I * y, e * 2.0 * y, e * I};
        }
        case LieOperator::Casimir: break;
    }
    throw precondition_error("operator_coefficients: Casimir is second order");
}

// Omega = -y^2 (d_x^2 + d_y^2) + y d_x d_theta
inline cplx casimir_coordinate(const JetFunction& f, const IwasawaCoords& z, const FiniteDifferenceSpec& fd) {
    detail::require_order(f, 2);
    double h = fd.step * f.scale_hint, hy = h * z.y;
    cplx fxx = detail::diff2([&](double s) { return f(z.x + s, z.y, z.theta); }, h, fd);
    cplx fyy = detail::diff2([&](double s) { return f(z.x, z.y + s, z.theta); }, hy, fd);
    // mixed partial as a derivative in x of the theta-derivative
    cplx fxt = detail::diff1(
        [&](double s) {
            return detail::diff1([&](double t) { return f(z.x + s, z.y, z.theta + t); }, h, fd);
        },
        h, fd);
    return -z.y * z.y * (fxx + fyy) + z.y * fxt;
}

inline cplx apply(LieOperator op, const JetFunction& f, const IwasawaCoords& at, const FiniteDifferenceSpec& fd = {}) {
    fd.validate();
    if (!(at.y > 0.0)) throw precondition_error("apply: y must be positive");
    if (op == LieOperator::Casimir) return casimir_coordinate(f, at, fd);
    detail::require_order(f, 1);
    auto p = detail::first_partials(f, at, fd);
    auto c = operator_coefficients(op, at);
    return c[0] * p.fx + c[1] * p.fy + c[2] * p.ft;
}

// The function z -> (op f)(z), as a JetFunction of one lower smoothness.
inline JetFunction applied(LieOperator op, const JetFunction& f, const FiniteDifferenceSpec& fd) {
    JetFunction g;
    int cost = op == LieOperator::Casimir ? 2 : 1;
    g.smoothness_hint = f.smoothness_hint - cost;
    g.scale_hint = f.scale_hint;
    g.evaluator = [op, f, fd](double x, double y, double t) {
        return apply(op, f, IwasawaCoords{x, y, t}, fd);
    };
    return g;
}

// d/dt f(g exp(X_j t)) at t = 0, with exp(X1 t) = n[t], exp(X2 t) = a[e^{2t}], exp(X3 t) = k[t].
inline cplx apply_by_right_translation(int j, const JetFunction& f, const GroupElement& g,
                                       const FiniteDifferenceSpec& fd = {}) {
    fd.validate();
    detail::require_order(f, 1);
    auto curve = [&](double t) {
        switch (j) {
            case 1: return GroupElement::n(t);
            case 2: return GroupElement::a(std::exp(2.0 * t));
            case 3: return GroupElement::k(t);
        }
        throw precondition_error("apply_by_right_translation: j must be 1, 2 or 3");
    };
    if (j < 1 || j > 3) throw precondition_error("apply_by_right_translation: j must be 1, 2 or 3");
    double h = fd.step * f.scale_hint;
    return detail::diff1([&](double t) { return f(iwasawa_decompose(g * curve(t))); }, h, fd);
}

// Expected commutator [i, j] as a combination of first-order operators.
using OperatorCombination = std::vector<std::pair<cplx, LieOperator>>;

inline std::optional<OperatorCombination> expected_commutator(LieOperator i, LieOperator j) {
    using L = LieOperator;
    auto canon = [](L o) { return o == L::W ? L::X3 : o; };
    L a = canon(i), b = canon(j);
    if (a == b) return OperatorCombination{};
    if (a == L::Casimir || b == L::Casimir) return OperatorCombination{};  // central
    struct entry {
        L a, b;
        OperatorCombination value;
    };
    static const std::vector<entry> table = {
        {L::X1, L::X2, {{-2.0, L::X1}}},
        {L::X1, L::X3, {{-1.0, L::X2}}},
        {L::X2, L::X3, {{4.0, L::X1}, {-2.0, L::X3}}},
        {L::X3, L::Eplus, {{2.0 * I, L::Eplus}}},
        {L::X3, L::Eminus, {{-2.0 * I, L::Eminus}}},
        {L::Eplus, L::Eminus, {{-4.0 * I, L::X3}}},
    };
    for (const auto& e : table) {
        if (e.a == a && e.b == b) return e.value;
        if (e.a == b && e.b == a) {
            OperatorCombination neg = e.value;
            for (auto& t : neg) t.first = -t.first;
            return neg;
        }
    }
    return std::nullopt;
}

// |([i,j] - expected) f(at)| / (1 + |f(at)|), the commutator by nested application.
inline double commutator_residual(LieOperator i, LieOperator j, const JetFunction& f, const IwasawaCoords& at,
                                  const FiniteDifferenceSpec& fd = {}) {
    fd.validate();
    auto expected = expected_commutator(i, j);
    if (!expected) throw precondition_error("commutator_residual: pair not tabulated");
    int need = (i == LieOperator::Casimir ? 2 : 1) + (j == LieOperator::Casimir ? 2 : 1);
    detail::require_order(f, need);
    cplx ij = apply(i, applied(j, f, fd), at, fd);
    cplx ji = apply(j, applied(i, f, fd), at, fd);
    cplx rhs = 0.0;
    for (const auto& [c, op] : *expected) rhs += c * apply(op, f, at, fd);
    return std::abs(ij - ji - rhs) / (1.0 + std::abs(f(at)));
}

// Casimir in the three forms: x-basis, Maass-operator form, coordinate form.
struct CasimirForms {
    cplx x_basis, maass, coordinate;
    double max_discrepancy() const {
        return std::max({std::abs(x_basis - maass), std::abs(x_basis - coordinate), std::abs(maass - coordinate)});
    }
};

inline CasimirForms casimir_forms(const JetFunction& f, const IwasawaCoords& at, const FiniteDifferenceSpec& fd = {}) {
    fd.validate();
    detail::require_order(f, 2);
    using L = LieOperator;
    auto nested = [&](L a, L b) { return apply(a, applied(b, f, fd), at, fd); };
    CasimirForms out;
    out.x_basis = -nested(L::X1, L::X1) - 0.25 * nested(L::X2, L::X2) + 0.5 * nested(L::X1, L::X3) +
                  0.5 * nested(L::X3, L::X1);
    out.maass = -0.25 * nested(L::Eplus, L::Eminus) + 0.25 * nested(L::W, L::W) - 0.5 * I * apply(L::W, f, at, fd);
    out.coordinate = casimir_coordinate(f, at, fd);
    return out;
}

inline double casimir_consistency(const JetFunction& f, const IwasawaCoords& at, const FiniteDifferenceSpec& fd = {}) {
    return casimir_forms(f, at, fd).max_discrepancy() / (1.0 + std::abs(f(at)));
}

// Fixed family of test functions: Gaussian in log y, sinusoid in x, e^{2ip theta}.
struct TestFunctionParams {
    double y0, width, freq, phase;
    int p;
};

inline JetFunction make_test_function(const TestFunctionParams& q) {
    JetFunction f;
    f.smoothness_hint = 8;
    f.scale_hint = 1.0;
    f.evaluator = [q](double x, double y, double t) {
        double l = std::log(y / q.y0) / q.width;
        return std::exp(-l * l) * std::cos(q.freq * x + q.phase) * std::exp(cplx(0.0, 2.0 * q.p * t));
    };
    return f;
}

inline TestFunctionParams random_test_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TestFunctionParams q;
    q.y0 = std::exp(2.0 * u(rng) - 1.0);
    q.width = 0.7 + 1.3 * u(rng);
    q.freq = 0.5 + 2.5 * u(rng);
    q.phase = 2.0 * pi * u(rng);
    q.p = static_cast<int>(std::floor(7.0 * u(rng))) - 3;
    return q;
}

// phi_p(g; nu) = y^{nu + 1/2} e^{2 p i theta}
inline JetFunction phi_function(int p, cplx nu) {
    JetFunction f;
    f.smoothness_hint = 8;
    f.evaluator = [p, nu](double, double y, double t) {
        return std::exp((nu + 0.5) * std::log(y)) * std::exp(cplx(0.0, 2.0 * p * t));
    };
    return f;
}

} // namespace psl2
