// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <variant>

#include "error.hpp"
#include "specfun/complex.hpp"

namespace psl2 {

// Determinant tolerance accepted before rescaling to det = 1.
inline constexpr double tol_det = 1e-10;
// |c| at or below tol_cell * max|entry| is read as c = 0 in the Bruhat split.
inline constexpr double tol_cell = 1e-12;

// Element of PSL(2,R). Stored with unit determinant and a canonical sign:
// the first nonzero entry in the scan order (c, d, a, b) is positive.
class GroupElement {
public:
    GroupElement() = default;

    static GroupElement make(double a, double b, double c, double d) {
        double det = a * d - b * c;
        if (!std::isfinite(det) || std::abs(det - 1.0) >= tol_det)
            throw precondition_error("GroupElement: determinant must be 1");
        double s = 1.0 / std::sqrt(det);
        GroupElement g;
        g.a_ = a * s;
        g.b_ = b * s;
        g.c_ = c * s;
        g.d_ = d * s;
        g.canonicalize();
        return g;
    }

    static GroupElement identity() { return make(1, 0, 0, 1); }
    static GroupElement weyl() { return make(0, 1, -1, 0); }
    static GroupElement n(double x) { return make(1, x, 0, 1); }
    static GroupElement a(double y) {
        if (!(y > 0.0)) throw precondition_error("a[y]: y must be positive");
        double r = std::sqrt(y);
        return make(r, 0, 0, 1.0 / r);
    }
    static GroupElement k(double theta) {
        double c = std::cos(theta), s = std::sin(theta);
        return make(c, s, -s, c);
    }

    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }
    double d() const { return d_; }
    double norm() const { return std::max({std::abs(a_), std::abs(b_), std::abs(c_), std::abs(d_)}); }

    GroupElement operator*(const GroupElement& h) const {
        GroupElement g;
        g.a_ = a_ * h.a_ + b_ * h.c_;
        g.b_ = a_ * h.b_ + b_ * h.d_;
        g.c_ = c_ * h.a_ + d_ * h.c_;
        g.d_ = c_ * h.b_ + d_ * h.d_;
        g.canonicalize();
        return g;
    }

    GroupElement inverse() const {
        GroupElement g;
        g.a_ = d_;
        g.b_ = -b_;
        g.c_ = -c_;
        g.d_ = a_;
        g.canonicalize();
        return g;
    }

    // max-entry distance to h, minimized over the sign ambiguity
    double distance(const GroupElement& h) const {
        auto dist = [&](double s) {
            return std::max({std::abs(a_ - s * h.a_), std::abs(b_ - s * h.b_), std::abs(c_ - s * h.c_),
                             std::abs(d_ - s * h.d_)});
        };
        return std::min(dist(1.0), dist(-1.0));
    }

private:
    void canonicalize() {
        for (double v : {c_, d_, a_, b_}) {
            if (v == 0.0) continue;
            if (v < 0.0) {
                a_ = -a_;
                b_ = -b_;
                c_ = -c_;
                d_ = -d_;
            }
            return;
        }
    }

    double a_ = 1.0, b_ = 0.0, c_ = 0.0, d_ = 1.0;
};

// theta reduced to [0, pi)
inline double reduce_theta(double theta) {
    double t = std::fmod(theta, pi);
    if (t < 0.0) t += pi;
    if (t >= pi) t = 0.0;
    return t;
}

struct IwasawaCoords {
    double x = 0.0;
    double y = 1.0;
    double theta = 0.0;

    static IwasawaCoords make(double x, double y, double theta) {
        if (!(y > 0.0)) throw precondition_error("IwasawaCoords: y must be positive");
        return {x, y, reduce_theta(theta)};
    }
};

inline IwasawaCoords iwasawa_decompose(const GroupElement& g) {
    double a = g.a(), b = g.b(), c = g.c(), d = g.d();
    double r2 = c * c + d * d;
    return IwasawaCoords::make((a * c + b * d) / r2, 1.0 / r2, std::atan2(-c, d));
}

// n[x] a[y] k[theta]
inline GroupElement compose(const IwasawaCoords& z) {
    if (!(z.y > 0.0)) throw precondition_error("compose: y must be positive");
    double r = std::sqrt(z.y), co = std::cos(z.theta), si = std::sin(z.theta);
    return GroupElement::make(r * co - z.x / r * si, r * si + z.x / r * co, -si / r, co / r);
}

// g n[x] a[y] k[theta] in coordinates; arg of j(g, z) taken principal.
inline IwasawaCoords left_action(const GroupElement& g, const IwasawaCoords& z) {
    double a = g.a(), b = g.b(), c = g.c(), d = g.d();
    double cy = c * z.y, cxd = c * z.x + d;
    double den = cy * cy + cxd * cxd;
    double x1 = (a * c * z.y * z.y + (a * z.x + b) * cxd) / den;
    double y1 = z.y / den;
    double vartheta = -std::arg(cplx(cxd, cy));
    return IwasawaCoords::make(x1, y1, z.theta + vartheta);
}

struct SmallCell {
    double x;  // n[x] a[u]
    double u;
};
struct BigCell {
    double x1;  // n[x1] w n[x2] a[u]
    double x2;
    double u;
};
using BruhatForm = std::variant<SmallCell, BigCell>;

inline BruhatForm bruhat_decompose(const GroupElement& g) {
    double a = g.a(), b = g.b(), c = g.c(), d = g.d();
    if (std::abs(c) <= tol_cell * g.norm()) return SmallCell{a * b, a * a};
    return BigCell{a / c, c * d, c * c};
}

inline GroupElement reassemble(const BruhatForm& f) {
    if (auto s = std::get_if<SmallCell>(&f)) return GroupElement::n(s->x) * GroupElement::a(s->u);
    const auto& bc = std::get<BigCell>(f);
    return GroupElement::n(bc.x1) * GroupElement::weyl() * GroupElement::n(bc.x2) * GroupElement::a(bc.u);
}

// density of dg against dx dy dtheta
inline double haar_density(const IwasawaCoords& z) {
    if (!(z.y > 0.0)) throw precondition_error("haar_density: y must be positive");
    return 1.0 / (z.y * z.y);
}

// Random element from n[x] a[y] k[theta] with x ~ U(-2,2), log y ~ U(-2,2), theta ~ U(0,pi).
inline GroupElement random_element(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(-2.0, 2.0), ul(-2.0, 2.0), ut(0.0, pi);
    double x = ux(rng), y = std::exp(ul(rng)), t = ut(rng);
    return compose(IwasawaCoords::make(x, y, t));
}

} // namespace psl2
