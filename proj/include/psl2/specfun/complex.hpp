// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace psl2 {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// sin(pi x) with exact zeros at integers.
inline double sinpi(double x) {
    double r = std::fmod(x, 2.0);
    if (r < -1.0) r += 2.0;
    if (r > 1.0) r -= 2.0;
    if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
    if (r > 0.5) r = 1.0 - r;
    if (r < -0.5) r = -1.0 - r;
    return std::sin(pi * r);
}

// cos(pi x) with exact zeros at half-integers.
inline double cospi(double x) { return sinpi(x + 0.5); }

inline cplx sinpi(cplx z) {
    double y = pi * z.imag();
    return {sinpi(z.real()) * std::cosh(y), cospi(z.real()) * std::sinh(y)};
}

inline cplx cospi(cplx z) {
    double y = pi * z.imag();
    return {cospi(z.real()) * std::cosh(y), -sinpi(z.real()) * std::sinh(y)};
}

// log sin(pi z), stable for large |Im z|.
inline cplx log_sinpi(cplx z) {
    double y = z.imag();
    if (std::abs(y) < 10.0) return std::log(sinpi(z));
    // one of the two exponentials in sin(pi z) dominates
    double s = y > 0 ? 1.0 : -1.0;
    cplx dom = -s * I * pi * z;
    cplx rest = 1.0 - std::exp(2.0 * s * I * pi * z);
    return dom + std::log(rest) + std::log(cplx(0.0, 0.5 * s));
}

// additive character e(x) = exp(2 pi i x)
inline cplx e(double x) {
    double r = x - std::floor(x);
    return {std::cos(2.0 * pi * r), std::sin(2.0 * pi * r)};
}

inline bool is_nonpositive_integer(cplx z) {
    return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

} // namespace psl2
