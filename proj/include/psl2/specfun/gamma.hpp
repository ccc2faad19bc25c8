// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>

#include "../error.hpp"
#include "complex.hpp"

namespace psl2 {

namespace detail {

// B_{2k} for k = 1..10
inline constexpr std::array<double, 10> bernoulli2k = {
    1.0 / 6.0,     -1.0 / 30.0,  1.0 / 42.0,        -1.0 / 30.0,     5.0 / 66.0,
    -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0, 43867.0 / 798.0, -174611.0 / 330.0};

inline constexpr double stirling_radius = 15.0;

// Stirling series, |z| >= stirling_radius and Re z > 0 assumed.
inline cplx log_gamma_stirling(cplx z) {
    cplx zinv = 1.0 / z, z2inv = zinv * zinv;
    cplx acc = 0.0, p = zinv;
    for (int k = 1; k <= 10; ++k) {
        acc += bernoulli2k[k - 1] / (2.0 * k * (2.0 * k - 1.0)) * p;
        p *= z2inv;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * pi) + acc;
}

// log Gamma for Re z >= 1/2 via upward shift
inline cplx log_gamma_right(cplx z) {
    cplx shift = 0.0;
    while (std::abs(z) < stirling_radius || z.real() < 1.0) {
        shift += std::log(z);
        z += 1.0;
    }
    return log_gamma_stirling(z) - shift;
}

} // namespace detail

// A logarithm of Gamma(z). The imaginary part is not reduced to the principal branch.
inline cplx log_gamma(cplx z) {
    if (is_nonpositive_integer(z)) throw pole_error("gamma: pole at non-positive integer");
    if (z.real() >= 0.5) return detail::log_gamma_right(z);
    return std::log(pi) - log_sinpi(z) - detail::log_gamma_right(1.0 - z);
}

inline cplx gamma(cplx z) {
    if (z.imag() == 0.0 && z.real() > 0.0 && z.real() < 171.0 && z.real() == std::floor(z.real())) {
        double f = 1.0;
        for (int k = 2; k < static_cast<int>(z.real()); ++k) f *= k;
        return f;
    }
    return std::exp(log_gamma(z));
}

// 1/Gamma(z), entire; zero at the poles of Gamma.
inline cplx rgamma(cplx z) {
    if (is_nonpositive_integer(z)) return 0.0;
    return std::exp(-log_gamma(z));
}

inline cplx digamma(cplx z) {
    if (is_nonpositive_integer(z)) throw pole_error("digamma: pole at non-positive integer");
    cplx refl = 0.0;
    if (z.real() < 0.5) {
        cplx cot = std::abs(z.imag()) > 20.0 ? cplx(0.0, z.imag() > 0 ? -1.0 : 1.0)
                                             : cospi(z) / sinpi(z);
        refl = -pi * cot;
        z = 1.0 - z;
    }
    cplx shift = 0.0;
    while (std::abs(z) < detail::stirling_radius || z.real() < 1.0) {
        shift -= 1.0 / z;
        z += 1.0;
    }
    cplx zinv = 1.0 / z, z2inv = zinv * zinv, p = z2inv, acc = 0.0;
    for (int k = 1; k <= 10; ++k) {
        acc += detail::bernoulli2k[k - 1] / (2.0 * k) * p;
        p *= z2inv;
    }
    return std::log(z) - 0.5 * zinv - acc + shift + refl;
}

} // namespace psl2
