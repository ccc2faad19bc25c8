// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "../error.hpp"
#include "complex.hpp"
#include "gamma.hpp"
#include "summation.hpp"

namespace psl2 {

namespace detail {

// Borwein's alternating-series acceleration of eta(s) = (1 - 2^{1-s}) zeta(s), Re s >= 0.
inline cplx zeta_borwein(cplx s) {
    int n = 40 + static_cast<int>(std::ceil(1.3 * std::abs(s.imag())));
    // d_k = n sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!), built by term ratios
    std::vector<double> d(n + 1);
    double term = 1.0 / n, acc = term;  // i = 0 term is (n-1)!/n! = 1/n
    d[0] = n * acc;
    for (int i = 1; i <= n; ++i) {
        term *= 4.0 * (n + i - 1.0) * (n - i + 1.0) / ((2.0 * i - 1.0) * (2.0 * i));
        acc += term;
        d[i] = n * acc;
    }
    kahan_csum sum;
    for (int k = 0; k < n; ++k) {
        cplx t = (d[k] - d[n]) * std::exp(-s * std::log(k + 1.0));
        sum.add(k % 2 ? -t : t);
    }
    cplx eta = -sum.value() / d[n];
    cplx den = 1.0 - std::exp((1.0 - s) * std::log(2.0));
    return eta / den;
}

// Euler-Maclaurin summation with N terms and M correction pairs.
inline cplx zeta_euler_maclaurin(cplx s, int N = 0, int M = 10) {
    if (N <= 0) N = 30 + static_cast<int>(std::ceil(std::abs(s)));
    kahan_csum sum;
    for (int k = 1; k < N; ++k) sum.add(std::exp(-s * std::log(static_cast<double>(k))));
    double lN = std::log(static_cast<double>(N));
    cplx Ns = std::exp(-s * lN);
    sum.add(Ns * static_cast<double>(N) / (s - 1.0));
    sum.add(0.5 * Ns);
    // B_{2j}/(2j)! s(s+1)...(s+2j-2) N^{-s-2j+1}
    cplx poch = s;
    cplx pw = Ns / static_cast<double>(N);
    double fact = 2.0;
    for (int j = 1; j <= M && j <= 10; ++j) {
        sum.add(bernoulli2k[j - 1] / fact * poch * pw);
        poch *= (s + (2.0 * j - 1.0)) * (s + 2.0 * j);
        pw /= static_cast<double>(N) * N;
        fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    }
    return sum.value();
}

inline cplx zeta_right(cplx s) {
    if (std::abs(s.imag()) <= 50.0) return zeta_borwein(s);
    return zeta_euler_maclaurin(s);
}

} // namespace detail

// Riemann zeta; Borwein on |Im s| <= 50, Euler-Maclaurin beyond, reflection for Re s < 0.
inline cplx zeta(cplx s) {
    if (s == cplx(1.0, 0.0)) throw pole_error("zeta: pole at s = 1");
    if (s.real() >= 0.0) return detail::zeta_right(s);
    // zeta(s) = 2^s pi^{s-1} sin(pi s / 2) Gamma(1-s) zeta(1-s)
    if (is_nonpositive_integer(0.5 * s)) return 0.0;  // trivial zeros
    cplx l = s * std::log(2.0) + (s - 1.0) * std::log(pi) + log_sinpi(0.5 * s) + log_gamma(1.0 - s);
    return std::exp(l) * detail::zeta_right(1.0 - s);
}

// sigma_a(n) = sum_{d | n} d^a
inline cplx sigma(cplx a, std::int64_t n) {
    if (n < 1) throw precondition_error("sigma: n must be >= 1");
    kahan_csum sum;
    for (std::int64_t d = 1; d * d <= n; ++d) {
        if (n % d) continue;
        sum.add(std::exp(a * std::log(static_cast<double>(d))));
        std::int64_t e = n / d;
        if (e != d) sum.add(std::exp(a * std::log(static_cast<double>(e))));
    }
    return sum.value();
}

} // namespace psl2
