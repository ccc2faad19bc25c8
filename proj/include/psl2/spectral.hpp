// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "error.hpp"
#include "specfun/complex.hpp"

namespace psl2 {

// Lower bounds for PSL(2,Z): the first Maass eigenvalue and the first cusp-form weight 2k.
inline constexpr double kappa_lower_bound = 3.815;
inline constexpr int holomorphic_k_min = 6;

// nu = i kappa (unitary principal series) or nu = k - 1/2 (discrete series D_k).
struct SpectralParam {
    enum class Kind { principal, discrete };
    Kind kind = Kind::principal;
    double kappa = 0.0;
    int k = 0;

    static SpectralParam principal(double kappa) { return {Kind::principal, kappa, 0}; }
    static SpectralParam discrete(int k) {
        if (k < 1) throw precondition_error("SpectralParam: discrete k must be >= 1");
        return {Kind::discrete, 0.0, k};
    }

    bool is_discrete() const { return kind == Kind::discrete; }
    cplx nu() const { return is_discrete() ? cplx(k - 0.5, 0.0) : cplx(0.0, kappa); }

    // Range of parameters that occur for PSL(2,Z).
    void validate_for_dataset() const {
        if (is_discrete() && k < holomorphic_k_min)
            throw precondition_error("SpectralParam: no cusp forms of weight below 12");
        if (!is_discrete() && !(std::abs(kappa) > kappa_lower_bound))
            throw precondition_error("SpectralParam: principal kappa must exceed 3.815");
    }
};

} // namespace psl2
