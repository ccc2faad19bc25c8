// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace psl2 {

// Argument at a pole of the function being evaluated.
class pole_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Argument outside the documented evaluation envelope.
class range_error : public std::range_error {
public:
    using std::range_error::range_error;
};

// Precondition violated by the caller.
class precondition_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Iterative scheme stopped before the requested tolerance.
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, double attained)
        : std::runtime_error(what + " (attained " + std::to_string(attained) + ")"),
          attained_(attained) {}
    double attained() const noexcept { return attained_; }

private:
    double attained_;
};

// Malformed or inconsistent input data.
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace psl2
