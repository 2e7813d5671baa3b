#pragma once

#include <stdexcept>
#include <string>

namespace parseries {

/// Raised when an argument lies outside the domain of an operation
/// (|beta| >= 1, non-PD matrices, rank-deficient designs, bad dimensions).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a likelihood is numerically or statistically degenerate:
/// non-positive quadratic forms, singular Y'WY, or a likelihood that is
/// constant in beta.
class degenerate_likelihood : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files or option values.
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace parseries
