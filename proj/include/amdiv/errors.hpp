#pragma once

#include <stdexcept>
#include <string>

namespace amdiv {

// Invalid user input: bad config keys, malformed values, broken invariants.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation, or a degenerate transform.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure failed: no bracket, no convergence, non-finite value.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace amdiv
