#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

// Input outside the physical or tabulated range of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed or inconsistent configuration (bad key, unit, value).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical routine failed: no root, non-Hermitian kernel, bad fit...
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace spdc
