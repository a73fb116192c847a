#pragma once

#include <stdexcept>
#include <string>

namespace lowrank {

/// Thrown when a query-counting oracle runs out of its configured budget.
class BudgetExceededError : public std::runtime_error {
public:
    explicit BudgetExceededError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a subsampled basis is numerically rank deficient and a
/// least-squares reconstruction through it would be meaningless.
class SingularSystemError : public std::runtime_error {
public:
    explicit SingularSystemError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when the input carries no usable signal (e.g. an all-zero matrix
/// where a sampling distribution over columns is required).
class DegenerateInputError : public std::invalid_argument {
public:
    explicit DegenerateInputError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace lowrank
