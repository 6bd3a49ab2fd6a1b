#pragma once

#include <stdexcept>
#include <string>

namespace entropg {

/// Raised for malformed inputs: non-finite logits, zero-probability actions
/// under positive regularization, mismatched shapes, bad configuration values.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative solver hit its iteration cap before reaching the tolerance.
class ConvergenceFailure : public std::runtime_error {
public:
    ConvergenceFailure(const std::string& what, double last_residual)
        : std::runtime_error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// A run would exceed (or has exceeded) its environment-step budget.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace entropg
