#pragma once

#include <stdexcept>
#include <string>

namespace levy_pri {

/// A numerical test could not reach a verdict (grid too coarse, budget spent,
/// boundary case). Never silently replaced by a guess.
class IndeterminateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was called outside the situation it is defined for.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A tabulated function was asked for a value outside its grid.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A configuration document is malformed, has unknown keys or bad values.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Simulation work would exceed the configured budget.
class BudgetError : public std::runtime_error {
public:
    BudgetError(const std::string& what, double suggested_epsilon = 0.0)
        : std::runtime_error(what), suggested_epsilon_(suggested_epsilon) {}

    double suggested_epsilon() const noexcept { return suggested_epsilon_; }

private:
    double suggested_epsilon_;
};

}  // namespace levy_pri
