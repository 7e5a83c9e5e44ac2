#pragma once

#include <stdexcept>
#include <string>

namespace cylab {

/// Base class for every error raised by the laboratory.
class LabError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied data failed.
class InvalidInput : public LabError {
public:
    using LabError::LabError;
};

/// A constructed object violates one of its defining invariants.
class InvariantViolation : public LabError {
public:
    using LabError::LabError;
};

/// The propagator integration could not reach the requested accuracy.
class IntegrationFailure : public LabError {
public:
    IntegrationFailure(const std::string& what, double position)
        : LabError(what + " (at x = " + std::to_string(position) + ")"), position_(position) {}
    double position() const noexcept { return position_; }

private:
    double position_;
};

/// Transfer-matrix and discretization eigenvalue counts disagree.
class CompletenessFailure : public LabError {
public:
    CompletenessFailure(const std::string& what, double lo, double hi)
        : LabError(what + " on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"),
          lo_(lo), hi_(hi) {}
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

private:
    double lo_, hi_;
};

/// A parameter grid is too coarse to produce a trustworthy integer.
class RefinementRequired : public LabError {
public:
    using LabError::LabError;
};

}  // namespace cylab
