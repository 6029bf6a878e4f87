#ifndef NSINFLOW_ERRORS_HPP
#define NSINFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace nsinflow {

// Argument outside the domain of a constitutive law (nonpositive density, volume, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A documented precondition of an operation was not met by the caller.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative method ran out of iterations; carries the distance history.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

// The stationary iterate left the physically meaningful set (v <= 0 or non-finite).
class RegimeViolationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Power-law tail could not be fitted to the far-field part of a profile.
class TailFitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Time integration produced nonpositive density.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(const std::string& what, double time, double min_rho, double r_at_min)
        : std::runtime_error(what), time_(time), min_rho_(min_rho), r_at_min_(r_at_min) {}
    double time() const noexcept { return time_; }
    double min_rho() const noexcept { return min_rho_; }
    double r_at_min() const noexcept { return r_at_min_; }

private:
    double time_;
    double min_rho_;
    double r_at_min_;
};

}  // namespace nsinflow

#endif
