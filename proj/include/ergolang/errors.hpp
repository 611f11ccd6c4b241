#pragma once

#include <stdexcept>
#include <string>

namespace ergolang {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Potential-spec validation failures. `kind()` names the violated constraint.
class SpecError : public Error {
public:
    enum class Kind { ExponentOrder, LeadingSignError, SingularSignError, NotBoundedBelow };

    SpecError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Evaluation outside the admissible domain (e.g. R <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

// Level-set queries below the minimum of the potential.
class BelowMinimum : public Error {
public:
    using Error::Error;
};

// Level set has more than two positive roots; not a single loop.
class MultipleWells : public Error {
public:
    using Error::Error;
};

// Adaptive quadrature exhausted its refinement budget.
class QuadratureNoConverge : public Error {
public:
    using Error::Error;
};

// eta_star verification found a level set that is not a single loop.
class VerificationFailed : public Error {
public:
    using Error::Error;
};

// Finite-difference step control failed to stabilise.
class StepBreakdown : public Error {
public:
    using Error::Error;
};

// Adaptive time stepping would require a step below the configured floor.
class StepFloorHit : public Error {
public:
    using Error::Error;
};

// Histogram comparisons on incompatible bin geometries.
class GeometryMismatch : public Error {
public:
    using Error::Error;
};

// Too few samples for the requested histogram resolution.
class InsufficientSamples : public Error {
public:
    using Error::Error;
};

// Moving-average window longer than the trajectory.
class WindowTooLong : public Error {
public:
    using Error::Error;
};

// Configuration file problems; message carries the offending field.
class ConfigParse : public Error {
public:
    using Error::Error;
};

class UnknownExperiment : public Error {
public:
    using Error::Error;
};

class OutputUnwritable : public Error {
public:
    using Error::Error;
};

}  // namespace ergolang
