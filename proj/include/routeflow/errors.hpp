#pragma once

#include <stdexcept>
#include <string>

namespace routeflow {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// -- graph construction --
struct CycleDetected : Error {
    using Error::Error;
};
struct MultipleOrigins : Error {
    using Error::Error;
};
struct MultipleDestinations : Error {
    using Error::Error;
};
struct UnreachableNode : Error {
    using Error::Error;
};
struct PathExplosion : Error {
    using Error::Error;
};

// -- congestion physics --
struct NegativeDensity : Error {
    using Error::Error;
};
struct NegativeFlow : Error {
    using Error::Error;
};
struct FlowAtOrAboveCapacity : Error {
    using Error::Error;
};

// -- route choice --
struct AllPathsInfiniteDelay : Error {
    using Error::Error;
};
struct ZeroPreferenceOutflow : Error {
    using Error::Error;
};
struct InfeasiblePreference : Error {
    using Error::Error;
};

// -- solvers and integration --
struct NotConverged : Error {
    using Error::Error;
};
struct Infeasible : Error {
    using Error::Error;
};
struct NumericalBlowup : Error {
    using Error::Error;
};
struct StepRejected : Error {
    using Error::Error;
};

// -- i/o --
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct LengthMismatch : Error {
    using Error::Error;
};

}  // namespace routeflow
