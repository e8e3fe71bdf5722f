#pragma once

#include <stdexcept>
#include <string>

namespace refldiff {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input / configuration problems (CLI exit code 2).
struct ScenarioError : Error {
    using Error::Error;
};

// geometry
struct NonFiniteGeometry : Error {
    using Error::Error;
};
struct NotOnBoundary : Error {
    using Error::Error;
};
struct EmptyScriptI : Error {
    using Error::Error;
};

// cones
struct NotInCone : Error {
    using Error::Error;
};
struct BoundarySamplingFailed : Error {
    using Error::Error;
};

// controlled
struct EscapedWorkingRegion : Error {
    using Error::Error;
};
struct NonFiniteState : Error {
    using Error::Error;
};
struct NoViolatedFace : Error {
    using Error::Error;
};
struct OutOfRange : Error {
    using Error::Error;
};

// timechange
struct ZeroLambda0 : Error {
    using Error::Error;
};

// sder
struct DegenerateDirection : Error {
    using Error::Error;
};

// harness
struct UnderpopulatedBins : Error {
    using Error::Error;
};

}  // namespace refldiff
