#pragma once

#include <stdexcept>
#include <string>

namespace entropylab {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// invalid argument values (eps <= 0, malformed grids, ...)
struct ParameterError : Error {
    using Error::Error;
};

// operation requested from a system that cannot provide it (backward iteration
// of a non-invertible map, boundary data in plane mode, ...)
struct CapabilityError : Error {
    using Error::Error;
};

// a checked precondition failed; message names the offending input
struct PreconditionError : Error {
    using Error::Error;
};

struct InsufficientDataError : Error {
    using Error::Error;
};

// point escaped the representable region of the model
struct BoundaryError : Error {
    using Error::Error;
};

// word-length cap exceeded in fundamental-domain reduction
struct DepthError : Error {
    using Error::Error;
};

// enumeration cap exceeded; message carries the partial count
struct ResourceError : Error {
    using Error::Error;
};

// numerical integration left its safety region
struct InstabilityError : Error {
    using Error::Error;
};

// polyline too coarse for the requested computation
struct ResolutionError : Error {
    using Error::Error;
};

// result cannot be produced at the requested precision (segment too short, ...)
struct PrecisionError : Error {
    using Error::Error;
};

struct NotInTubeError : Error {
    using Error::Error;
};

// config file rejected; message names line and key
struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace entropylab
