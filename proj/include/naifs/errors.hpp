#pragma once

#include <stdexcept>
#include <string>

namespace naifs {

/// Malformed arguments: bad mesh, out-of-range word index, dimension mismatch.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A structural requirement of the operation is not met (e.g. tracing on a
/// schedule that is not uniformly expanding, fixed-scale pressure without an
/// expansivity certificate).
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every fit window collapsed because counts reached the grid cardinality.
class SaturationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The grid is too coarse for the requested construction.
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedCapability : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace naifs
