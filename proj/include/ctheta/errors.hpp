// Error taxonomy shared by all ctheta modules.
//
// Every failure mode that callers are expected to handle gets its own type, so
// the CLI can map them to stable exit codes and tests can assert on them.

#pragma once

#include <stdexcept>
#include <string>

namespace ctheta {

// Precondition on the mathematical domain violated (zero in a divisor ball,
// point outside a reduced domain, invalid bounds pack, ...). The message names
// the violated condition.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Requested output precision cannot be certified, typically because input ball
// radii are already larger than the target. `achievable_bits` reports the
// precision that could be certified instead (0 if unknown).
struct PrecisionError : std::runtime_error {
    long achievable_bits;
    explicit PrecisionError(const std::string& what, long achievable = 0)
        : std::runtime_error(what), achievable_bits(achievable) {}
};

// sqrt_near could not decide between the two square-root candidates at the
// current radii.
struct AmbiguousBranch : std::runtime_error {
    explicit AmbiguousBranch(const std::string& what) : std::runtime_error(what) {}
};

// A tuple that must lie in an open quarter plane could not be certified to do
// so. `indeterminate` distinguishes "provably not" from "undecidable at the
// current radii".
struct NotGoodPosition : std::runtime_error {
    bool indeterminate;
    explicit NotGoodPosition(const std::string& what, bool indet)
        : std::runtime_error(what), indeterminate(indet) {}
};

// Recorded square-root anchors do not square back to the sequence values.
struct BadSignPath : std::runtime_error {
    explicit BadSignPath(const std::string& what) : std::runtime_error(what) {}
};

// Start value is too far from a recorded sequence's first term for the
// analytic continuation radius.
struct OutOfRadius : std::runtime_error {
    explicit OutOfRadius(const std::string& what) : std::runtime_error(what) {}
};

// A scheme evaluation left the certified basin of its inverse problem.
struct OutsideBasin : std::runtime_error {
    explicit OutsideBasin(const std::string& what) : std::runtime_error(what) {}
};

// Finite-difference Jacobian not invertible within ball tolerance.
struct SingularJacobian : std::runtime_error {
    explicit SingularJacobian(const std::string& what) : std::runtime_error(what) {}
};

// The Newton precision schedule failed to advance (constants inconsistent).
struct DivergentSchedule : std::runtime_error {
    explicit DivergentSchedule(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ctheta
