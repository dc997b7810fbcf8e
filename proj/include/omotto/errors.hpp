// errors.hpp — exception types shared by all modules

#pragma once

#include <stdexcept>
#include <string>

namespace omotto {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration / parameter validation failures (CLI exit code 2).
struct InvalidParameter : Error {
    using Error::Error;
};

// eta_d outside (0, 1].
struct InvalidEfficiency : InvalidParameter {
    using InvalidParameter::InvalidParameter;
};

// kappa_fb <= 0: the feedback instability threshold has been crossed.
struct FeedbackUnstable : Error {
    using Error::Error;
};

// Drift matrix has an eigenvalue with nonnegative real part.
struct Unstable : Error {
    using Error::Error;
};

// The 16x16 Lyapunov operator is numerically singular, or the solution
// fails its structural checks.
struct SingularSystem : Error {
    using Error::Error;
};

// Detuning above the Hamiltonian stability boundary: polariton modes
// are not defined.
struct UnstableRegion : Error {
    using Error::Error;
};

// |omega_A - omega_B| below the disambiguation threshold.
struct DegenerateSpectrum : Error {
    using Error::Error;
};

struct OutOfRange : Error {
    using Error::Error;
};

// Adaptive step control could not meet the requested tolerance.
struct StepFailure : Error {
    using Error::Error;
};

// Internal energy acquired an imaginary part beyond tolerance; the
// correlation matrix no longer satisfies its conjugation structure.
struct NonRealEnergy : Error {
    using Error::Error;
};

// Slice request does not hit a grid line.
struct OffGrid : Error {
    using Error::Error;
};

} // namespace omotto
