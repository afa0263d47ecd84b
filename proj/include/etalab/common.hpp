#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace etalab {

using Real = double;
using Complex = std::complex<Real>;

inline constexpr Real kPi = 3.14159265358979323846264338327950288;

enum class ErrorCode {
    InvalidShape,
    InvalidLagrangian,
    InvalidProfile,
    NotInKernel,
    IllConditioned,
    RootBracketFailure,
    AmbiguousKernel,
    OddParityViolated,
    KernelPresent,
    CutoffMismatch,
    SpectralGapAbsent,
    QuadratureNonConvergence,
    NotConstantInT,
    UnknownExperiment,
    ParseError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline bool nearly_integer(Real x, Real tol = 1e-12) {
    return std::abs(x - std::round(x)) < tol;
}

}  // namespace etalab
