#include "etalab/common.hpp"

namespace etalab {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidShape: return "InvalidShape";
        case ErrorCode::InvalidLagrangian: return "InvalidLagrangian";
        case ErrorCode::InvalidProfile: return "InvalidProfile";
        case ErrorCode::NotInKernel: return "NotInKernel";
        case ErrorCode::IllConditioned: return "IllConditioned";
        case ErrorCode::RootBracketFailure: return "RootBracketFailure";
        case ErrorCode::AmbiguousKernel: return "AmbiguousKernel";
        case ErrorCode::OddParityViolated: return "OddParityViolated";
        case ErrorCode::KernelPresent: return "KernelPresent";
        case ErrorCode::CutoffMismatch: return "CutoffMismatch";
        case ErrorCode::SpectralGapAbsent: return "SpectralGapAbsent";
        case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
        case ErrorCode::NotConstantInT: return "NotConstantInT";
        case ErrorCode::UnknownExperiment: return "UnknownExperiment";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "UnknownError";
}

}  // namespace etalab
