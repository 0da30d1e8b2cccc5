#pragma once

#include <stdexcept>
#include <string>

namespace specop {

enum class ErrorCode {
    non_finite,
    decomposition_failure,
    domain_error,
    not_differentiable,
    unsupported,
    shape_mismatch,
    partition_mismatch,
    hypothesis_unverified,
    sampling_exhausted,
    too_large,
    quadrature_unsupported,
    retries_exhausted,
    max_iterations,
    linear_solve_failure,
    config_error,
    io_error,
};

[[nodiscard]] constexpr const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::non_finite: return "NonFinite";
        case ErrorCode::decomposition_failure: return "DecompositionFailure";
        case ErrorCode::domain_error: return "DomainError";
        case ErrorCode::not_differentiable: return "NotDifferentiable";
        case ErrorCode::unsupported: return "Unsupported";
        case ErrorCode::shape_mismatch: return "ShapeMismatch";
        case ErrorCode::partition_mismatch: return "PartitionMismatch";
        case ErrorCode::hypothesis_unverified: return "HypothesisUnverified";
        case ErrorCode::sampling_exhausted: return "SamplingExhausted";
        case ErrorCode::too_large: return "TooLarge";
        case ErrorCode::quadrature_unsupported: return "QuadratureUnsupported";
        case ErrorCode::retries_exhausted: return "RetriesExhausted";
        case ErrorCode::max_iterations: return "MaxIterations";
        case ErrorCode::linear_solve_failure: return "LinearSolveFailure";
        case ErrorCode::config_error: return "ConfigError";
        case ErrorCode::io_error: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace specop
