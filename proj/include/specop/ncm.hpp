#pragma once

// Nearest correlation matrix by a dual semismooth Newton method:
// minimize theta(y) = 1/2 ||P(A + Diag(y))||^2 - e^T y, with P the projection
// onto the positive semidefinite cone.

#include "specop/linalg.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace specop {

struct NcmProblem {
    Matrix A;
    double tol = 1e-8;
    Index max_iter = 50;
    double cg_tol = 1e-2;
    Index cg_max_iter = 200;
    std::uint64_t seed = 7;
};

struct NcmResult {
    Matrix X;
    Vector y;
    Index iterations = 0;
    /// ||diag(X_k) - e||_2 at every iterate, starting with the initial one.
    std::vector<double> residuals;
    std::vector<double> step_sizes;
    std::vector<Index> cg_iterations;
    /// Iterations at which the Jacobian element needed diagonal loading.
    Index loaded_steps = 0;
    [[nodiscard]] nlohmann::json log() const;
};

/// Throws MaxIterations when the residual is still above tol after max_iter
/// Newton steps and LinearSolveFailure when CG breaks down even with loading.
[[nodiscard]] NcmResult solve_ncm(const NcmProblem& problem);

/// Symmetric n x n matrix with unit diagonal and off-diagonal entries drawn
/// uniformly from [-1, 1].
[[nodiscard]] Matrix random_ncm_instance(Index n, std::uint64_t seed);

}  // namespace specop
