#pragma once

// Empirical checks of the regularity properties of spectral operators, with
// machine-readable reports.

#include "specop/spectral.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace specop {

/// Number of worker threads used by the harness: SPECOP_THREADS when set,
/// otherwise the hardware concurrency.
[[nodiscard]] Index harness_threads();
/// Runs body(0..count-1) on up to harness_threads() threads. The first
/// exception thrown by any call is rethrown.
void parallel_for(Index count, const std::function<void(Index)>& body);

/// A named base point X_bar.
struct BasePoint {
    std::string ref;
    MixedSignature sig;
    MixedPoint X;
};

/// Builds a single-block base point. With `rotate` the diagonal point is
/// conjugated by Haar factors drawn from `rotation_seed`.
[[nodiscard]] BasePoint diagonal_base_point(BlockKind kind, const Vector& values, Index cols,
                                            bool rotate = false, std::uint64_t rotation_seed = 0);
/// {"kind", "values", "cols", "rotate", "ref"} or {"kind", "file", "ref"}.
[[nodiscard]] BasePoint base_point_from_json(const nlohmann::json& j);

struct StepSchedule {
    std::vector<double> steps{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
    Index directions = 8;
    std::uint64_t seed = 0;
    void validate() const;
};

struct OrderReport {
    std::string check;
    std::string map;
    std::string base_point_ref;
    std::vector<double> steps;
    /// Worst residual over the sampled directions, per step.
    std::vector<double> residuals;
    double slope = 0.0;
    double intercept = 0.0;
    /// Indices of the steps entering the fit.
    std::vector<Index> fit_window;
    double floor = 0.0;
    /// Some residuals were at the rounding floor and left out of the fit.
    bool floor_flag = false;
    double target = 0.0;
    /// "exact", "consistent" (with the target order) or "fail".
    std::string verdict;
    [[nodiscard]] bool pass() const noexcept { return verdict != "fail"; }
    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] std::string csv() const;
};

/// Least-squares log-log slope over the steps whose residual is above
/// `floor`, dropping the largest step. Fewer than 3 points give "exact".
void fit_order(OrderReport& report);

/// max over sampled pairs in the ball of ||G(X) - G(X')|| / ||X - X'||.
[[nodiscard]] double estimate_lipschitz(const SymmetricMap& g, const BasePoint& bp, double radius,
                                        Index trials, std::uint64_t seed);

/// Residual ||G(X_bar + H) - G(X_bar) - G'(X_bar; H)||.
[[nodiscard]] OrderReport order_bdiff(const SymmetricMap& g, const BasePoint& bp,
                                      const StepSchedule& schedule, double target = 1.9);

/// Residual ||G(Y) - G(X_bar) - G'(Y)(Y - X_bar)|| at points Y = X_bar + H
/// where g is differentiable at the spectrum of Y; directions are redrawn up
/// to `max_retries` times per sample.
[[nodiscard]] OrderReport order_semismooth(const SymmetricMap& g, const BasePoint& bp,
                                           const StepSchedule& schedule, double target = 1.9,
                                           Index max_retries = 100);

struct EquivarianceReport {
    std::string map;
    BlockKind kind = BlockKind::singular;
    Index trials = 0;
    /// max ||G(A X B^T) - A G(X) B^T|| / max(1, ||G(X)||).
    double max_discrepancy = 0.0;
    /// Diagonal consistency on ordered nonnegative (eigen: ordered) y.
    double max_diagonal = 0.0;
    /// Diagonal consistency on signed (eigen: unsigned) unordered y.
    double max_diagonal_unordered = 0.0;
    double tolerance = 1e-10;
    double diagonal_tolerance = 1e-12;
    [[nodiscard]] bool pass() const noexcept {
        return max_discrepancy <= tolerance && max_diagonal <= diagonal_tolerance &&
               max_diagonal_unordered <= diagonal_tolerance;
    }
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Random trials up to max_rows x max_cols (eigen: max_rows x max_rows).
/// Odd trials use spectra with exact ties and zeros.
[[nodiscard]] EquivarianceReport check_equivariance(const SymmetricMap& g, BlockKind kind, Index trials,
                                                    Index max_rows, Index max_cols, std::uint64_t seed);

struct SuiteReport {
    std::uint64_t seed = 0;
    std::vector<nlohmann::json> entries;
    [[nodiscard]] bool pass() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Runs every check listed under config["checks"]. Malformed entries raise
/// ConfigError; failing checks are reported with their violations.
[[nodiscard]] SuiteReport run_suite(const nlohmann::json& config);
/// All built-ins at canonical kink base points.
[[nodiscard]] nlohmann::json default_suite_config();

}  // namespace specop
