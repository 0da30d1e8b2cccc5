#pragma once

// Elements of the B-subdifferential of a spectral operator, obtained as
// derivatives Psi'(W) of the directional derivative at sampled inner points.

#include "specop/spectral.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace specop {

struct ClarkeOptions {
    /// Run even when the map does not certify the hypotheses; the handle is
    /// then flagged heuristic.
    bool force = false;
    Index max_draws = 1000;
    double tol_group = default_tol_group;
};

/// One element of dB G(X_bar) as a linear map on mixed points.
class JacobianHandle {
public:
    [[nodiscard]] MixedPoint apply(const MixedPoint& H) const;
    /// Single-block convenience; honours the transposition of tall inputs.
    [[nodiscard]] Matrix apply(const Matrix& H) const;

    /// Column k is apply(E_k) for the k-th unit point (blocks in order,
    /// entries column-major). Throws TooLarge above 4096 unknowns.
    [[nodiscard]] Matrix assemble_dense() const;

    [[nodiscard]] const MixedSignature& signature() const noexcept { return sig_; }
    [[nodiscard]] bool differentiable_point() const noexcept { return frechet_ != nullptr; }
    [[nodiscard]] bool heuristic() const noexcept { return heuristic_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] Index draws() const noexcept { return draws_; }
    /// The inner point W (empty at differentiable points).
    [[nodiscard]] const MixedPoint& W() const noexcept { return W_; }
    [[nodiscard]] const DirectionalDerivative* directional() const noexcept { return psi_.get(); }
    [[nodiscard]] const FrechetOperator* inner_derivative() const noexcept { return inner_.get(); }

    /// {seed, base_point_hash, W, ...}; enough to rebuild the handle.
    [[nodiscard]] nlohmann::json descriptor() const;

private:
    friend struct HandleBuilder;

    MixedSignature sig_;
    std::shared_ptr<const FrechetOperator> frechet_;
    std::shared_ptr<const DirectionalDerivative> psi_;
    std::shared_ptr<const FrechetOperator> inner_;
    MixedPoint W_;
    std::uint64_t seed_ = 0;
    std::uint64_t base_hash_ = 0;
    Index draws_ = 0;
    bool heuristic_ = false;
    bool transposed_ = false;
    nlohmann::json map_;
};

[[nodiscard]] std::uint64_t mixed_hash(const MixedPoint& X);

/// Draws inner points W with Gaussian blocks until g'(sigma_bar; .) is
/// differentiable at kappa(W) and returns H -> Psi'(W) H. At points where g
/// is differentiable the Frechet derivative is returned instead.
[[nodiscard]] JacobianHandle sample_clarke_element(const SymmetricMap& g, const MixedSignature& sig,
                                                   const MixedPoint& X_bar, std::uint64_t seed,
                                                   const ClarkeOptions& options = {});
[[nodiscard]] JacobianHandle sample_clarke_element(const SymmetricMap& g, const Matrix& X_bar,
                                                   std::uint64_t seed, const ClarkeOptions& options = {});
[[nodiscard]] JacobianHandle sample_clarke_element_sym(const SymmetricMap& g, const Matrix& X_bar,
                                                       std::uint64_t seed,
                                                       const ClarkeOptions& options = {});

/// Rebuilds a handle from its descriptor. The base point must hash to the
/// recorded value.
[[nodiscard]] JacobianHandle handle_from_descriptor(const SymmetricMap& g, const MixedSignature& sig,
                                                    const MixedPoint& X_bar,
                                                    const nlohmann::json& descriptor);

/// Convex combination of handles, an element of the Clarke Jacobian.
class ConvexCombination {
public:
    void add(double weight, JacobianHandle handle);
    [[nodiscard]] MixedPoint apply(const MixedPoint& H) const;

private:
    std::vector<std::pair<double, JacobianHandle>> terms_;
};

/// Rebuilds the sequence point X_t = U_bar M [Diag(sigma_bar + t w) 0] N^T V_bar^T
/// attached to the inner point W of a handle.
[[nodiscard]] MixedPoint sequence_point(const JacobianHandle& handle, double t);

struct ClarkeConsistencyReport {
    Index trials = 0;
    std::vector<double> steps;
    /// max over trials and probes of ||G'(X_t) H - handle(H)||, per step.
    std::vector<double> raw;
    /// Same with G'(X_t) replaced by (10 G'(X_t) - G'(X_{10t})) / 9, an
    /// estimate of the limit t -> 0; NaN for the largest step.
    std::vector<double> extrapolated;
    double tolerance = 1e-8;
    bool pass = false;
};

[[nodiscard]] ClarkeConsistencyReport clarke_consistency_check(
    const SymmetricMap& g, const MixedSignature& sig, const MixedPoint& X_bar, Index trials,
    std::uint64_t seed, const ClarkeOptions& options = {});

}  // namespace specop
