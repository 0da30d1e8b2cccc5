#pragma once

// Steklov averaged maps g(omega, .) and the smoothing spectral operators
// Theta(omega, X) they generate.

#include "specop/spectral.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace specop {

/// Coupled maps without a closed form are averaged by tensor Gauss-Legendre
/// quadrature, which is capped at this many coordinates.
inline constexpr Index max_quadrature_dim = 6;

/// g(omega, y): the average of g over the cube of side |omega| centred at y.
/// omega = 0 returns g(y).
[[nodiscard]] Vector steklov_eval(const SymmetricMap& g, double omega, const Vector& y);
/// Derivative of g(omega, .) at y (omega != 0).
[[nodiscard]] Matrix steklov_deriv(const SymmetricMap& g, double omega, const Vector& y);

/// g(omega, .) as a map in its own right.
class SteklovMap final : public SymmetricMap {
public:
    SteklovMap(MapPtr g, double omega);
    [[nodiscard]] std::string name() const override;
    [[nodiscard]] nlohmann::json params() const override;
    [[nodiscard]] bool supports(BlockKind kind) const override { return g_->supports(kind); }
    [[nodiscard]] bool in_domain(const Vector& x) const override { return g_->in_domain(x); }
    [[nodiscard]] Vector eval(const Vector& x) const override;
    [[nodiscard]] Vector dir_deriv(const Vector& x, const Vector& h) const override;
    [[nodiscard]] std::optional<Matrix> jacobian(const Vector& x) const override;
    [[nodiscard]] double lipschitz_constant() const override { return g_->lipschitz_constant(); }
    [[nodiscard]] double omega() const noexcept { return omega_; }

private:
    MapPtr g_;
    double omega_;
};

/// Theta(omega, X) = G_omega(X); Theta(0, X) = G(X).
[[nodiscard]] Matrix smoothing_operator(const MapPtr& g, double omega, const Matrix& X,
                                        double tol_group = default_tol_group);
[[nodiscard]] Matrix smoothing_operator_sym(const MapPtr& g, double omega, const Matrix& X,
                                            double tol_group = default_tol_group);

/// Theta'(omega, X)(tau_dot, H). The omega part uses central differences
/// with step |omega| * 1e-4.
[[nodiscard]] Matrix smoothing_deriv(const MapPtr& g, double omega, const Matrix& X, const Matrix& H,
                                     double tau_dot, double tol_group = default_tol_group);
[[nodiscard]] Matrix smoothing_deriv_sym(const MapPtr& g, double omega, const Matrix& X,
                                         const Matrix& H, double tau_dot,
                                         double tol_group = default_tol_group);

struct SweepRow {
    double omega = 0.0;
    /// max over the sample of ||Theta(omega, X) - G(X)||_F.
    double sup_distance = 0.0;
    /// max over the sample of the operator norm of Theta'_X(omega, X).
    double deriv_norm = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    double lipschitz = 0.0;
    Index m = 0;
    /// Up to a rounding slack of 1e-13.
    bool nonincreasing = true;
    /// sup_distance <= bound_factor * sqrt(m) * omega at every row.
    bool within_bound = true;
    double bound_factor = 0.6;
    /// deriv_norm <= lipschitz * (1 + 1e-6) at every row.
    bool deriv_bounded = true;
    [[nodiscard]] bool pass() const noexcept { return nonincreasing && within_bound && deriv_bounded; }
    [[nodiscard]] std::string csv() const;
};

/// Sweeps omega over `omegas` for `samples` seeded points in the ball of
/// radius `radius` around X_bar (a single rectangular or symmetric block).
[[nodiscard]] SweepReport smoothing_sweep(const MapPtr& g, const MixedSignature& sig,
                                          const Matrix& X_bar, const std::vector<double>& omegas,
                                          Index samples, double radius, std::uint64_t seed);

}  // namespace specop
