#pragma once

// Mixed-symmetric vector maps g and their first-order calculus.

#include "specop/linalg.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace specop {

enum class BlockKind { eigen, singular };

[[nodiscard]] constexpr const char* to_string(BlockKind kind) noexcept {
    return kind == BlockKind::eigen ? "eigen" : "singular";
}
[[nodiscard]] BlockKind block_kind_from_string(const std::string& s);

/// One block of a concatenated spectrum vector.
struct VecBlock {
    BlockKind kind = BlockKind::singular;
    Index length = 0;
};
using BlockSignature = std::vector<VecBlock>;

[[nodiscard]] Index total_length(const BlockSignature& sig);

struct Capabilities {
    bool has_jacobian = true;
    bool has_dir_deriv = true;
    bool has_steklov_closed_form = false;
};

/// Kink tolerance used by every built-in differentiability query.
inline constexpr double kink_tolerance = 1e-12;

class SymmetricMap;
using MapPtr = std::shared_ptr<const SymmetricMap>;

/// A vector map g: R^m -> R^m that commutes with the (signed) permutations
/// admissible for the block signature it is used with. Maps are dimension
/// generic; the signature is supplied by the caller.
class SymmetricMap {
public:
    virtual ~SymmetricMap() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual nlohmann::json params() const { return nlohmann::json::object(); }
    /// Block kinds for which the map is mixed symmetric.
    [[nodiscard]] virtual bool supports(BlockKind) const { return true; }
    [[nodiscard]] virtual Capabilities capabilities() const { return {}; }
    [[nodiscard]] virtual bool in_domain(const Vector&) const { return true; }

    [[nodiscard]] virtual Vector eval(const Vector& x) const = 0;
    /// g'(x; h). The default throws Unsupported.
    [[nodiscard]] virtual Vector dir_deriv(const Vector& x, const Vector& h) const;
    /// g'(x), or nullopt when g is not differentiable at x.
    [[nodiscard]] virtual std::optional<Matrix> jacobian(const Vector& x) const = 0;
    /// The map h -> g'(x; h) as a map in its own right, with its own Jacobian.
    [[nodiscard]] virtual MapPtr directional_map(const Vector& x) const;

    /// Global Lipschitz module, +inf when only locally Lipschitz.
    [[nodiscard]] virtual double lipschitz_constant() const {
        return std::numeric_limits<double>::infinity();
    }
    /// Analytic certificate for the hypotheses under which dB G(X) = dB Psi(0):
    /// differentiability of g near x matches that of g'(x;.) and
    /// d(h) = g(x+h) - g(x) - g'(x;h) is strictly differentiable at 0.
    [[nodiscard]] virtual bool clarke_certified(const Vector&) const { return false; }

    /// Closed-form Steklov average and its Jacobian when available.
    [[nodiscard]] virtual std::optional<Vector> steklov_average(double /*omega*/,
                                                                const Vector& /*y*/) const {
        return std::nullopt;
    }
    [[nodiscard]] virtual std::optional<Matrix> steklov_jacobian(double /*omega*/,
                                                                 const Vector& /*y*/) const {
        return std::nullopt;
    }
};

// Checked entry points. These validate the domain and capabilities before
// dispatching to the map.
[[nodiscard]] Vector eval(const SymmetricMap& g, const Vector& x);
[[nodiscard]] Vector dir_deriv(const SymmetricMap& g, const Vector& x, const Vector& h);
[[nodiscard]] std::optional<Matrix> jacobian(const SymmetricMap& g, const Vector& x);

/// Scalar function h lifted componentwise (the Loewner case).
struct ScalarFunction {
    std::function<double(double)> value;
    std::function<double(double)> left_slope;
    std::function<double(double)> right_slope;
    /// Points where the one-sided slopes differ.
    std::vector<double> kinks;
    /// Odd functions may act on singular blocks.
    bool odd = false;
    bool piecewise_affine = false;
    double lipschitz = std::numeric_limits<double>::infinity();
    /// Whether the Clarke hypotheses hold everywhere (true for piecewise
    /// affine and C^1 functions).
    bool clarke_certified = true;
};

class ComponentwiseMap final : public SymmetricMap {
public:
    ComponentwiseMap(std::string name, nlohmann::json params, ScalarFunction f);

    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] nlohmann::json params() const override { return params_; }
    [[nodiscard]] bool supports(BlockKind kind) const override {
        return kind == BlockKind::eigen || f_.odd;
    }
    [[nodiscard]] Capabilities capabilities() const override { return {true, true, true}; }
    [[nodiscard]] Vector eval(const Vector& x) const override;
    [[nodiscard]] Vector dir_deriv(const Vector& x, const Vector& h) const override;
    [[nodiscard]] std::optional<Matrix> jacobian(const Vector& x) const override;
    [[nodiscard]] MapPtr directional_map(const Vector& x) const override;
    [[nodiscard]] double lipschitz_constant() const override { return f_.lipschitz; }
    [[nodiscard]] bool clarke_certified(const Vector&) const override { return f_.clarke_certified; }
    [[nodiscard]] std::optional<Vector> steklov_average(double omega, const Vector& y) const override;
    [[nodiscard]] std::optional<Matrix> steklov_jacobian(double omega, const Vector& y) const override;

    [[nodiscard]] const ScalarFunction& function() const noexcept { return f_; }
    [[nodiscard]] bool at_kink(double t) const;
    /// The kink within tolerance of t, or t itself.
    [[nodiscard]] double snap(double t) const;

private:
    std::string name_;
    nlohmann::json params_;
    ScalarFunction f_;
};

/// h -> A h for a fixed matrix A.
class LinearMap final : public SymmetricMap {
public:
    LinearMap(std::string name, Matrix A) : name_(std::move(name)), A_(std::move(A)) {}
    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] Vector eval(const Vector& x) const override;
    [[nodiscard]] Vector dir_deriv(const Vector& x, const Vector& h) const override;
    [[nodiscard]] std::optional<Matrix> jacobian(const Vector& x) const override;
    [[nodiscard]] MapPtr directional_map(const Vector& x) const override;
    [[nodiscard]] double lipschitz_constant() const override;
    [[nodiscard]] bool clarke_certified(const Vector&) const override { return true; }

private:
    std::string name_;
    Matrix A_;
};

/// Componentwise map that is linear on each half line: slope `right` for
/// h_i > 0 and `left` for h_i < 0. The directional derivative of every
/// componentwise map has this form.
class ConeLinearMap final : public SymmetricMap {
public:
    ConeLinearMap(std::string name, Vector left, Vector right);
    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] Vector eval(const Vector& h) const override;
    [[nodiscard]] Vector dir_deriv(const Vector& h, const Vector& d) const override;
    [[nodiscard]] std::optional<Matrix> jacobian(const Vector& h) const override;
    [[nodiscard]] MapPtr directional_map(const Vector& h) const override;
    [[nodiscard]] bool clarke_certified(const Vector&) const override { return true; }

private:
    std::string name_;
    Vector left_;
    Vector right_;
};

/// Projection onto the Euclidean ball of radius r: x * min(1, r / ||x||).
class FrobeniusBallMap final : public SymmetricMap {
public:
    explicit FrobeniusBallMap(double radius);
    [[nodiscard]] std::string name() const override { return "frobenius_ball"; }
    [[nodiscard]] nlohmann::json params() const override { return {{"radius", radius_}}; }
    [[nodiscard]] Vector eval(const Vector& x) const override;
    [[nodiscard]] Vector dir_deriv(const Vector& x, const Vector& h) const override;
    [[nodiscard]] std::optional<Matrix> jacobian(const Vector& x) const override;
    [[nodiscard]] MapPtr directional_map(const Vector& x) const override;
    [[nodiscard]] double lipschitz_constant() const override { return 1.0; }
    [[nodiscard]] bool clarke_certified(const Vector& x) const override { return !on_boundary(x); }
    [[nodiscard]] bool on_boundary(const Vector& x) const;

private:
    double radius_;
};

/// Deliberately asymmetric map g_i(x) = (1 + i/10) x_i. Negative control only.
class BrokenWeightedMap final : public SymmetricMap {
public:
    [[nodiscard]] std::string name() const override { return "broken_weighted"; }
    [[nodiscard]] Vector eval(const Vector& x) const override;
    [[nodiscard]] Vector dir_deriv(const Vector& x, const Vector& h) const override;
    [[nodiscard]] std::optional<Matrix> jacobian(const Vector& x) const override;
    [[nodiscard]] MapPtr directional_map(const Vector& x) const override;
    [[nodiscard]] bool clarke_certified(const Vector&) const override { return true; }
};

// Built-in instances.
[[nodiscard]] MapPtr identity_map();
[[nodiscard]] MapPtr scalar_scale(double c);
[[nodiscard]] MapPtr soft_threshold(double tau);
/// h(t) = sign(t) |t|^p, p >= 1.
[[nodiscard]] MapPtr abs_power(double p);
[[nodiscard]] MapPtr psd_projection();
[[nodiscard]] MapPtr box_clamp(double lower, double upper);
[[nodiscard]] MapPtr spectral_ball(double radius);
[[nodiscard]] MapPtr frobenius_ball(double radius);
[[nodiscard]] MapPtr broken_weighted();
/// Loewner lifting of an arbitrary scalar function.
[[nodiscard]] MapPtr loewner(std::string name, ScalarFunction f);

/// Registry: resolves {name, params} descriptors.
[[nodiscard]] MapPtr make_map(const std::string& name,
                              const nlohmann::json& params = nlohmann::json::object());
[[nodiscard]] MapPtr map_from_json(const nlohmann::json& descriptor);
[[nodiscard]] nlohmann::json map_to_json(const SymmetricMap& g);
/// Names of the symmetric built-ins (negative controls excluded).
[[nodiscard]] std::vector<std::string> builtin_map_names();

struct SymmetryReport {
    Index trials = 0;
    double max_discrepancy = 0.0;
    double max_relative = 0.0;
    bool pass = true;
};

/// Samples x and admissible (signed) permutations Q and measures
/// ||g(Qx) - Q g(x)||; passes iff every discrepancy is at most
/// 1e-12 (1 + ||g(x)||).
[[nodiscard]] SymmetryReport check_mixed_symmetry(const SymmetricMap& g, const BlockSignature& sig,
                                                  Index trials, std::uint64_t seed);

struct DividedDifferenceReport {
    Index samples = 0;
    /// Smallest L' satisfying every sampled inequality.
    double lipschitz_estimate = 0.0;
};

/// Samples points in the box of half-width `radius` around x_bar and records
/// the smallest L' with |g_i - g_j| <= L'|s_i - s_j|, and for singular blocks
/// also |g_i + g_j| <= L'|s_i + s_j| (s_i + s_j > 0) and |g_i| <= L'|s_i|
/// (s_i > 0).
[[nodiscard]] DividedDifferenceReport check_divided_difference_bounds(
    const SymmetricMap& g, const Vector& x_bar, BlockKind kind, double radius, Index trials,
    std::uint64_t seed);

}  // namespace specop
