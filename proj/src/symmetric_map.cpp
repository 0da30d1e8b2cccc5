#include "specop/symmetric_map.hpp"

#include "specop/error.hpp"
#include "specop/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace specop {

using nlohmann::json;

BlockKind block_kind_from_string(const std::string& s) {
    if (s == "eigen") return BlockKind::eigen;
    if (s == "singular") return BlockKind::singular;
    throw Error(ErrorCode::config_error, "unknown block kind '" + s + "'");
}

Index total_length(const BlockSignature& sig) {
    Index n = 0;
    for (const auto& b : sig) n += b.length;
    return n;
}

Vector SymmetricMap::dir_deriv(const Vector&, const Vector&) const {
    throw Error(ErrorCode::unsupported, name() + " has no directional derivative");
}

MapPtr SymmetricMap::directional_map(const Vector&) const {
    throw Error(ErrorCode::unsupported, name() + " has no directional-derivative map");
}

Vector eval(const SymmetricMap& g, const Vector& x) {
    if (!x.allFinite()) throw Error(ErrorCode::non_finite, "map argument has NaN/Inf");
    if (!g.in_domain(x)) throw Error(ErrorCode::domain_error, "argument outside the domain of " + g.name());
    return g.eval(x);
}

Vector dir_deriv(const SymmetricMap& g, const Vector& x, const Vector& h) {
    if (!g.capabilities().has_dir_deriv) {
        throw Error(ErrorCode::unsupported, g.name() + " has no directional derivative");
    }
    if (x.size() != h.size()) throw Error(ErrorCode::shape_mismatch, "direction length mismatch");
    if (!g.in_domain(x)) throw Error(ErrorCode::domain_error, "argument outside the domain of " + g.name());
    return g.dir_deriv(x, h);
}

std::optional<Matrix> jacobian(const SymmetricMap& g, const Vector& x) {
    if (!g.capabilities().has_jacobian) return std::nullopt;
    if (!g.in_domain(x)) throw Error(ErrorCode::domain_error, "argument outside the domain of " + g.name());
    return g.jacobian(x);
}

// ---------------------------------------------------------------------------
// ComponentwiseMap

ComponentwiseMap::ComponentwiseMap(std::string name, json params, ScalarFunction f)
    : name_(std::move(name)), params_(std::move(params)), f_(std::move(f)) {}

bool ComponentwiseMap::at_kink(double t) const {
    return std::any_of(f_.kinks.begin(), f_.kinks.end(), [&](double k) {
        return std::abs(t - k) <= kink_tolerance * std::max(1.0, std::abs(k));
    });
}

Vector ComponentwiseMap::eval(const Vector& x) const {
    Vector y(x.size());
    for (Index i = 0; i < x.size(); ++i) y(i) = f_.value(x(i));
    return y;
}

double ComponentwiseMap::snap(double t) const {
    for (double k : f_.kinks) {
        if (std::abs(t - k) <= kink_tolerance * std::max(1.0, std::abs(k))) return k;
    }
    return t;
}

Vector ComponentwiseMap::dir_deriv(const Vector& x, const Vector& h) const {
    Vector y(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        const double t = snap(x(i));
        y(i) = h(i) >= 0.0 ? f_.right_slope(t) * h(i) : f_.left_slope(t) * h(i);
    }
    return y;
}

std::optional<Matrix> ComponentwiseMap::jacobian(const Vector& x) const {
    Matrix J = Matrix::Zero(x.size(), x.size());
    for (Index i = 0; i < x.size(); ++i) {
        if (at_kink(x(i))) return std::nullopt;
        J(i, i) = f_.right_slope(x(i));
    }
    return J;
}

MapPtr ComponentwiseMap::directional_map(const Vector& x) const {
    Vector left(x.size()), right(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        if (at_kink(x(i))) {
            left(i) = f_.left_slope(snap(x(i)));
            right(i) = f_.right_slope(snap(x(i)));
        } else {
            left(i) = right(i) = f_.right_slope(x(i));
        }
    }
    return std::make_shared<ConeLinearMap>(name_ + "'", std::move(left), std::move(right));
}

namespace {

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 8> gl_nodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> gl_weights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

}  // namespace

std::optional<Vector> ComponentwiseMap::steklov_average(double omega, const Vector& y) const {
    omega = std::abs(omega);
    if (omega == 0.0) return eval(y);
    Vector out(y.size());
    for (Index i = 0; i < y.size(); ++i) {
        const double lo = y(i) - 0.5 * omega;
        const double hi = y(i) + 0.5 * omega;
        std::vector<double> cuts{lo};
        for (double k : f_.kinks) {
            if (k > lo && k < hi) cuts.push_back(k);
        }
        cuts.push_back(hi);
        std::sort(cuts.begin(), cuts.end());
        if (cuts.size() == 2 && f_.piecewise_affine) {
            out(i) = f_.value(y(i));
            continue;
        }
        double integral = 0.0;
        for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
            const double a = cuts[p];
            const double b = cuts[p + 1];
            const double half = 0.5 * (b - a);
            const double mid = 0.5 * (a + b);
            if (f_.piecewise_affine) {
                integral += (b - a) * f_.value(mid);
            } else {
                double s = 0.0;
                for (std::size_t q = 0; q < gl_nodes.size(); ++q) {
                    s += gl_weights[q] * f_.value(mid + half * gl_nodes[q]);
                }
                integral += half * s;
            }
        }
        // hi - lo rather than omega keeps the average exact on affine pieces.
        out(i) = integral / (hi - lo);
    }
    return out;
}

std::optional<Matrix> ComponentwiseMap::steklov_jacobian(double omega, const Vector& y) const {
    omega = std::abs(omega);
    if (omega == 0.0) return jacobian(y);
    Matrix J = Matrix::Zero(y.size(), y.size());
    for (Index i = 0; i < y.size(); ++i) {
        const double lo = y(i) - 0.5 * omega;
        const double hi = y(i) + 0.5 * omega;
        if (!f_.piecewise_affine) {
            J(i, i) = (f_.value(hi) - f_.value(lo)) / omega;
            continue;
        }
        // Length-weighted slopes of the affine pieces.
        std::vector<double> cuts{lo};
        for (double k : f_.kinks) {
            if (k > lo && k < hi) cuts.push_back(k);
        }
        cuts.push_back(hi);
        std::sort(cuts.begin(), cuts.end());
        double acc = 0.0;
        for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
            acc += (cuts[p + 1] - cuts[p]) * f_.right_slope(0.5 * (cuts[p] + cuts[p + 1]));
        }
        J(i, i) = acc / (hi - lo);
    }
    return J;
}

// ---------------------------------------------------------------------------
// LinearMap

Vector LinearMap::eval(const Vector& x) const {
    if (x.size() != A_.cols()) throw Error(ErrorCode::shape_mismatch, name_ + ": length mismatch");
    return A_ * x;
}
Vector LinearMap::dir_deriv(const Vector&, const Vector& h) const { return A_ * h; }
std::optional<Matrix> LinearMap::jacobian(const Vector&) const { return A_; }
MapPtr LinearMap::directional_map(const Vector&) const {
    return std::make_shared<LinearMap>(name_, A_);
}
double LinearMap::lipschitz_constant() const {
    if (A_.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(A_);
    return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------
// ConeLinearMap

ConeLinearMap::ConeLinearMap(std::string name, Vector left, Vector right)
    : name_(std::move(name)), left_(std::move(left)), right_(std::move(right)) {
    if (left_.size() != right_.size()) throw Error(ErrorCode::shape_mismatch, "slope lengths differ");
}

Vector ConeLinearMap::eval(const Vector& h) const {
    if (h.size() != left_.size()) throw Error(ErrorCode::shape_mismatch, name_ + ": length mismatch");
    Vector y(h.size());
    for (Index i = 0; i < h.size(); ++i) y(i) = (h(i) >= 0.0 ? right_(i) : left_(i)) * h(i);
    return y;
}

Vector ConeLinearMap::dir_deriv(const Vector& h, const Vector& d) const {
    Vector y(h.size());
    for (Index i = 0; i < h.size(); ++i) {
        const bool kink = left_(i) != right_(i) && std::abs(h(i)) <= kink_tolerance;
        const double slope = kink ? (d(i) >= 0.0 ? right_(i) : left_(i))
                                  : (h(i) >= 0.0 ? right_(i) : left_(i));
        y(i) = slope * d(i);
    }
    return y;
}

std::optional<Matrix> ConeLinearMap::jacobian(const Vector& h) const {
    if (h.size() != left_.size()) throw Error(ErrorCode::shape_mismatch, name_ + ": length mismatch");
    Matrix J = Matrix::Zero(h.size(), h.size());
    for (Index i = 0; i < h.size(); ++i) {
        if (left_(i) != right_(i) && std::abs(h(i)) <= kink_tolerance) return std::nullopt;
        J(i, i) = h(i) >= 0.0 ? right_(i) : left_(i);
    }
    return J;
}

MapPtr ConeLinearMap::directional_map(const Vector& h) const {
    Vector left(h.size()), right(h.size());
    for (Index i = 0; i < h.size(); ++i) {
        if (left_(i) != right_(i) && std::abs(h(i)) <= kink_tolerance) {
            left(i) = left_(i);
            right(i) = right_(i);
        } else {
            left(i) = right(i) = h(i) >= 0.0 ? right_(i) : left_(i);
        }
    }
    return std::make_shared<ConeLinearMap>(name_ + "'", std::move(left), std::move(right));
}

// ---------------------------------------------------------------------------
// FrobeniusBallMap

namespace {

// Directional derivative of the ball projection at a boundary point x:
// projection of h onto the tangent half-space {h : <x, h> <= 0}.
class BallBoundaryDirectional final : public SymmetricMap {
public:
    BallBoundaryDirectional(Vector x, double radius) : x_(std::move(x)), r2_(radius * radius) {}
    [[nodiscard]] std::string name() const override { return "frobenius_ball'"; }
    [[nodiscard]] Vector eval(const Vector& h) const override {
        const double s = x_.dot(h);
        return s > 0.0 ? Vector(h - (s / r2_) * x_) : h;
    }
    [[nodiscard]] Vector dir_deriv(const Vector& h, const Vector& d) const override {
        const double s = x_.dot(h);
        const double scale = std::max(1.0, h.norm() * x_.norm());
        if (std::abs(s) <= kink_tolerance * scale) {
            const double t = x_.dot(d);
            return t > 0.0 ? Vector(d - (t / r2_) * x_) : d;
        }
        return s > 0.0 ? Vector(d - (x_.dot(d) / r2_) * x_) : d;
    }
    [[nodiscard]] std::optional<Matrix> jacobian(const Vector& h) const override {
        const double s = x_.dot(h);
        const Index m = h.size();
        if (std::abs(s) <= kink_tolerance * std::max(1.0, h.norm() * x_.norm())) return std::nullopt;
        if (s < 0.0) return Matrix::Identity(m, m);
        return Matrix(Matrix::Identity(m, m) - (x_ * x_.transpose()) / r2_);
    }
    [[nodiscard]] double lipschitz_constant() const override { return 1.0; }

private:
    Vector x_;
    double r2_;
};

}  // namespace

FrobeniusBallMap::FrobeniusBallMap(double radius) : radius_(radius) {
    if (!(radius > 0.0)) throw Error(ErrorCode::config_error, "frobenius_ball radius must be > 0");
}

bool FrobeniusBallMap::on_boundary(const Vector& x) const {
    return std::abs(x.norm() - radius_) <= kink_tolerance * std::max(1.0, radius_);
}

Vector FrobeniusBallMap::eval(const Vector& x) const {
    const double nx = x.norm();
    if (nx <= radius_) return x;
    return (radius_ / nx) * x;
}

std::optional<Matrix> FrobeniusBallMap::jacobian(const Vector& x) const {
    const Index m = x.size();
    if (on_boundary(x)) return std::nullopt;
    const double nx = x.norm();
    if (nx < radius_) return Matrix::Identity(m, m);
    return Matrix((radius_ / nx) * (Matrix::Identity(m, m) - (x * x.transpose()) / (nx * nx)));
}

Vector FrobeniusBallMap::dir_deriv(const Vector& x, const Vector& h) const {
    if (on_boundary(x)) return BallBoundaryDirectional(x, radius_).eval(h);
    return *jacobian(x) * h;
}

MapPtr FrobeniusBallMap::directional_map(const Vector& x) const {
    if (on_boundary(x)) return std::make_shared<BallBoundaryDirectional>(x, radius_);
    return std::make_shared<LinearMap>("frobenius_ball'", *jacobian(x));
}

// ---------------------------------------------------------------------------
// BrokenWeightedMap

namespace {
Vector weights(Index m) {
    Vector w(m);
    for (Index i = 0; i < m; ++i) w(i) = 1.0 + 0.1 * static_cast<double>(i);
    return w;
}
}  // namespace

Vector BrokenWeightedMap::eval(const Vector& x) const { return weights(x.size()).cwiseProduct(x); }
Vector BrokenWeightedMap::dir_deriv(const Vector&, const Vector& h) const {
    return weights(h.size()).cwiseProduct(h);
}
std::optional<Matrix> BrokenWeightedMap::jacobian(const Vector& x) const {
    return Matrix(weights(x.size()).asDiagonal());
}
MapPtr BrokenWeightedMap::directional_map(const Vector& x) const {
    return std::make_shared<LinearMap>("broken_weighted'", *jacobian(x));
}

// ---------------------------------------------------------------------------
// Built-ins

namespace {

double sign(double t) { return (t > 0.0) - (t < 0.0); }

// Clamp to [lower, upper]; either bound may be infinite.
ScalarFunction clamp_function(double lower, double upper) {
    ScalarFunction f;
    f.value = [=](double t) { return std::clamp(t, lower, upper); };
    f.left_slope = [=](double t) { return (t > lower && t <= upper) ? 1.0 : 0.0; };
    f.right_slope = [=](double t) { return (t >= lower && t < upper) ? 1.0 : 0.0; };
    if (std::isfinite(lower)) f.kinks.push_back(lower);
    if (std::isfinite(upper)) f.kinks.push_back(upper);
    f.odd = lower == -upper;
    f.piecewise_affine = true;
    f.lipschitz = 1.0;
    return f;
}

}  // namespace

MapPtr identity_map() {
    ScalarFunction f;
    f.value = [](double t) { return t; };
    f.left_slope = f.right_slope = [](double) { return 1.0; };
    f.odd = true;
    f.piecewise_affine = true;
    f.lipschitz = 1.0;
    return std::make_shared<ComponentwiseMap>("identity", json::object(), std::move(f));
}

MapPtr scalar_scale(double c) {
    ScalarFunction f;
    f.value = [c](double t) { return c * t; };
    f.left_slope = f.right_slope = [c](double) { return c; };
    f.odd = true;
    f.piecewise_affine = true;
    f.lipschitz = std::abs(c);
    return std::make_shared<ComponentwiseMap>("scalar_scale", json{{"c", c}}, std::move(f));
}

MapPtr soft_threshold(double tau) {
    if (!(tau >= 0.0)) throw Error(ErrorCode::config_error, "soft_threshold tau must be >= 0");
    ScalarFunction f;
    f.value = [tau](double t) { return sign(t) * std::max(std::abs(t) - tau, 0.0); };
    f.left_slope = [tau](double t) { return (t > tau || t <= -tau) ? 1.0 : 0.0; };
    f.right_slope = [tau](double t) { return (t >= tau || t < -tau) ? 1.0 : 0.0; };
    if (tau > 0.0) f.kinks = {-tau, tau};
    f.odd = true;
    f.piecewise_affine = true;
    f.lipschitz = 1.0;
    return std::make_shared<ComponentwiseMap>("soft_threshold", json{{"tau", tau}}, std::move(f));
}

MapPtr abs_power(double p) {
    if (!(p >= 1.0)) throw Error(ErrorCode::config_error, "abs_power requires p >= 1");
    ScalarFunction f;
    f.value = [p](double t) { return sign(t) * std::pow(std::abs(t), p); };
    f.left_slope = f.right_slope = [p](double t) {
        return p == 1.0 ? 1.0 : p * std::pow(std::abs(t), p - 1.0);
    };
    f.odd = true;
    f.piecewise_affine = p == 1.0;
    f.lipschitz = p == 1.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return std::make_shared<ComponentwiseMap>("abs_power", json{{"p", p}}, std::move(f));
}

MapPtr psd_projection() {
    return std::make_shared<ComponentwiseMap>(
        "psd_projection", json::object(),
        clamp_function(0.0, std::numeric_limits<double>::infinity()));
}

MapPtr box_clamp(double lower, double upper) {
    if (!(lower <= upper)) throw Error(ErrorCode::config_error, "box_clamp requires lower <= upper");
    return std::make_shared<ComponentwiseMap>("box_clamp", json{{"lower", lower}, {"upper", upper}},
                                              clamp_function(lower, upper));
}

MapPtr spectral_ball(double radius) {
    if (!(radius > 0.0)) throw Error(ErrorCode::config_error, "spectral_ball radius must be > 0");
    return std::make_shared<ComponentwiseMap>("spectral_ball", json{{"radius", radius}},
                                              clamp_function(-radius, radius));
}

MapPtr frobenius_ball(double radius) { return std::make_shared<FrobeniusBallMap>(radius); }

MapPtr broken_weighted() { return std::make_shared<BrokenWeightedMap>(); }

MapPtr loewner(std::string name, ScalarFunction f) {
    return std::make_shared<ComponentwiseMap>(std::move(name), json::object(), std::move(f));
}

std::vector<std::string> builtin_map_names() {
    return {"identity",      "scalar_scale",  "soft_threshold", "abs_power",
            "psd_projection", "box_clamp",    "spectral_ball",  "frobenius_ball"};
}

namespace {

double param(const json& params, const char* key, double fallback) {
    if (!params.is_object() || !params.contains(key)) return fallback;
    if (!params.at(key).is_number()) {
        throw Error(ErrorCode::config_error, std::string("parameter '") + key + "' must be a number");
    }
    return params.at(key).get<double>();
}

}  // namespace

MapPtr make_map(const std::string& name, const json& params) {
    if (name == "identity") return identity_map();
    if (name == "scalar_scale") return scalar_scale(param(params, "c", 1.0));
    if (name == "soft_threshold") return soft_threshold(param(params, "tau", 1.0));
    if (name == "abs_power") return abs_power(param(params, "p", 2.0));
    if (name == "psd_projection") return psd_projection();
    if (name == "box_clamp") return box_clamp(param(params, "lower", 0.0), param(params, "upper", 1.0));
    if (name == "spectral_ball") return spectral_ball(param(params, "radius", 1.0));
    if (name == "frobenius_ball") return frobenius_ball(param(params, "radius", 1.0));
    if (name == "broken_weighted") return broken_weighted();
    throw Error(ErrorCode::config_error, "unknown map '" + name + "'");
}

MapPtr map_from_json(const json& descriptor) {
    if (descriptor.is_string()) return make_map(descriptor.get<std::string>());
    if (!descriptor.is_object() || !descriptor.contains("name")) {
        throw Error(ErrorCode::config_error, "map descriptor needs a 'name'");
    }
    return make_map(descriptor.at("name").get<std::string>(),
                    descriptor.value("params", json::object()));
}

json map_to_json(const SymmetricMap& g) { return {{"name", g.name()}, {"params", g.params()}}; }

// ---------------------------------------------------------------------------
// Property checks

SymmetryReport check_mixed_symmetry(const SymmetricMap& g, const BlockSignature& sig, Index trials,
                                    std::uint64_t seed) {
    if (trials < 1) throw Error(ErrorCode::config_error, "trials must be >= 1");
    const Index m = total_length(sig);
    SymmetryReport rep;
    rep.trials = trials;
    for (Index t = 0; t < trials; ++t) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
        Vector x(m);
        for (Index i = 0; i < m; ++i) x(i) = 2.0 * standard_normal(rng);
        // Apply Q blockwise: a permutation, with random signs on singular blocks.
        Vector qx(m);
        std::vector<std::pair<Index, double>> perm(static_cast<std::size_t>(m));
        Index off = 0;
        for (const auto& b : sig) {
            const auto p = random_permutation(rng, b.length);
            for (Index i = 0; i < b.length; ++i) {
                const double s = b.kind == BlockKind::singular && uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
                perm[static_cast<std::size_t>(off + i)] = {off + p[static_cast<std::size_t>(i)], s};
            }
            off += b.length;
        }
        auto apply_q = [&](const Vector& v) {
            Vector out(m);
            for (Index i = 0; i < m; ++i) {
                const auto& [src, s] = perm[static_cast<std::size_t>(i)];
                out(i) = s * v(src);
            }
            return out;
        };
        qx = apply_q(x);
        const Vector gx = g.eval(x);
        const double disc = (g.eval(qx) - apply_q(gx)).norm();
        rep.max_discrepancy = std::max(rep.max_discrepancy, disc);
        const double rel = disc / (1.0 + gx.norm());
        rep.max_relative = std::max(rep.max_relative, rel);
        if (!(rel <= 1e-12)) rep.pass = false;
    }
    return rep;
}

DividedDifferenceReport check_divided_difference_bounds(const SymmetricMap& g, const Vector& x_bar,
                                                        BlockKind kind, double radius, Index trials,
                                                        std::uint64_t seed) {
    DividedDifferenceReport rep;
    const Index m = x_bar.size();
    for (Index t = 0; t < trials; ++t) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
        Vector s(m);
        for (Index i = 0; i < m; ++i) s(i) = x_bar(i) + uniform(rng, -radius, radius);
        const Vector gs = g.eval(s);
        ++rep.samples;
        auto record = [&](double num, double den) {
            if (den > 0.0) rep.lipschitz_estimate = std::max(rep.lipschitz_estimate, std::abs(num) / den);
        };
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < m; ++j) {
                if (i != j && s(i) != s(j)) record(gs(i) - gs(j), std::abs(s(i) - s(j)));
                if (kind == BlockKind::singular && s(i) + s(j) > 0.0) {
                    record(gs(i) + gs(j), s(i) + s(j));
                }
            }
            if (kind == BlockKind::singular && s(i) > 0.0) record(gs(i), s(i));
        }
    }
    return rep;
}

}  // namespace specop
