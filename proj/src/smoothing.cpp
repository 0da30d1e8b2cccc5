#include "specop/smoothing.hpp"

#include "specop/error.hpp"
#include "specop/random.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace specop {

namespace {

constexpr std::array<double, 8> gl_nodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> gl_weights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// Calls f(z, weight) for every node of the tensor rule on the cube of side
// omega around y; the weights sum to 1.
template <class F>
void for_each_node(const Vector& y, double omega, F&& f) {
    const Index m = y.size();
    if (m > max_quadrature_dim) {
        throw Error(ErrorCode::quadrature_unsupported,
                    "tensor quadrature is limited to " + std::to_string(max_quadrature_dim) +
                        " coordinates, got " + std::to_string(m));
    }
    std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
    Vector z(m);
    for (;;) {
        double w = 1.0;
        for (Index i = 0; i < m; ++i) {
            const auto k = idx[static_cast<std::size_t>(i)];
            z(i) = y(i) + 0.5 * omega * gl_nodes[k];
            w *= 0.5 * gl_weights[k];
        }
        f(z, w);
        Index i = 0;
        while (i < m && ++idx[static_cast<std::size_t>(i)] == gl_nodes.size()) {
            idx[static_cast<std::size_t>(i)] = 0;
            ++i;
        }
        if (i == m) break;
    }
}

void require_domain(const SymmetricMap& g, const Vector& y) {
    if (!y.allFinite()) throw Error(ErrorCode::non_finite, "smoothing argument has NaN/Inf");
    if (!g.in_domain(y)) throw Error(ErrorCode::domain_error, "argument outside the domain of " + g.name());
}

}  // namespace

Vector steklov_eval(const SymmetricMap& g, double omega, const Vector& y) {
    require_domain(g, y);
    omega = std::abs(omega);
    if (omega == 0.0) return g.eval(y);
    if (auto closed = g.steklov_average(omega, y)) return *closed;
    Vector acc = Vector::Zero(y.size());
    for_each_node(y, omega, [&](const Vector& z, double w) { acc += w * g.eval(z); });
    return acc;
}

Matrix steklov_deriv(const SymmetricMap& g, double omega, const Vector& y) {
    require_domain(g, y);
    omega = std::abs(omega);
    if (omega == 0.0) throw Error(ErrorCode::domain_error, "steklov_deriv needs omega != 0");
    if (auto closed = g.steklov_jacobian(omega, y)) return *closed;
    Matrix acc = Matrix::Zero(y.size(), y.size());
    for_each_node(y, omega, [&](const Vector& z, double w) {
        const auto J = g.jacobian(z);
        if (!J) {
            throw Error(ErrorCode::not_differentiable,
                        g.name() + " has no Jacobian at a quadrature node");
        }
        acc += w * *J;
    });
    return acc;
}

SteklovMap::SteklovMap(MapPtr g, double omega) : g_(std::move(g)), omega_(std::abs(omega)) {
    if (!g_) throw Error(ErrorCode::config_error, "null map");
}

std::string SteklovMap::name() const { return g_->name() + "@steklov"; }

nlohmann::json SteklovMap::params() const {
    return {{"omega", omega_}, {"base", map_to_json(*g_)}};
}

Vector SteklovMap::eval(const Vector& x) const { return steklov_eval(*g_, omega_, x); }

Vector SteklovMap::dir_deriv(const Vector& x, const Vector& h) const {
    if (omega_ == 0.0) return g_->dir_deriv(x, h);
    return steklov_deriv(*g_, omega_, x) * h;
}

std::optional<Matrix> SteklovMap::jacobian(const Vector& x) const {
    if (omega_ == 0.0) return g_->jacobian(x);
    return steklov_deriv(*g_, omega_, x);
}

Matrix smoothing_operator(const MapPtr& g, double omega, const Matrix& X, double tol_group) {
    return eval_spectral(SteklovMap(g, omega), X, tol_group);
}

Matrix smoothing_operator_sym(const MapPtr& g, double omega, const Matrix& X, double tol_group) {
    return eval_spectral_sym(SteklovMap(g, omega), X, tol_group);
}

Matrix smoothing_deriv(const MapPtr& g, double omega, const Matrix& X, const Matrix& H, double tau_dot,
                       double tol_group) {
    if (omega == 0.0) throw Error(ErrorCode::domain_error, "smoothing_deriv needs omega != 0");
    Matrix out = frechet_deriv(SteklovMap(g, omega), X, H, tol_group);
    if (tau_dot != 0.0) {
        const double step = std::abs(omega) * 1e-4;
        out += tau_dot * (smoothing_operator(g, omega + step, X, tol_group) -
                          smoothing_operator(g, omega - step, X, tol_group)) /
               (2.0 * step);
    }
    return out;
}

Matrix smoothing_deriv_sym(const MapPtr& g, double omega, const Matrix& X, const Matrix& H,
                           double tau_dot, double tol_group) {
    if (omega == 0.0) throw Error(ErrorCode::domain_error, "smoothing_deriv needs omega != 0");
    Matrix out = frechet_deriv_sym(SteklovMap(g, omega), X, H, tol_group);
    if (tau_dot != 0.0) {
        const double step = std::abs(omega) * 1e-4;
        out += tau_dot * (smoothing_operator_sym(g, omega + step, X, tol_group) -
                          smoothing_operator_sym(g, omega - step, X, tol_group)) /
               (2.0 * step);
    }
    return out;
}

std::string SweepReport::csv() const {
    std::ostringstream out;
    out << "omega,sup_distance,deriv_norm,distance_bound,lipschitz\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.omega, r.sup_distance,
                      r.deriv_norm, bound_factor * std::sqrt(static_cast<double>(m)) * r.omega, lipschitz);
        out << buf;
    }
    return out.str();
}

SweepReport smoothing_sweep(const MapPtr& g, const MixedSignature& sig, const Matrix& X_bar,
                            const std::vector<double>& omegas, Index samples, double radius,
                            std::uint64_t seed) {
    if (sig.size() != 1) throw Error(ErrorCode::config_error, "smoothing sweep takes a single block");
    const bool sym = sig.front().kind == BlockKind::eigen;
    SweepReport rep;
    rep.m = sig.front().rows;
    rep.lipschitz = g->lipschitz_constant();

    Rng rng = make_rng(seed);
    std::vector<Matrix> points;
    for (Index s = 0; s < samples; ++s) {
        Matrix D = sym ? gaussian_symmetric(rng, X_bar.rows()) : gaussian_matrix(rng, X_bar.rows(), X_bar.cols());
        D *= radius * uniform(rng, 0.0, 1.0) / D.norm();
        points.push_back(X_bar + D);
    }
    std::vector<Matrix> G;
    for (const auto& X : points) G.push_back(sym ? eval_spectral_sym(*g, X) : eval_spectral(*g, X));

    for (double omega : omegas) {
        SweepRow row;
        row.omega = omega;
        const SteklovMap gw(g, omega);
        for (std::size_t s = 0; s < points.size(); ++s) {
            const auto dec = decompose(sig, {points[s]});
            const Matrix T = eval_spectral_mixed(gw, dec).front();
            row.sup_distance = std::max(row.sup_distance, (T - G[s]).norm());
            // Operator norm of the X-derivative through its dense matrix.
            const FrechetOperator F(gw, dec);
            const Index rows = X_bar.rows();
            const Index cols = X_bar.cols();
            Matrix D(rows * cols, rows * cols);
            Matrix E = Matrix::Zero(rows, cols);
            for (Index k = 0; k < rows * cols; ++k) {
                E(k % rows, k / rows) = 1.0;
                const Matrix R = F.apply({E}).front();
                E(k % rows, k / rows) = 0.0;
                D.col(k) = Eigen::Map<const Vector>(R.data(), R.size());
            }
            if (sym) {
                // Restrict to symmetric directions: average the transposed columns.
                Matrix Psym = Matrix::Zero(rows * cols, rows * cols);
                for (Index j = 0; j < cols; ++j) {
                    for (Index i = 0; i < rows; ++i) {
                        Psym(i + j * rows, i + j * rows) += 0.5;
                        Psym(j + i * rows, i + j * rows) += 0.5;
                    }
                }
                D = D * Psym;
            }
            Eigen::JacobiSVD<Matrix> svd(D);
            row.deriv_norm = std::max(row.deriv_norm, svd.singularValues()(0));
        }
        rep.rows.push_back(row);
    }
    for (std::size_t r = 0; r < rep.rows.size(); ++r) {
        const auto& row = rep.rows[r];
        if (r > 0 && rep.rows[r - 1].omega > row.omega && row.sup_distance > rep.rows[r - 1].sup_distance + 1e-13) {
            rep.nonincreasing = false;
        }
        if (row.sup_distance > rep.bound_factor * std::sqrt(static_cast<double>(rep.m)) * std::abs(row.omega)) {
            rep.within_bound = false;
        }
        if (row.deriv_norm > rep.lipschitz * (1.0 + 1e-6)) rep.deriv_bounded = false;
    }
    return rep;
}

}  // namespace specop
