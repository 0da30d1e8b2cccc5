#include "specop/ncm.hpp"

#include "specop/error.hpp"
#include "specop/jacobian.hpp"
#include "specop/random.hpp"

#include <cmath>

namespace specop {

namespace {

constexpr double cg_loading = 1e-10;

struct Dual {
    Matrix X;
    Vector grad;
    double value = 0.0;
};

Dual evaluate(const SymmetricMap& psd, const Matrix& A, const Vector& y) {
    Dual d;
    Matrix Z = A;
    Z.diagonal() += y;
    d.X = eval_spectral_sym(psd, Z);
    d.grad = d.X.diagonal() - Vector::Ones(y.size());
    d.value = 0.5 * d.X.squaredNorm() - y.sum();
    return d;
}

// Conjugate gradients on (V + loading I) d = b, V(h) = diag(W(Diag(h))).
// Returns false on a curvature breakdown.
bool conjugate_gradient(const JacobianHandle& W, double loading, const Vector& b, double tol,
                        Index max_iter, Vector& x, Index& iters) {
    const Index n = b.size();
    const auto apply = [&](const Vector& h) {
        const Matrix H = h.asDiagonal();
        Vector out = W.apply(H).diagonal();
        return Vector(out + loading * h);
    };
    x = Vector::Zero(n);
    Vector r = b;
    Vector p = r;
    double rr = r.squaredNorm();
    const double stop = tol * tol;
    for (iters = 0; iters < max_iter && rr > stop; ++iters) {
        const Vector Ap = apply(p);
        const double curv = p.dot(Ap);
        if (!(curv > 1e-14 * p.squaredNorm())) return false;
        const double alpha = rr / curv;
        x += alpha * p;
        r -= alpha * Ap;
        const double rr_next = r.squaredNorm();
        p = r + (rr_next / rr) * p;
        rr = rr_next;
    }
    return std::isfinite(rr);
}

}  // namespace

nlohmann::json NcmResult::log() const {
    return {{"iterations", iterations},
            {"residuals", residuals},
            {"step_sizes", step_sizes},
            {"cg_iterations", cg_iterations},
            {"loaded_steps", loaded_steps}};
}

NcmResult solve_ncm(const NcmProblem& problem) {
    const Matrix& A = problem.A;
    if (A.rows() != A.cols()) throw Error(ErrorCode::shape_mismatch, "ncm needs a square matrix");
    if (!A.allFinite()) throw Error(ErrorCode::non_finite, "ncm input has NaN/Inf");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff())) {
        throw Error(ErrorCode::domain_error, "ncm input is not symmetric");
    }
    if (!(problem.tol > 0.0)) throw Error(ErrorCode::config_error, "ncm tol must be > 0");
    const Index n = A.rows();
    const MapPtr psd = psd_projection();
    const Matrix As = sym_part(A);

    NcmResult res;
    res.y = Vector::Ones(n) - As.diagonal();
    Dual cur = evaluate(*psd, As, res.y);
    res.residuals.push_back(cur.grad.norm());

    for (Index k = 0; res.residuals.back() > problem.tol; ++k) {
        if (k >= problem.max_iter) {
            throw Error(ErrorCode::max_iterations, "ncm did not converge in " + std::to_string(problem.max_iter) +
                                                       " iterations (residual " +
                                                       std::to_string(res.residuals.back()) + ")");
        }
        Matrix Z = As;
        Z.diagonal() += res.y;
        const JacobianHandle W =
            sample_clarke_element_sym(*psd, Z, derive_seed(problem.seed, static_cast<std::uint64_t>(k)));

        const double gnorm = cur.grad.norm();
        const double cg_tol = std::min(problem.cg_tol, gnorm) * gnorm;
        Vector d;
        Index iters = 0;
        if (!conjugate_gradient(W, 0.0, -cur.grad, cg_tol, problem.cg_max_iter, d, iters)) {
            ++res.loaded_steps;
            if (!conjugate_gradient(W, cg_loading, -cur.grad, cg_tol, problem.cg_max_iter, d, iters)) {
                throw Error(ErrorCode::linear_solve_failure, "CG broke down on the Newton system");
            }
        }
        res.cg_iterations.push_back(iters);

        // Armijo backtracking on the dual objective. Near the solution the
        // objective decrease drowns in rounding, so a step that cuts the
        // gradient norm by 10% is accepted as well.
        const double slope = cur.grad.dot(d);
        double alpha = 1.0;
        Dual next = evaluate(*psd, As, res.y + d);
        const auto accept = [&](const Dual& t) {
            return t.value <= cur.value + 1e-4 * alpha * slope || t.grad.norm() <= 0.9 * gnorm;
        };
        for (int back = 0; !accept(next); ++back) {
            if (back >= 50) throw Error(ErrorCode::linear_solve_failure, "line search failed");
            alpha *= 0.5;
            next = evaluate(*psd, As, res.y + alpha * d);
        }
        res.y += alpha * d;
        cur = std::move(next);
        res.step_sizes.push_back(alpha);
        res.residuals.push_back(cur.grad.norm());
        res.iterations = k + 1;
    }
    res.X = cur.X;
    return res;
}

Matrix random_ncm_instance(Index n, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x5eed);
    Matrix A = Matrix::Identity(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) A(i, j) = A(j, i) = uniform(rng, -1.0, 1.0);
    }
    return A;
}

}  // namespace specop
