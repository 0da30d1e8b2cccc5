#pragma once

// Independent oracles shared by the unit tests. Nothing here calls the
// derivative code under test.

#include "specop/linalg.hpp"
#include "specop/random.hpp"

#include <functional>

namespace specop::testing {

using MatFn = std::function<Matrix(const Matrix&)>;

/// Central difference (f(X + hH) - f(X - hH)) / 2h.
inline Matrix central_difference(const MatFn& f, const Matrix& X, const Matrix& H, double h = 1e-5) {
    return (f(X + h * H) - f(X - h * H)) / (2.0 * h);
}

/// Forward difference (f(X + hH) - f(X)) / h.
inline Matrix forward_difference(const MatFn& f, const Matrix& X, const Matrix& H, double h) {
    return (f(X + h * H) - f(X)) / h;
}

/// U [Diag(s) 0] V^T with Haar factors.
inline Matrix with_singular_values(Rng& rng, const Vector& s, Index n) {
    const Index m = s.size();
    const Matrix U = random_orthogonal(rng, m);
    const Matrix V = random_orthogonal(rng, n);
    return (U * s.asDiagonal()) * V.leftCols(m).transpose();
}

/// P Diag(l) P^T with a Haar factor, symmetrized exactly.
inline Matrix with_eigenvalues(Rng& rng, const Vector& l) {
    const Matrix P = random_orthogonal(rng, l.size());
    const Matrix X = (P * l.asDiagonal()) * P.transpose();
    return 0.5 * (X + X.transpose());
}

inline Matrix unit_direction(Rng& rng, Index rows, Index cols, bool symmetric = false) {
    Matrix H = symmetric ? gaussian_symmetric(rng, rows) : gaussian_matrix(rng, rows, cols);
    return H / H.norm();
}

inline Matrix diag_rect(const Vector& s, Index n) {
    Matrix X = Matrix::Zero(s.size(), n);
    X.leftCols(s.size()).diagonal() = s;
    return X;
}

/// max(t, 0) applied to the eigenvalues, via an independent solver call.
inline Matrix psd_part(const Matrix& X) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (X + X.transpose()));
    const Vector l = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace specop::testing

namespace specop::testing {

/// Nearest correlation matrix by alternating projections with Dykstra's
/// correction, run until successive iterates move less than `tol`.
inline Matrix ncm_alternating_projections(const Matrix& A, double tol = 1e-12, int max_iter = 200000) {
    Matrix Y = A;
    Matrix dS = Matrix::Zero(A.rows(), A.cols());
    Matrix X = A;
    for (int k = 0; k < max_iter; ++k) {
        const Matrix R = Y - dS;
        X = psd_part(R);
        dS = X - R;
        Matrix Ynext = X;
        Ynext.diagonal().setOnes();
        const double move = (Ynext - Y).norm();
        Y = std::move(Ynext);
        if (move < tol) break;
    }
    return X;
}

}  // namespace specop::testing
