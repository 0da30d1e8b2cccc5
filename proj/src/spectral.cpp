#include "specop/spectral.hpp"

#include "specop/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace specop {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Signatures and mixed-point arithmetic

BlockSignature vector_signature(const MixedSignature& sig) {
    BlockSignature out;
    out.reserve(sig.size());
    for (const auto& b : sig) out.push_back({b.kind, b.rows});
    return out;
}

MixedSignature signature_of(const MixedPoint& X, const std::vector<BlockKind>& kinds) {
    if (X.size() != kinds.size()) throw Error(ErrorCode::shape_mismatch, "block count mismatch");
    MixedSignature sig;
    for (std::size_t k = 0; k < X.size(); ++k) sig.push_back({kinds[k], X[k].rows(), X[k].cols()});
    return sig;
}

void require_signature(const MixedSignature& sig, const MixedPoint& X, const char* what) {
    if (sig.empty()) throw Error(ErrorCode::shape_mismatch, std::string(what) + ": empty signature");
    if (X.size() != sig.size()) {
        throw Error(ErrorCode::shape_mismatch, std::string(what) + ": block count mismatch");
    }
    for (std::size_t k = 0; k < sig.size(); ++k) {
        const auto& b = sig[k];
        if (b.rows <= 0 || b.cols <= 0 || b.rows > b.cols ||
            (b.kind == BlockKind::eigen && b.rows != b.cols)) {
            throw Error(ErrorCode::shape_mismatch, std::string(what) + ": invalid block shape");
        }
        if (X[k].rows() != b.rows || X[k].cols() != b.cols) {
            throw Error(ErrorCode::shape_mismatch,
                        std::string(what) + ": block " + std::to_string(k) + " has wrong shape");
        }
        require_finite(X[k], what);
    }
}

MixedPoint zeros_like(const MixedSignature& sig) {
    MixedPoint out;
    for (const auto& b : sig) out.push_back(Matrix::Zero(b.rows, b.cols));
    return out;
}

MixedPoint axpy(double a, const MixedPoint& X, const MixedPoint& Y) {
    if (X.size() != Y.size()) throw Error(ErrorCode::shape_mismatch, "block count mismatch");
    MixedPoint out(X.size());
    for (std::size_t k = 0; k < X.size(); ++k) out[k] = a * X[k] + Y[k];
    return out;
}

double inner(const MixedPoint& X, const MixedPoint& Y) {
    double s = 0.0;
    for (std::size_t k = 0; k < X.size(); ++k) s += X[k].cwiseProduct(Y[k]).sum();
    return s;
}

double norm(const MixedPoint& X) { return std::sqrt(inner(X, X)); }

MixedSignature rect_signature(Index m, Index n) { return {{BlockKind::singular, m, n}}; }
MixedSignature sym_signature(Index m) { return {{BlockKind::eigen, m, m}}; }

// ---------------------------------------------------------------------------
// Decompositions

BlockDecomposition block_from(const SpectralDecomposition& d) {
    return {BlockKind::singular, d.U, d.sigma, d.V, d.partition};
}

BlockDecomposition block_from(const EigDecomposition& d) {
    return {BlockKind::eigen, d.P, d.lambda, d.P, d.partition};
}

MixedDecomposition decompose(const MixedSignature& sig, const MixedPoint& X, double tol_group) {
    if (!(tol_group >= 0.0)) throw Error(ErrorCode::config_error, "tol_group must be >= 0");
    require_signature(sig, X, "spectral operator argument");
    MixedDecomposition dec;
    dec.signature = sig;
    dec.tol_group = tol_group;
    Index total = 0;
    for (std::size_t k = 0; k < sig.size(); ++k) {
        if (sig[k].kind == BlockKind::singular) {
            dec.blocks.push_back(block_from(svd_ordered(X[k], tol_group)));
        } else {
            dec.blocks.push_back(block_from(eig_ordered(symmetrize_from_lower(X[k]), tol_group)));
        }
        dec.offsets.push_back(total);
        total += sig[k].rows;
    }
    dec.kappa.resize(total);
    for (std::size_t k = 0; k < sig.size(); ++k) {
        dec.kappa.segment(dec.offsets[k], sig[k].rows) = dec.blocks[k].s;
    }
    return dec;
}

MixedPoint reassemble(const MixedDecomposition& dec, const Vector& y) {
    MixedPoint out;
    for (std::size_t k = 0; k < dec.blocks.size(); ++k) {
        const auto& b = dec.blocks[k];
        const Index m = dec.signature[k].rows;
        const Vector yk = y.segment(dec.offsets[k], m);
        if (b.kind == BlockKind::singular) {
            out.push_back((b.U * yk.asDiagonal()) * b.V.leftCols(m).transpose());
        } else {
            const Matrix Y = (b.U * yk.asDiagonal()) * b.U.transpose();
            out.push_back(0.5 * (Y + Y.transpose()));
        }
    }
    return out;
}

namespace {

void require_support(const SymmetricMap& g, const MixedSignature& sig) {
    for (const auto& b : sig) {
        if (!g.supports(b.kind)) {
            throw Error(ErrorCode::unsupported, g.name() + " is not symmetric on " +
                                                    std::string(to_string(b.kind)) + " blocks");
        }
    }
}

Vector eval_checked(const SymmetricMap& g, const Vector& x) {
    Vector y = eval(g, x);
    if (y.size() != x.size()) throw Error(ErrorCode::shape_mismatch, g.name() + " changed the length");
    if (!y.allFinite()) throw Error(ErrorCode::non_finite, g.name() + " produced NaN/Inf");
    return y;
}

}  // namespace

// ---------------------------------------------------------------------------
// Evaluation

MixedPoint eval_spectral_mixed(const SymmetricMap& g, const MixedDecomposition& dec) {
    require_support(g, dec.signature);
    return reassemble(dec, eval_checked(g, dec.kappa));
}

MixedPoint eval_spectral_mixed(const SymmetricMap& g, const MixedSignature& sig, const MixedPoint& X,
                               double tol_group) {
    require_support(g, sig);
    return eval_spectral_mixed(g, decompose(sig, X, tol_group));
}

Matrix eval_spectral(const SymmetricMap& g, const Matrix& X, double tol_group) {
    if (X.rows() > X.cols()) return eval_spectral(g, Matrix(X.transpose()), tol_group).transpose();
    return eval_spectral_mixed(g, rect_signature(X.rows(), X.cols()), {X}, tol_group).front();
}

Matrix eval_spectral_sym(const SymmetricMap& g, const Matrix& X, double tol_group) {
    require_square(X, "symmetric argument");
    return eval_spectral_mixed(g, sym_signature(X.rows()), {X}, tol_group).front();
}

// ---------------------------------------------------------------------------
// Derivative tables

namespace {

// Tables of one block given the block slice of g(kappa) and, unless the zero
// convention is requested, the block slice of g'(kappa).
DerivativeTables block_tables(const BlockDecomposition& b, Index n, const Vector& gv,
                              const Matrix* J, bool zero) {
    const Index m = b.s.size();
    const auto& p = b.partition;
    const Vector& s = b.s;
    DerivativeTables t;
    t.kind = b.kind;
    t.sigma = s;
    t.n = n;
    t.zero_convention = zero;
    t.E1.resize(m, m);
    for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < m; ++i) {
            if (i == j) {
                t.E1(i, j) = zero ? 0.0 : (*J)(i, i);
            } else if (p.same_cluster(i, j)) {
                t.E1(i, j) = zero ? 0.0 : (*J)(i, i) - (*J)(i, j);
            } else {
                t.E1(i, j) = (gv(i) - gv(j)) / (s(i) - s(j));
            }
        }
    }
    if (b.kind == BlockKind::singular) {
        t.E2.resize(m, m);
        for (Index j = 0; j < m; ++j) {
            for (Index i = 0; i < m; ++i) {
                if (p.in_zero_set(i) && p.in_zero_set(j)) {
                    t.E2(i, j) = zero ? 0.0 : (*J)(i, i);
                } else {
                    t.E2(i, j) = (gv(i) + gv(j)) / (s(i) + s(j));
                }
            }
        }
#ifdef SPECOP_NEGCTL_FLIP_E2
        t.E2 = -t.E2;
#endif
        t.F.resize(m, n - m);
        for (Index i = 0; i < m; ++i) {
            const double f = p.in_zero_set(i) ? (zero ? 0.0 : (*J)(i, i)) : gv(i) / s(i);
            t.F.row(i).setConstant(f);
        }
    }
    if (!zero) {
        t.C = *J;
        t.C.diagonal().setZero();
    }
    return t;
}

json matrix_json(const Matrix& A) {
    json rows = json::array();
    for (Index i = 0; i < A.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

json DerivativeTables::to_json() const {
    json j;
    j["kind"] = specop::to_string(kind);
    j["sigma"] = std::vector<double>(sigma.data(), sigma.data() + sigma.size());
    j["n"] = n;
    j["zero_convention"] = zero_convention;
    j["E1"] = matrix_json(E1);
    if (kind == BlockKind::singular) {
        j["E2"] = matrix_json(E2);
        j["F"] = matrix_json(F);
    }
    if (C.size() > 0) j["C"] = matrix_json(C);
    return j;
}

json MixedTables::to_json() const {
    json j;
    j["zero_convention"] = zero_convention;
    j["blocks"] = json::array();
    for (const auto& b : blocks) j["blocks"].push_back(b.to_json());
    if (C.size() > 0) j["C"] = matrix_json(C);
    return j;
}

MixedTables mixed_tables(const SymmetricMap& g, const MixedDecomposition& dec, bool zero_convention) {
    require_support(g, dec.signature);
    const Vector gv = eval_checked(g, dec.kappa);
    std::optional<Matrix> J;
    if (!zero_convention) {
        J = jacobian(g, dec.kappa);
        if (!J) throw Error(ErrorCode::not_differentiable, g.name() + " is not differentiable at kappa(X)");
        if (J->rows() != dec.kappa.size() || J->cols() != dec.kappa.size()) {
            throw Error(ErrorCode::shape_mismatch, g.name() + " returned a Jacobian of the wrong size");
        }
    }
    MixedTables t;
    t.zero_convention = zero_convention;
    for (std::size_t k = 0; k < dec.blocks.size(); ++k) {
        const Index off = dec.offsets[k];
        const Index m = dec.signature[k].rows;
        Matrix Jk;
        if (J) Jk = J->block(off, off, m, m);
        t.blocks.push_back(block_tables(dec.blocks[k], dec.signature[k].cols, gv.segment(off, m),
                                        J ? &Jk : nullptr, zero_convention));
    }
    if (J) {
        t.C = *J;
        t.C.diagonal().setZero();
    }
    return t;
}

DerivativeTables derivative_tables(const SymmetricMap& g, const Vector& sigma, Index n,
                                   bool zero_convention, double tol_group) {
    const Index m = sigma.size();
    if (m == 0 || n < m) throw Error(ErrorCode::shape_mismatch, "derivative tables need 0 < m <= n");
    for (Index i = 0; i < m; ++i) {
        if (sigma(i) < 0.0 || (i > 0 && sigma(i) > sigma(i - 1))) {
            throw Error(ErrorCode::domain_error, "singular values must be nonnegative and nonincreasing");
        }
    }
    MixedDecomposition dec;
    dec.signature = rect_signature(m, n);
    dec.tol_group = tol_group;
    BlockDecomposition b;
    b.kind = BlockKind::singular;
    b.s = sigma;
    b.partition = partition_spectrum(sigma, n, true, grouping_threshold(tol_group, sigma(0)));
    dec.blocks.push_back(std::move(b));
    dec.offsets = {0};
    dec.kappa = sigma;
    return mixed_tables(g, dec, zero_convention).blocks.front();
}

DerivativeTables derivative_tables_sym(const SymmetricMap& g, const Vector& lambda,
                                       bool zero_convention, double tol_group) {
    const Index m = lambda.size();
    if (m == 0) throw Error(ErrorCode::shape_mismatch, "derivative tables need m > 0");
    for (Index i = 1; i < m; ++i) {
        if (lambda(i) > lambda(i - 1)) throw Error(ErrorCode::domain_error, "eigenvalues must be nonincreasing");
    }
    MixedDecomposition dec;
    dec.signature = sym_signature(m);
    dec.tol_group = tol_group;
    BlockDecomposition b;
    b.kind = BlockKind::eigen;
    b.s = lambda;
    const double scale = std::max(std::abs(lambda(0)), std::abs(lambda(m - 1)));
    b.partition = partition_spectrum(lambda, m, false, grouping_threshold(tol_group, scale));
    dec.blocks.push_back(std::move(b));
    dec.offsets = {0};
    dec.kappa = lambda;
    return mixed_tables(g, dec, zero_convention).blocks.front();
}

// ---------------------------------------------------------------------------
// Split

SplitResult split_GS_GR(const SymmetricMap& g, const Matrix& X_bar, const Matrix& X, double tol_group) {
    if (X_bar.rows() != X.rows() || X_bar.cols() != X.cols()) {
        throw Error(ErrorCode::shape_mismatch, "X and X_bar differ in shape");
    }
    if (X.rows() > X.cols()) {
        auto r = split_GS_GR(g, Matrix(X_bar.transpose()), Matrix(X.transpose()), tol_group);
        return {r.GS.transpose(), r.GR.transpose()};
    }
    require_support(g, rect_signature(X.rows(), X.cols()));
    const auto dbar = svd_ordered(X_bar, tol_group);
    const auto d = svd_ordered(X, tol_group);
    const auto& p = dbar.partition;

    // Cluster boundaries of X_bar, including the one in front of b.
    std::vector<Index> starts;
    for (const auto& a : p.groups) starts.push_back(a.begin);
    if (!p.zero_set.empty()) starts.push_back(p.zero_set.begin);
    for (Index i : starts) {
        if (i == 0) continue;
        const double gap_bar = dbar.sigma(i - 1) - dbar.sigma(i);
        const double gap = d.sigma(i - 1) - d.sigma(i);
        if (gap < 0.5 * gap_bar) {
            throw Error(ErrorCode::partition_mismatch,
                        "spectrum of X crossed a group boundary of X_bar at index " + std::to_string(i));
        }
    }

    const Vector gbar = eval_checked(g, dbar.sigma);
    Matrix GS = Matrix::Zero(X.rows(), X.cols());
    for (const auto& a : p.groups) {
        const double value = gbar.segment(a.begin, a.size()).mean();
        GS.noalias() += value * d.U.middleCols(a.begin, a.size()) *
                        d.V.middleCols(a.begin, a.size()).transpose();
    }
    const Matrix G = reassemble(
        MixedDecomposition{rect_signature(X.rows(), X.cols()), {block_from(d)}, d.sigma, {0}, tol_group},
        eval_checked(g, d.sigma)).front();
    return {GS, G - GS};
}

// ---------------------------------------------------------------------------
// Frechet derivative

MixedPoint apply_tables(const MixedDecomposition& dec, const MixedTables& tables, const MixedPoint& H) {
    require_signature(dec.signature, H, "derivative direction");
    const std::size_t K = dec.blocks.size();
    std::vector<Matrix> At(K);
    Vector d(dec.kappa.size());
    for (std::size_t k = 0; k < K; ++k) {
        const auto& b = dec.blocks[k];
        At[k] = b.U.transpose() * H[k] * b.V;
        d.segment(dec.offsets[k], dec.signature[k].rows) = At[k].diagonal();
    }
    Vector Cd = Vector::Zero(d.size());
    if (tables.C.size() > 0) Cd = tables.C * d;

    MixedPoint out(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto& b = dec.blocks[k];
        const auto& t = tables.blocks[k];
        const Index m = dec.signature[k].rows;
        const Index n = dec.signature[k].cols;
        const Vector cd = Cd.segment(dec.offsets[k], m);
        if (b.kind == BlockKind::singular) {
            const Matrix A1 = At[k].leftCols(m);
            const Matrix S = 0.5 * (A1 + A1.transpose());
            const Matrix T = 0.5 * (A1 - A1.transpose());
            Matrix R(m, n);
            R.leftCols(m) = t.E1.cwiseProduct(S) + t.E2.cwiseProduct(T);
            R.leftCols(m).diagonal() += cd;
            if (n > m) R.rightCols(n - m) = t.F.cwiseProduct(At[k].rightCols(n - m));
            out[k] = b.U * R * b.V.transpose();
        } else {
            Matrix R = t.E1.cwiseProduct(At[k]);
            R.diagonal() += cd;
            out[k] = b.U * R * b.U.transpose();
        }
    }
    return out;
}

FrechetOperator::FrechetOperator(const SymmetricMap& g, MixedDecomposition dec)
    : dec_(std::move(dec)), tables_(mixed_tables(g, dec_, false)) {}

MixedPoint FrechetOperator::apply(const MixedPoint& H) const { return apply_tables(dec_, tables_, H); }

MixedPoint frechet_deriv_mixed(const SymmetricMap& g, const MixedSignature& sig, const MixedPoint& X,
                               const MixedPoint& H, double tol_group) {
    return FrechetOperator(g, decompose(sig, X, tol_group)).apply(H);
}

Matrix frechet_deriv(const SymmetricMap& g, const Matrix& X, const Matrix& H, double tol_group) {
    if (X.rows() > X.cols()) {
        return frechet_deriv(g, Matrix(X.transpose()), Matrix(H.transpose()), tol_group).transpose();
    }
    return frechet_deriv_mixed(g, rect_signature(X.rows(), X.cols()), {X}, {H}, tol_group).front();
}

Matrix frechet_deriv_sym(const SymmetricMap& g, const Matrix& X, const Matrix& H, double tol_group) {
    require_square(X, "symmetric argument");
    return frechet_deriv_mixed(g, sym_signature(X.rows()), {X}, {H}, tol_group).front();
}

// ---------------------------------------------------------------------------
// Directional derivative

DirectionalDerivative::DirectionalDerivative(const SymmetricMap& g, MixedDecomposition dec)
    : dec_(std::move(dec)), zero_tables_(mixed_tables(g, dec_, true)) {
    if (!g.capabilities().has_dir_deriv) {
        throw Error(ErrorCode::unsupported, g.name() + " has no directional derivative");
    }
    phi_ = g.directional_map(dec_.kappa);
    for (std::size_t k = 0; k < dec_.blocks.size(); ++k) {
        const auto& p = dec_.blocks[k].partition;
        for (const auto& a : p.groups) inner_sig_.push_back({BlockKind::eigen, a.size(), a.size()});
        if (!p.zero_set.empty()) {
            inner_sig_.push_back({BlockKind::singular, p.zero_set.size(),
                                  dec_.signature[k].cols - p.nonzero_count()});
        }
    }
}

MixedPoint DirectionalDerivative::smooth_part(const MixedPoint& H) const {
    return apply_tables(dec_, zero_tables_, H);
}

MixedPoint DirectionalDerivative::inner_project(const MixedPoint& H) const {
    require_signature(dec_.signature, H, "directional derivative direction");
    MixedPoint out;
    for (std::size_t k = 0; k < dec_.blocks.size(); ++k) {
        const auto& b = dec_.blocks[k];
        const Matrix Ht = b.U.transpose() * H[k] * b.V;
        for (const auto& a : b.partition.groups) {
            const Matrix D = Ht.block(a.begin, a.begin, a.size(), a.size());
            out.push_back(0.5 * (D + D.transpose()));
        }
        const auto& z = b.partition.zero_set;
        if (!z.empty()) {
            const Index na = b.partition.nonzero_count();
            out.push_back(Ht.block(z.begin, na, z.size(), dec_.signature[k].cols - na));
        }
    }
    return out;
}

MixedPoint DirectionalDerivative::outer_embed(const MixedPoint& Y) const {
    require_signature(inner_sig_, Y, "inner point");
    MixedPoint out;
    std::size_t q = 0;
    for (std::size_t k = 0; k < dec_.blocks.size(); ++k) {
        const auto& b = dec_.blocks[k];
        Matrix Z = Matrix::Zero(dec_.signature[k].rows, dec_.signature[k].cols);
        for (const auto& a : b.partition.groups) Z.block(a.begin, a.begin, a.size(), a.size()) = Y[q++];
        const auto& z = b.partition.zero_set;
        if (!z.empty()) {
            const Index na = b.partition.nonzero_count();
            Z.block(z.begin, na, z.size(), dec_.signature[k].cols - na) = Y[q++];
        }
        out.push_back(b.U * Z * b.V.transpose());
    }
    return out;
}

MixedPoint DirectionalDerivative::apply(const MixedPoint& H) const {
    const MixedPoint inner_value = eval_spectral_mixed(*phi_, inner_sig_, inner_project(H), dec_.tol_group);
    return axpy(1.0, smooth_part(H), outer_embed(inner_value));
}

MixedPoint dir_deriv_spectral_mixed(const SymmetricMap& g, const MixedSignature& sig,
                                    const MixedPoint& X_bar, const MixedPoint& H, double tol_group) {
    return DirectionalDerivative(g, decompose(sig, X_bar, tol_group)).apply(H);
}

Matrix dir_deriv_spectral(const SymmetricMap& g, const Matrix& X_bar, const Matrix& H, double tol_group) {
    if (X_bar.rows() > X_bar.cols()) {
        return dir_deriv_spectral(g, Matrix(X_bar.transpose()), Matrix(H.transpose()), tol_group)
            .transpose();
    }
    return dir_deriv_spectral_mixed(g, rect_signature(X_bar.rows(), X_bar.cols()), {X_bar}, {H},
                                    tol_group)
        .front();
}

Matrix dir_deriv_spectral_sym(const SymmetricMap& g, const Matrix& X_bar, const Matrix& H,
                              double tol_group) {
    require_square(X_bar, "symmetric base point");
    return dir_deriv_spectral_mixed(g, sym_signature(X_bar.rows()), {X_bar}, {H}, tol_group).front();
}

}  // namespace specop
