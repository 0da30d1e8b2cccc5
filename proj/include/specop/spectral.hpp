#pragma once

// Spectral operators G(X) over products of symmetric and rectangular blocks,
// their derivative tables, Frechet derivatives and directional derivatives.

#include "specop/linalg.hpp"
#include "specop/symmetric_map.hpp"

#include <json.hpp>

#include <vector>

namespace specop {

/// Shape of one block of a mixed point. Eigen blocks are square.
struct BlockShape {
    BlockKind kind = BlockKind::singular;
    Index rows = 0;
    Index cols = 0;

    friend bool operator==(const BlockShape&, const BlockShape&) = default;
};
using MixedSignature = std::vector<BlockShape>;
using MixedPoint = std::vector<Matrix>;

[[nodiscard]] BlockSignature vector_signature(const MixedSignature& sig);
[[nodiscard]] MixedSignature signature_of(const MixedPoint& X, const std::vector<BlockKind>& kinds);
void require_signature(const MixedSignature& sig, const MixedPoint& X, const char* what);

// Arithmetic on mixed points.
[[nodiscard]] MixedPoint zeros_like(const MixedSignature& sig);
[[nodiscard]] MixedPoint axpy(double a, const MixedPoint& X, const MixedPoint& Y);  // aX + Y
[[nodiscard]] double inner(const MixedPoint& X, const MixedPoint& Y);
[[nodiscard]] double norm(const MixedPoint& X);

/// Ordered decomposition of one block. For eigen blocks V == U and `s`
/// holds the eigenvalues.
struct BlockDecomposition {
    BlockKind kind = BlockKind::singular;
    Matrix U;
    Vector s;
    Matrix V;
    BlockPartition partition;
};

struct MixedDecomposition {
    MixedSignature signature;
    std::vector<BlockDecomposition> blocks;
    /// kappa(X): the concatenated spectra.
    Vector kappa;
    /// Offset of each block inside kappa.
    std::vector<Index> offsets;
    double tol_group = default_tol_group;
};

[[nodiscard]] MixedDecomposition decompose(const MixedSignature& sig, const MixedPoint& X,
                                           double tol_group = default_tol_group);
[[nodiscard]] BlockDecomposition block_from(const SpectralDecomposition& d);
[[nodiscard]] BlockDecomposition block_from(const EigDecomposition& d);

/// Reassembles U [Diag(y) 0] V^T (or P Diag(y) P^T) blockwise.
[[nodiscard]] MixedPoint reassemble(const MixedDecomposition& dec, const Vector& y);

// --- Evaluation ------------------------------------------------------------

[[nodiscard]] MixedPoint eval_spectral_mixed(const SymmetricMap& g, const MixedSignature& sig,
                                             const MixedPoint& X,
                                             double tol_group = default_tol_group);
[[nodiscard]] MixedPoint eval_spectral_mixed(const SymmetricMap& g, const MixedDecomposition& dec);

/// Single rectangular block. Inputs with rows > cols are handled by
/// transposition.
[[nodiscard]] Matrix eval_spectral(const SymmetricMap& g, const Matrix& X,
                                   double tol_group = default_tol_group);
/// Single symmetric block; the lower triangle of X is authoritative.
[[nodiscard]] Matrix eval_spectral_sym(const SymmetricMap& g, const Matrix& X,
                                       double tol_group = default_tol_group);

// --- Derivative tables -----------------------------------------------------

/// Divided-difference tables of g at a block spectrum.
///
/// Singular blocks fill E1, E2 (m x m) and F (m x (n-m)); eigen blocks fill
/// E1 only. The diagonal of E1 holds g'(sigma)_ii and C is the Jacobian with
/// its diagonal removed. In the zero convention every fallback entry and the
/// diagonal of E1 are 0 and C is empty.
struct DerivativeTables {
    BlockKind kind = BlockKind::singular;
    Vector sigma;
    Index n = 0;
    Matrix E1;
    Matrix E2;
    Matrix F;
    Matrix C;
    bool zero_convention = false;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Tables of a whole mixed point. C couples every block through the
/// diagonal and is global (length of kappa squared).
struct MixedTables {
    std::vector<DerivativeTables> blocks;
    Matrix C;
    bool zero_convention = false;

    [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] MixedTables mixed_tables(const SymmetricMap& g, const MixedDecomposition& dec,
                                       bool zero_convention);

/// Tables for a single singular block with spectrum sigma (length m) and n
/// columns. Partition uses `tol_group`.
[[nodiscard]] DerivativeTables derivative_tables(const SymmetricMap& g, const Vector& sigma, Index n,
                                                 bool zero_convention = false,
                                                 double tol_group = default_tol_group);
/// Tables for a single eigen block.
[[nodiscard]] DerivativeTables derivative_tables_sym(const SymmetricMap& g, const Vector& lambda,
                                                     bool zero_convention = false,
                                                     double tol_group = default_tol_group);

// --- Split G = G_S + G_R ---------------------------------------------------

struct SplitResult {
    Matrix GS;
    Matrix GR;
};

/// G_S(X) = sum_l g_l U_l(X) with the group projectors of X taken over the
/// groups of X_bar. Throws PartitionMismatch when the spectrum of X has moved
/// across a group boundary of X_bar.
[[nodiscard]] SplitResult split_GS_GR(const SymmetricMap& g, const Matrix& X_bar, const Matrix& X,
                                      double tol_group = default_tol_group);

// --- Frechet derivative ----------------------------------------------------

/// H -> G'(X) H for a prepared base point at which g is differentiable.
class FrechetOperator {
public:
    FrechetOperator(const SymmetricMap& g, MixedDecomposition dec);

    [[nodiscard]] MixedPoint apply(const MixedPoint& H) const;
    [[nodiscard]] const MixedTables& tables() const noexcept { return tables_; }
    [[nodiscard]] const MixedDecomposition& decomposition() const noexcept { return dec_; }

private:
    MixedDecomposition dec_;
    MixedTables tables_;
};

/// Applies the table formula to H in the base point's own coordinates.
/// Zero-convention tables give G_S'(X_bar) H.
[[nodiscard]] MixedPoint apply_tables(const MixedDecomposition& dec, const MixedTables& tables,
                                      const MixedPoint& H);

[[nodiscard]] MixedPoint frechet_deriv_mixed(const SymmetricMap& g, const MixedSignature& sig,
                                             const MixedPoint& X, const MixedPoint& H,
                                             double tol_group = default_tol_group);
[[nodiscard]] Matrix frechet_deriv(const SymmetricMap& g, const Matrix& X, const Matrix& H,
                                   double tol_group = default_tol_group);
[[nodiscard]] Matrix frechet_deriv_sym(const SymmetricMap& g, const Matrix& X, const Matrix& H,
                                       double tol_group = default_tol_group);

// --- Directional derivative ------------------------------------------------

/// Psi(H) = G_S'(X_bar) H + U_bar Phi^(D(H)) V_bar^T, prepared at X_bar.
///
/// The inner space holds, per outer block, one symmetric block per group
/// and (singular blocks with b nonempty) one |b| x (n - |a|) block.
class DirectionalDerivative {
public:
    DirectionalDerivative(const SymmetricMap& g, MixedDecomposition dec);

    [[nodiscard]] MixedPoint apply(const MixedPoint& H) const;

    /// G_S'(X_bar) H.
    [[nodiscard]] MixedPoint smooth_part(const MixedPoint& H) const;
    /// D(H).
    [[nodiscard]] MixedPoint inner_project(const MixedPoint& H) const;
    /// Places an inner point blockwise and maps it back with U_bar, V_bar.
    [[nodiscard]] MixedPoint outer_embed(const MixedPoint& Y) const;
    [[nodiscard]] const MixedSignature& inner_signature() const noexcept { return inner_sig_; }
    [[nodiscard]] const MapPtr& phi() const noexcept { return phi_; }
    [[nodiscard]] const MixedDecomposition& decomposition() const noexcept { return dec_; }
    [[nodiscard]] const MixedTables& zero_tables() const noexcept { return zero_tables_; }

private:
    MixedDecomposition dec_;
    MixedTables zero_tables_;
    MapPtr phi_;
    MixedSignature inner_sig_;
};

[[nodiscard]] MixedPoint dir_deriv_spectral_mixed(const SymmetricMap& g, const MixedSignature& sig,
                                                  const MixedPoint& X_bar, const MixedPoint& H,
                                                  double tol_group = default_tol_group);
[[nodiscard]] Matrix dir_deriv_spectral(const SymmetricMap& g, const Matrix& X_bar, const Matrix& H,
                                        double tol_group = default_tol_group);
[[nodiscard]] Matrix dir_deriv_spectral_sym(const SymmetricMap& g, const Matrix& X_bar,
                                            const Matrix& H, double tol_group = default_tol_group);

// Single-block helpers.
[[nodiscard]] MixedSignature rect_signature(Index m, Index n);
[[nodiscard]] MixedSignature sym_signature(Index m);

}  // namespace specop
