#pragma once

// Ordered decompositions, spectrum partitioning and the S/T projections.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace specop {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default relative grouping tolerance; the absolute threshold is
/// tol_group * max(1, largest spectral value).
inline constexpr double default_tol_group = 1e-10;

/// Half-open range [begin, end) of indices.
struct IndexRange {
    Index begin = 0;
    Index end = 0;

    [[nodiscard]] Index size() const noexcept { return end - begin; }
    [[nodiscard]] bool empty() const noexcept { return end <= begin; }
    [[nodiscard]] bool contains(Index i) const noexcept { return i >= begin && i < end; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Partition of an ordered spectrum into clusters of equal values.
///
/// For singular spectra the groups a_1..a_r hold the distinct nonzero values
/// and `zero_set` holds b; `tail` is c = {m, ..., n-1}. For eigenvalue spectra
/// every cluster (including a zero cluster) is a group and `zero_set` is empty.
struct BlockPartition {
    Index m = 0;
    Index n = 0;
    std::vector<IndexRange> groups;
    std::vector<double> group_values;
    IndexRange zero_set;
    IndexRange tail;
    /// Group id of each index, -1 for members of the zero set.
    std::vector<Index> group_of;
    /// l_i: equal values ranked before i, including i.
    std::vector<Index> rank_before;
    /// l~_i: equal values ranked after i.
    std::vector<Index> rank_after;

    [[nodiscard]] Index num_groups() const noexcept { return static_cast<Index>(groups.size()); }
    [[nodiscard]] bool in_zero_set(Index i) const noexcept { return zero_set.contains(i); }
    /// True when i and j belong to the same cluster (same group, or both in b).
    [[nodiscard]] bool same_cluster(Index i, Index j) const noexcept;
    /// Number of indices with a nonzero value (|a|).
    [[nodiscard]] Index nonzero_count() const noexcept { return zero_set.begin; }
};

/// Builds the partition of a nonincreasing spectrum. `singular` selects the
/// a/b/c convention; `threshold` is the absolute grouping threshold.
[[nodiscard]] BlockPartition partition_spectrum(const Vector& values, Index n, bool singular,
                                                double threshold);

/// Absolute threshold used for a spectrum whose largest magnitude is `scale`.
[[nodiscard]] double grouping_threshold(double tol_group, double scale) noexcept;

struct SpectralDecomposition {
    Matrix U;      // m x m
    Vector sigma;  // nonincreasing, nonnegative
    Matrix V;      // n x n
    BlockPartition partition;
};

struct EigDecomposition {
    Matrix P;
    Vector lambda;  // nonincreasing
    BlockPartition partition;
};

/// SVD of an m x n matrix with m <= n, singular values sorted nonincreasingly.
[[nodiscard]] SpectralDecomposition svd_ordered(const Matrix& X,
                                                double tol_group = default_tol_group);

/// Eigendecomposition of a symmetric matrix (lower triangle authoritative).
[[nodiscard]] EigDecomposition eig_ordered(const Matrix& X, double tol_group = default_tol_group);

[[nodiscard]] Matrix sym_part(const Matrix& Y);
[[nodiscard]] Matrix skew_part(const Matrix& Y);

/// Mirrors the lower triangle into the upper one.
[[nodiscard]] Matrix symmetrize_from_lower(const Matrix& X);

void require_finite(const Matrix& X, const char* what);
/// Rejects empty matrices, NaN/Inf entries and rows > cols.
void require_rect(const Matrix& X, const char* what);
void require_square(const Matrix& X, const char* what);

/// 64-bit FNV-1a over shape and the raw bytes of the entries.
[[nodiscard]] std::uint64_t matrix_hash(const Matrix& X);

}  // namespace specop
