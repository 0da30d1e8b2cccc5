#include "specop/linalg.hpp"

#include "specop/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

namespace specop {

bool BlockPartition::same_cluster(Index i, Index j) const noexcept {
    if (in_zero_set(i) || in_zero_set(j)) return in_zero_set(i) && in_zero_set(j);
    return group_of[static_cast<std::size_t>(i)] == group_of[static_cast<std::size_t>(j)];
}

double grouping_threshold(double tol_group, double scale) noexcept {
    return tol_group * std::max(1.0, std::abs(scale));
}

BlockPartition partition_spectrum(const Vector& values, Index n, bool singular, double threshold) {
    const Index m = values.size();
    BlockPartition p;
    p.m = m;
    p.n = n;
    p.tail = {m, n};
    p.group_of.assign(static_cast<std::size_t>(m), -1);
    p.rank_before.assign(static_cast<std::size_t>(m), 1);
    p.rank_after.assign(static_cast<std::size_t>(m), 0);

    // Clusters by consecutive gaps.
    std::vector<IndexRange> clusters;
    for (Index i = 0; i < m; ++i) {
        if (clusters.empty() || values(i - 1) - values(i) > threshold) {
            clusters.push_back({i, i + 1});
        } else {
            clusters.back().end = i + 1;
        }
    }

    Index zero_begin = m;
    for (const auto& c : clusters) {
        const double leader = values(c.begin);
        if (singular && std::abs(leader) <= threshold) {
            zero_begin = c.begin;
            break;
        }
        p.groups.push_back(c);
        p.group_values.push_back(leader);
    }
    if (singular) {
        // A trailing cluster may straddle the threshold; everything from the
        // first index within the threshold of zero belongs to b.
        for (Index i = 0; i < m; ++i) {
            if (std::abs(values(i)) <= threshold) {
                zero_begin = std::min(zero_begin, i);
                break;
            }
        }
        while (!p.groups.empty() && p.groups.back().begin >= zero_begin) {
            p.groups.pop_back();
            p.group_values.pop_back();
        }
        if (!p.groups.empty() && p.groups.back().end > zero_begin) p.groups.back().end = zero_begin;
        p.zero_set = {zero_begin, m};
    } else {
        p.zero_set = {m, m};
    }

    for (std::size_t l = 0; l < p.groups.size(); ++l) {
        double mean = 0.0;
        for (Index i = p.groups[l].begin; i < p.groups[l].end; ++i) mean += values(i);
        p.group_values[l] = mean / static_cast<double>(p.groups[l].size());
        for (Index i = p.groups[l].begin; i < p.groups[l].end; ++i) {
            p.group_of[static_cast<std::size_t>(i)] = static_cast<Index>(l);
        }
    }
    auto fill_ranks = [&](const IndexRange& r) {
        for (Index i = r.begin; i < r.end; ++i) {
            p.rank_before[static_cast<std::size_t>(i)] = i - r.begin + 1;
            p.rank_after[static_cast<std::size_t>(i)] = r.end - i - 1;
        }
    };
    for (const auto& g : p.groups) fill_ranks(g);
    if (!p.zero_set.empty()) fill_ranks(p.zero_set);
    return p;
}

void require_finite(const Matrix& X, const char* what) {
    if (!X.allFinite()) throw Error(ErrorCode::non_finite, std::string(what) + " has NaN/Inf entries");
}

void require_rect(const Matrix& X, const char* what) {
    if (X.rows() == 0 || X.cols() == 0) {
        throw Error(ErrorCode::shape_mismatch, std::string(what) + " is empty");
    }
    if (X.rows() > X.cols()) {
        throw Error(ErrorCode::shape_mismatch,
                    std::string(what) + " must have rows <= cols (transpose first)");
    }
    require_finite(X, what);
}

void require_square(const Matrix& X, const char* what) {
    if (X.rows() == 0 || X.rows() != X.cols()) {
        throw Error(ErrorCode::shape_mismatch, std::string(what) + " must be square and nonempty");
    }
    require_finite(X, what);
}

namespace {

// Stable descending order of `values`.
std::vector<Index> descending_order(const Vector& values) {
    std::vector<Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return values(a) > values(b); });
    return order;
}

}  // namespace

SpectralDecomposition svd_ordered(const Matrix& X, double tol_group) {
    require_rect(X, "svd input");
    const Index m = X.rows();
    const Index n = X.cols();
    Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) {
        throw Error(ErrorCode::decomposition_failure, "Jacobi SVD did not converge");
    }
    const Vector raw = svd.singularValues();
    const auto order = descending_order(raw);

    SpectralDecomposition d;
    d.sigma.resize(m);
    d.U.resize(m, m);
    d.V = svd.matrixV();
    const Matrix& U0 = svd.matrixU();
    const Matrix V0 = svd.matrixV();
    for (Index k = 0; k < m; ++k) {
        const Index src = order[static_cast<std::size_t>(k)];
        d.sigma(k) = raw(src);
        d.U.col(k) = U0.col(src);
        d.V.col(k) = V0.col(src);
    }
    const double thr = grouping_threshold(tol_group, m > 0 ? d.sigma(0) : 0.0);
    d.partition = partition_spectrum(d.sigma, n, true, thr);
    return d;
}

EigDecomposition eig_ordered(const Matrix& X, double tol_group) {
    require_square(X, "eigendecomposition input");
    const Index m = X.rows();
    Eigen::SelfAdjointEigenSolver<Matrix> es(X, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorCode::decomposition_failure, "symmetric eigensolver did not converge");
    }
    const Vector raw = es.eigenvalues();
    const auto order = descending_order(raw);
    EigDecomposition d;
    d.lambda.resize(m);
    d.P.resize(m, m);
    for (Index k = 0; k < m; ++k) {
        const Index src = order[static_cast<std::size_t>(k)];
        d.lambda(k) = raw(src);
        d.P.col(k) = es.eigenvectors().col(src);
    }
    const double scale = m > 0 ? std::max(std::abs(d.lambda(0)), std::abs(d.lambda(m - 1))) : 0.0;
    d.partition = partition_spectrum(d.lambda, m, false, grouping_threshold(tol_group, scale));
    return d;
}

Matrix sym_part(const Matrix& Y) {
    require_square(Y, "S(Y) argument");
    return 0.5 * (Y + Y.transpose());
}

Matrix skew_part(const Matrix& Y) {
    require_square(Y, "T(Y) argument");
    return 0.5 * (Y - Y.transpose());
}

Matrix symmetrize_from_lower(const Matrix& X) {
    Matrix out = X;
    for (Index j = 0; j < X.cols(); ++j) {
        for (Index i = 0; i < j; ++i) out(i, j) = X(j, i);
    }
    return out;
}

std::uint64_t matrix_hash(const Matrix& X) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    const std::int64_t shape[2] = {X.rows(), X.cols()};
    mix(shape, sizeof(shape));
    for (Index j = 0; j < X.cols(); ++j) {
        for (Index i = 0; i < X.rows(); ++i) {
            const double v = X(i, j);
            mix(&v, sizeof(v));
        }
    }
    return h;
}

}  // namespace specop
