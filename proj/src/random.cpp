#include "specop/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace specop {

namespace {

std::uint64_t splitmix(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
    return splitmix(splitmix(splitmix(master) ^ (a + 0x632BE59BD9B4E019ULL)) ^
                    (b + 0x85157AF5ULL));
}

Rng make_rng(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return Rng(derive_seed(master, a, b));
}

// The standard distributions are implementation defined; these draws only
// depend on the engine output, so streams are portable across libraries.
double uniform(Rng& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

double standard_normal(Rng& rng) {
    // Marsaglia polar method, discarding the second variate.
    for (;;) {
        const double u = uniform(rng, -1.0, 1.0);
        const double v = uniform(rng, -1.0, 1.0);
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

Index uniform_index(Rng& rng, Index lo, Index hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<Index>(rng() % span);
}

Matrix gaussian_matrix(Rng& rng, Index rows, Index cols) {
    Matrix A(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) A(i, j) = standard_normal(rng);
    }
    return A;
}

Matrix gaussian_symmetric(Rng& rng, Index m) {
    const Matrix A = gaussian_matrix(rng, m, m);
    return 0.5 * (A + A.transpose());
}

Matrix random_orthogonal(Rng& rng, Index m) {
    const Matrix A = gaussian_matrix(rng, m, m);
    Eigen::HouseholderQR<Matrix> qr(A);
    Matrix Q = qr.householderQ();
    const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < m; ++j) {
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    }
    return Q;
}

std::vector<Index> random_permutation(Rng& rng, Index m) {
    std::vector<Index> p(static_cast<std::size_t>(m));
    std::iota(p.begin(), p.end(), Index{0});
    for (Index i = m - 1; i > 0; --i) {
        const Index j = uniform_index(rng, 0, i);
        std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
}

}  // namespace specop
