#pragma once

// Frechet derivatives against central differences at random base points
// whose spectra stay away from kinks and ties.

#include "specop/random.hpp"
#include "specop/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace specop::testing {

struct FdResult {
    std::string map;
    Index points = 0;
    double max_error = 0.0;
};

// Kinks of the built-ins with default parameters, as seen by a spectrum.
inline bool near_kink(const std::string& map, const Vector& s, double margin) {
    std::vector<double> kinks;
    if (map == "soft_threshold" || map == "spectral_ball") kinks = {-1.0, 1.0};
    if (map == "psd_projection") kinks = {0.0};
    if (map == "box_clamp") kinks = {0.0, 1.0};
    if (map == "frobenius_ball") return std::abs(s.norm() - 1.0) < margin;
    for (Index i = 0; i < s.size(); ++i) {
        for (double k : kinks) {
            if (std::abs(s(i) - k) < margin) return true;
        }
    }
    return false;
}

// Sorted spectrum with gaps, kink distances and (singular) values at least `margin`.
inline Vector separated_spectrum(Rng& rng, const std::string& map, Index m, bool eigen, double margin) {
    for (;;) {
        Vector s(m);
        for (Index i = 0; i < m; ++i) s(i) = eigen ? uniform(rng, -3.0, 3.0) : uniform(rng, 0.0, 3.0);
        if (map == "frobenius_ball") s *= uniform(rng, 0.2, 2.0) / s.norm();
        std::sort(s.data(), s.data() + m, std::greater<>());
        bool ok = !near_kink(map, s, margin);
        for (Index i = 0; ok && i + 1 < m; ++i) ok = s(i) - s(i + 1) >= margin;
        if (!eigen && ok) ok = s(m - 1) >= margin;
        if (ok) return s;
    }
}

inline FdResult fd_check(const SymmetricMap& g, const std::string& name, Index points, std::uint64_t seed,
                         double step = 1e-5, double margin = 1e-3) {
    FdResult res;
    res.map = name;
    for (Index p = 0; p < points; ++p) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(p));
        bool eigen = g.supports(BlockKind::eigen) && (!g.supports(BlockKind::singular) || p % 2 == 1);
        const Index m = uniform_index(rng, 1, 10);
        const Index n = eigen ? m : uniform_index(rng, m, 15);
        const Vector s = separated_spectrum(rng, name, m, eigen, margin);
        const Matrix U = random_orthogonal(rng, m);
        const Matrix V = eigen ? U : random_orthogonal(rng, n);
        Matrix D = Matrix::Zero(m, n);
        D.leftCols(m).diagonal() = s;
        Matrix X = U * D * V.transpose();
        Matrix H = eigen ? gaussian_symmetric(rng, m) : gaussian_matrix(rng, m, n);
        if (eigen) X = 0.5 * (X + X.transpose());
        H /= H.norm();
        const auto G = [&](const Matrix& Y) { return eigen ? eval_spectral_sym(g, Y) : eval_spectral(g, Y); };
        const Matrix fd = (G(X + step * H) - G(X - step * H)) / (2.0 * step);
        const Matrix an = eigen ? frechet_deriv_sym(g, X, H) : frechet_deriv(g, X, H);
        res.max_error = std::max(res.max_error, (an - fd).norm() / std::max(1.0, fd.norm()));
        ++res.points;
    }
    return res;
}

}  // namespace specop::testing
