#include "doctest.h"

#include "specop/error.hpp"
#include "specop/ncm.hpp"
#include "support.hpp"

#include <chrono>

using namespace specop;
using namespace specop::testing;

TEST_CASE("identity input") {
    NcmProblem p;
    p.A = Matrix::Identity(4, 4);
    const auto r = solve_ncm(p);
    CHECK(r.iterations <= 1);
    CHECK((r.X - Matrix::Identity(4, 4)).norm() < 1e-12);
    CHECK(r.y.norm() < 1e-12);
}

TEST_CASE("separable diagonal case") {
    NcmProblem p;
    p.A = 2.0 * Matrix::Identity(2, 2);
    const auto r = solve_ncm(p);
    CHECK((r.X - Matrix::Identity(2, 2)).norm() < 1e-10);
    CHECK((r.y + Vector::Ones(2)).norm() < 1e-10);
}

TEST_CASE("random instance against alternating projections") {
    NcmProblem p;
    p.A = random_ncm_instance(30, 11);
    p.tol = 1e-8;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = solve_ncm(p);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(r.iterations <= 15);
    CHECK(secs <= 5.0);
    CHECK(r.residuals.back() <= 1e-8);
    CHECK((r.X.diagonal() - Vector::Ones(30)).cwiseAbs().maxCoeff() <= 1e-8);
    Eigen::SelfAdjointEigenSolver<Matrix> es(r.X);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    const Matrix oracle = ncm_alternating_projections(p.A);
    CHECK((r.X - oracle).norm() <= 1e-6);
    // Quadratic tail.
    const auto& h = r.residuals;
    REQUIRE(h.size() >= 3);
    const double ratio = h[h.size() - 1] / (h[h.size() - 2] * h[h.size() - 2]);
    CHECK(ratio < 1e3);
    for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1] * (1 + 1e-12));
}

TEST_CASE("deterministic given the seed") {
    NcmProblem p;
    p.A = random_ncm_instance(12, 3);
    const auto a = solve_ncm(p);
    const auto b = solve_ncm(p);
    CHECK(a.X == b.X);
    CHECK(a.log() == b.log());
}

TEST_CASE("errors") {
    NcmProblem p;
    p.A = random_ncm_instance(10, 4);
    p.max_iter = 0;
    CHECK_THROWS_AS((void)solve_ncm(p), Error);
    p.max_iter = 50;
    p.A(0, 1) += 1.0;
    CHECK_THROWS_AS((void)solve_ncm(p), Error);
    p.A = Matrix::Zero(2, 3);
    CHECK_THROWS_AS((void)solve_ncm(p), Error);
}
