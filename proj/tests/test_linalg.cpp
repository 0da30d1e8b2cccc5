#include "doctest.h"

#include "specop/error.hpp"
#include "specop/linalg.hpp"
#include "specop/matrix_market.hpp"
#include "specop/random.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using namespace specop;

namespace {
constexpr double eps = std::numeric_limits<double>::epsilon();
}

TEST_CASE("svd_ordered on a diagonal rectangle") {
    Matrix X = Matrix::Zero(2, 3);
    X(0, 0) = 3.0;
    X(1, 1) = 1.0;
    const auto d = svd_ordered(X);
    CHECK(d.sigma(0) == doctest::Approx(3.0));
    CHECK(d.sigma(1) == doctest::Approx(1.0));
    CHECK(d.partition.num_groups() == 2);
    CHECK(d.partition.zero_set.empty());
    CHECK(d.partition.tail == IndexRange{2, 3});
}

TEST_CASE("svd_ordered on the zero matrix") {
    const auto d = svd_ordered(Matrix::Zero(2, 2));
    CHECK(d.sigma.norm() == 0.0);
    CHECK(d.partition.num_groups() == 0);
    CHECK(d.partition.zero_set == IndexRange{0, 2});
    CHECK(d.partition.rank_before[1] == 2);
    CHECK(d.partition.rank_after[0] == 1);
}

TEST_CASE("svd_ordered groups a repeated singular value") {
    Matrix X(2, 2);
    X << 0, 2, 2, 0;
    const auto d = svd_ordered(X);
    CHECK(d.sigma(0) == doctest::Approx(2.0));
    CHECK(d.sigma(1) == doctest::Approx(2.0));
    REQUIRE(d.partition.num_groups() == 1);
    CHECK(d.partition.groups[0] == IndexRange{0, 2});
    CHECK(d.partition.group_values[0] == doctest::Approx(2.0));
}

TEST_CASE("svd_ordered rejects bad input") {
    Matrix X = Matrix::Ones(2, 2);
    X(0, 1) = std::nan("");
    CHECK_THROWS_AS((void)svd_ordered(X), Error);
    try {
        (void)svd_ordered(X);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_finite);
    }
    CHECK_THROWS_AS((void)svd_ordered(Matrix::Ones(3, 2)), Error);
}

TEST_CASE("eig_ordered examples") {
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 2.0;
    D(1, 1) = -1.0;
    const auto d = eig_ordered(D);
    CHECK(d.lambda(0) == doctest::Approx(2.0));
    CHECK(d.lambda(1) == doctest::Approx(-1.0));
    CHECK(d.partition.num_groups() == 2);

    Matrix X(2, 2);
    X << 0, 1, 1, 0;
    const auto e = eig_ordered(X);
    CHECK(e.lambda(0) == doctest::Approx(1.0));
    CHECK(e.lambda(1) == doctest::Approx(-1.0));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(e.P(0, 0)) == doctest::Approx(r));
    CHECK(e.P(0, 0) * e.P(1, 0) == doctest::Approx(0.5));
    CHECK(e.P(0, 1) * e.P(1, 1) == doctest::Approx(-0.5));

    const auto i3 = eig_ordered(Matrix::Identity(3, 3));
    CHECK(i3.partition.num_groups() == 1);
    CHECK(i3.partition.zero_set.empty());
}

TEST_CASE("eig_ordered reads the lower triangle") {
    Matrix X(2, 2);
    X << 1, 99, 0, 1;
    const auto d = eig_ordered(symmetrize_from_lower(X));
    CHECK(d.lambda(0) == doctest::Approx(1.0));
    CHECK(d.lambda(1) == doctest::Approx(1.0));
}

TEST_CASE("sym_part and skew_part") {
    Matrix Y(2, 2);
    Y << 0, 2, 0, 0;
    Matrix S(2, 2), T(2, 2);
    S << 0, 1, 1, 0;
    T << 0, 1, -1, 0;
    CHECK((sym_part(Y) - S).norm() == 0.0);
    CHECK((skew_part(Y) - T).norm() == 0.0);
    CHECK(skew_part(S).norm() == 0.0);
    CHECK(sym_part(T).norm() == 0.0);

    Rng rng = make_rng(3);
    for (int t = 0; t < 20; ++t) {
        const Matrix A = gaussian_matrix(rng, 5, 5);
        const Matrix Sa = sym_part(A);
        const Matrix Ta = skew_part(A);
        CHECK(std::abs(Sa.cwiseProduct(Ta).sum()) < 1e-13);
        CHECK(A.squaredNorm() == doctest::Approx(Sa.squaredNorm() + Ta.squaredNorm()).epsilon(1e-13));
        CHECK((Sa + Ta - A).norm() < 1e-15);
    }
}

TEST_CASE("svd reconstruction and orthogonality over random shapes") {
    Rng rng = make_rng(11);
    for (int t = 0; t < 1000; ++t) {
        const Index m = uniform_index(rng, 1, 20);
        const Index n = uniform_index(rng, m, 30);
        const Matrix X = gaussian_matrix(rng, m, n);
        const auto d = svd_ordered(X);
        const Matrix R = (d.U * d.sigma.asDiagonal()) * d.V.leftCols(m).transpose();
        REQUIRE((X - R).norm() <= 100.0 * static_cast<double>(n) * eps * (1.0 + d.sigma(0)));
        CHECK((d.U.transpose() * d.U - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() <=
              10.0 * static_cast<double>(m) * eps);
        CHECK((d.V.transpose() * d.V - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <=
              10.0 * static_cast<double>(n) * eps);
        for (Index i = 1; i < m; ++i) REQUIRE(d.sigma(i) <= d.sigma(i - 1));
    }
}

TEST_CASE("eig reconstruction over random sizes") {
    Rng rng = make_rng(12);
    for (int t = 0; t < 200; ++t) {
        const Index m = uniform_index(rng, 1, 15);
        const Matrix X = gaussian_symmetric(rng, m);
        const auto d = eig_ordered(X);
        const Matrix R = (d.P * d.lambda.asDiagonal()) * d.P.transpose();
        CHECK((X - R).norm() <= 100.0 * static_cast<double>(m) * eps * (1.0 + d.lambda.cwiseAbs().sum()));
    }
}

TEST_CASE("partition survives perturbations below the grouping tolerance") {
    Rng rng = make_rng(13);
    const double tol = 1e-6;
    for (int t = 0; t < 100; ++t) {
        const Matrix U = gaussian_matrix(rng, 4, 4).householderQr().householderQ();
        const Matrix V = gaussian_matrix(rng, 6, 6).householderQr().householderQ();
        Vector s(4);
        s << 3.0, 2.0, 2.0, 0.5;
        const Matrix X = (U * s.asDiagonal()) * V.leftCols(4).transpose();
        Matrix E = gaussian_matrix(rng, 4, 6);
        E *= 0.2 * tol / E.norm();
        const auto d = svd_ordered(X + E, tol);
        REQUIRE(d.partition.num_groups() == 3);
        CHECK(d.partition.groups[1] == IndexRange{1, 3});
    }
}

TEST_CASE("grouping splits b from tiny groups") {
    Vector s(4);
    s << 1.0, 1e-12, 0.0, 0.0;
    const auto p = partition_spectrum(s, 5, true, 1e-10);
    CHECK(p.num_groups() == 1);
    CHECK(p.zero_set == IndexRange{1, 4});
    CHECK(p.group_of[0] == 0);
    CHECK(p.group_of[2] == -1);
    CHECK(p.tail == IndexRange{4, 5});
}

TEST_CASE("Matrix Market round trip is lossless") {
    Rng rng = make_rng(5);
    const Matrix A = gaussian_matrix(rng, 3, 4) * 1e-3;
    for (auto layout : {mm::Layout::array, mm::Layout::coordinate}) {
        std::stringstream ss;
        mm::write(ss, A, false, layout);
        const auto back = mm::read(ss);
        CHECK(back.value == A);
        CHECK_FALSE(back.symmetric);
    }
    const Matrix S = gaussian_symmetric(rng, 4);
    std::stringstream ss;
    mm::write(ss, S, true, mm::Layout::array);
    const auto back = mm::read(ss);
    CHECK(back.symmetric);
    CHECK(back.value == S);
}

TEST_CASE("Matrix Market reader rejects malformed input") {
    std::stringstream bad("%%MatrixMarket matrix array complex general\n1 1\n1\n");
    CHECK_THROWS_AS((void)mm::read(bad), Error);
    std::stringstream truncated("%%MatrixMarket matrix array real general\n2 2\n1\n2\n");
    CHECK_THROWS_AS((void)mm::read(truncated), Error);
    CHECK_THROWS_AS((void)mm::read_file("/nonexistent/path.mtx"), Error);
}

TEST_CASE("matrix_hash separates shapes and values") {
    CHECK(matrix_hash(Matrix::Zero(2, 3)) != matrix_hash(Matrix::Zero(3, 2)));
    Matrix A = Matrix::Zero(2, 2);
    const auto h0 = matrix_hash(A);
    A(1, 1) = 1e-300;
    CHECK(matrix_hash(A) != h0);
}
