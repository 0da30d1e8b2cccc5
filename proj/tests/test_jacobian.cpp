#include "doctest.h"

#include "specop/error.hpp"
#include "specop/jacobian.hpp"
#include "support.hpp"

#include <cmath>

using namespace specop;
using namespace specop::testing;

namespace {

Matrix diag2(double a, double b) {
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = a;
    D(1, 1) = b;
    return D;
}

}  // namespace

TEST_CASE("identity and scaling handles") {
    Rng rng = make_rng(1);
    const Matrix X = gaussian_matrix(rng, 2, 2);
    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
        const auto h = sample_clarke_element(*identity_map(), X, seed);
        CHECK(h.differentiable_point());
        CHECK((h.assemble_dense() - Matrix::Identity(4, 4)).norm() < 1e-13);
    }
    const auto h2 = sample_clarke_element(*scalar_scale(2.0), X, 5);
    CHECK((h2.assemble_dense() - 2.0 * Matrix::Identity(4, 4)).norm() < 1e-13);
    CHECK(h2.apply(Matrix(Matrix::Zero(2, 2))).norm() == 0.0);
}

TEST_CASE("psd projection at diag(1,-1)") {
    const auto psd = psd_projection();
    const auto h = sample_clarke_element_sym(*psd, diag2(1, -1), 3);
    Matrix E11 = Matrix::Zero(2, 2);
    E11(0, 0) = 1.0;
    CHECK((h.apply(E11) - E11).norm() < 1e-15);
    Matrix expect(4, 4);
    expect << 1, 0, 0, 0,  //
        0, 0.5, 0, 0,      //
        0, 0, 0.5, 0,      //
        0, 0, 0, 0;
    CHECK((h.assemble_dense() - expect).norm() < 1e-15);
    // Oracle: differences of the projection at nearby differentiable points.
    for (double d : {1e-3, -1e-3}) {
        const Matrix Xn = diag2(1 + d, -1 + d);
        CHECK((central_difference(psd_part, Xn, E11) - h.apply(E11)).norm() < 1e-8);
    }
}

TEST_CASE("psd projection at zero: definite inner points give I or 0") {
    const auto psd = psd_projection();
    const Matrix Z = Matrix::Zero(3, 3);
    const auto sampled = sample_clarke_element_sym(*psd, Z, 4);
    CHECK_FALSE(sampled.differentiable_point());
    auto desc = sampled.descriptor();
    Rng rng = make_rng(4);
    const Matrix H = gaussian_symmetric(rng, 3);

    desc["W"][0]["data"] = std::vector<double>{2, 0, 0, 0, 1, 0, 0, 0, 3};
    const auto pos = handle_from_descriptor(*psd, sym_signature(3), {Z}, desc);
    CHECK((pos.apply(H) - H).norm() < 1e-14);

    desc["W"][0]["data"] = std::vector<double>{-2, 0, 0, 0, -1, 0, 0, 0, -3};
    const auto neg = handle_from_descriptor(*psd, sym_signature(3), {Z}, desc);
    CHECK(neg.apply(H).norm() < 1e-14);

    // A general element is the derivative of the projection at W.
    const Matrix W = sampled.W().front();
    CHECK((sampled.apply(H) - central_difference(psd_part, W, H, 1e-6)).norm() < 1e-7);
}

TEST_CASE("handles are linear") {
    Rng rng = make_rng(5);
    const auto g = soft_threshold(1.0);
    const Matrix X = with_singular_values(rng, (Vector(4) << 2, 1, 1, 0).finished(), 5);
    const auto h = sample_clarke_element(*g, X, 6);
    const Matrix H1 = gaussian_matrix(rng, 4, 5);
    const Matrix H2 = gaussian_matrix(rng, 4, 5);
    const Matrix L = h.apply(Matrix(H1 - 0.7 * H2));
    const Matrix R = h.apply(H1) - 0.7 * h.apply(H2);
    CHECK((L - R).norm() <= 1e-12 * (1.0 + R.norm()));
}

TEST_CASE("singleton at differentiable points") {
    Rng rng = make_rng(7);
    const auto g = soft_threshold(1.0);
    const Matrix X = with_singular_values(rng, (Vector(3) << 3, 2, 0.5).finished(), 4);
    const Matrix H = gaussian_matrix(rng, 3, 4);
    const Matrix ref = frechet_deriv(*g, X, H);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CHECK((sample_clarke_element(*g, X, seed).apply(H) - ref).norm() <= 1e-12);
    }
}

TEST_CASE("handle agrees with differences near the sampled direction") {
    Rng rng = make_rng(8);
    const auto g = soft_threshold(1.0);
    const Matrix X = with_singular_values(rng, (Vector(4) << 2, 1, 1, 0).finished(), 5);
    const MixedSignature sig = rect_signature(4, 5);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto h = sample_clarke_element(*g, sig, {X}, seed);
        const Matrix Xt = sequence_point(h, 1e-5).front();
        const Matrix H = unit_direction(rng, 4, 5);
        const auto G = [&](const Matrix& Y) { return eval_spectral(*g, Y); };
        CHECK((central_difference(G, Xt, H, 1e-8) - h.apply(H)).norm() < 1e-4);
    }
}

TEST_CASE("sequence point lies on the ray through the lifted W") {
    Rng rng = make_rng(9);
    const auto g = soft_threshold(1.0);
    const Matrix X = with_singular_values(rng, (Vector(4) << 2, 1, 1, 0).finished(), 5);
    const auto h = sample_clarke_element(*g, rect_signature(4, 5), {X}, 3);
    const MixedPoint lifted = h.directional()->outer_embed(h.W());
    const double t = 0.01;
    CHECK((sequence_point(h, t).front() - X - t * lifted.front()).norm() < 1e-13);
}

TEST_CASE("hypotheses and sampling failures") {
    const auto fb = frobenius_ball(1.0);
    Matrix X = Matrix::Zero(2, 3);
    X(0, 0) = 0.6;
    X(1, 1) = 0.8;
    CHECK_THROWS_AS((void)sample_clarke_element(*fb, X, 1), Error);
    try {
        (void)sample_clarke_element(*fb, X, 1);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::hypothesis_unverified);
    }
    ClarkeOptions forced;
    forced.force = true;
    const auto h = sample_clarke_element(*fb, X, 1, forced);
    CHECK(h.heuristic());
    CHECK(h.descriptor()["heuristic"] == true);
}

TEST_CASE("dense assembly guard") {
    const auto h = sample_clarke_element(*identity_map(), Matrix(Matrix::Identity(65, 65)), 1);
    CHECK_THROWS_AS((void)h.assemble_dense(), Error);
}

TEST_CASE("descriptors reproduce handles bit for bit") {
    Rng rng = make_rng(10);
    const auto g = psd_projection();
    Matrix X = with_eigenvalues(rng, (Vector(4) << 1, 0, 0, -1).finished());
    const auto a = sample_clarke_element_sym(*g, X, 42);
    const auto b = sample_clarke_element_sym(*g, X, 42);
    CHECK(a.descriptor() == b.descriptor());
    const auto c = handle_from_descriptor(*g, sym_signature(4), {X}, nlohmann::json::parse(a.descriptor().dump()));
    const Matrix H = gaussian_symmetric(rng, 4);
    CHECK(a.apply(H) == c.apply(H));
    X(0, 0) += 1e-9;
    CHECK_THROWS_AS((void)handle_from_descriptor(*g, sym_signature(4), {X}, a.descriptor()), Error);
}

TEST_CASE("tall base points") {
    Rng rng = make_rng(11);
    const auto g = soft_threshold(1.0);
    const Matrix X = with_singular_values(rng, (Vector(3) << 2, 1, 0).finished(), 5).transpose();
    const auto h = sample_clarke_element(*g, X, 2);
    const Matrix H = gaussian_matrix(rng, 5, 3);
    const Matrix R = h.apply(H);
    CHECK(R.rows() == 5);
    CHECK(R.cols() == 3);
}

TEST_CASE("convex combinations") {
    const auto psd = psd_projection();
    const Matrix Z = Matrix::Zero(2, 2);
    const auto h1 = sample_clarke_element_sym(*psd, Z, 1);
    const auto h2 = sample_clarke_element_sym(*psd, Z, 2);
    Rng rng = make_rng(12);
    const Matrix H = gaussian_symmetric(rng, 2);
    ConvexCombination c;
    c.add(0.25, h1);
    c.add(0.75, h2);
    const Matrix expect = 0.25 * h1.apply(H) + 0.75 * h2.apply(H);
    CHECK((c.apply({H}).front() - expect).norm() < 1e-15);
    ConvexCombination bad;
    bad.add(0.5, h1);
    CHECK_THROWS_AS((void)bad.apply({H}), Error);
}

TEST_CASE("Clarke consistency") {
    const auto id = identity_map();
    Rng rng = make_rng(13);
    const Matrix X = gaussian_matrix(rng, 2, 3);
    const auto r0 = clarke_consistency_check(*id, rect_signature(2, 3), {X}, 3, 1);
    CHECK(r0.pass);
    CHECK(r0.raw.back() == 0.0);

    const auto r1 = clarke_consistency_check(*psd_projection(), sym_signature(3), {Matrix(Matrix::Zero(3, 3))}, 5, 2);
    CHECK(r1.pass);
    CHECK(r1.raw.back() <= 1e-8);

    const Matrix K = with_singular_values(rng, (Vector(4) << 2, 1, 1, 0).finished(), 5);
    const auto r2 = clarke_consistency_check(*soft_threshold(1.0), rect_signature(4, 5), {K}, 5, 3);
    CHECK(r2.pass);
    // The raw gap closes linearly in t.
    CHECK(r2.raw[4] < r2.raw[2]);
}
