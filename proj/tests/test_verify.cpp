#include "doctest.h"

#include "specop/error.hpp"
#include "specop/verify.hpp"

#include <cmath>
#include <cstdlib>

using namespace specop;

TEST_CASE("Lipschitz estimates") {
    const BasePoint bp = diagonal_base_point(BlockKind::singular, (Vector(3) << 2, 1, 1).finished(), 4, true, 1);
    CHECK(std::abs(estimate_lipschitz(*identity_map(), bp, 0.5, 100, 1) - 1.0) <= 1e-12);
    CHECK(estimate_lipschitz(*soft_threshold(1.0), bp, 0.5, 200, 2) <= 1.0 + 1e-9);
    const double L3 = estimate_lipschitz(*scalar_scale(3.0), bp, 0.5, 50, 3);
    CHECK(L3 >= 3.0 - 1e-9);
    CHECK(L3 <= 3.0 + 1e-9);
    CHECK_THROWS_AS((void)estimate_lipschitz(*identity_map(), bp, 0.5, 1, 3), Error);
}

TEST_CASE("slope fit") {
    OrderReport r;
    r.steps = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    r.residuals = {5e-3, 3e-4, 3e-6, 3e-8, 3e-10};
    r.floor = 1e-13;
    r.target = 1.9;
    fit_order(r);
    CHECK(r.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.verdict == "consistent");
    CHECK(r.fit_window.size() == 4);
    r.residuals = {1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
    fit_order(r);
    CHECK(r.verdict == "fail");
    r.residuals = {1e-3, 1e-16, 0, 0, 0};
    fit_order(r);
    CHECK(r.verdict == "exact");
    CHECK(r.floor_flag);
}

TEST_CASE("B-differentiability and semismoothness orders") {
    StepSchedule s;
    s.steps = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    s.seed = 4;
    const BasePoint generic = diagonal_base_point(BlockKind::singular, (Vector(3) << 2, 1, 0.5).finished(), 4, true, 2);
    CHECK(order_bdiff(*identity_map(), generic, s).verdict == "exact");
    CHECK(order_semismooth(*identity_map(), generic, s).verdict == "exact");

    const BasePoint psd = diagonal_base_point(BlockKind::eigen, (Vector(3) << 1, 0, -1).finished(), 3);
    const auto b1 = order_bdiff(*psd_projection(), psd, s);
    CHECK(b1.slope >= 1.9);
    const auto s1 = order_semismooth(*psd_projection(), psd, s);
    CHECK(s1.slope >= 1.9);

    const BasePoint st = diagonal_base_point(BlockKind::singular, (Vector(4) << 2, 1, 1, 0).finished(), 5, true, 3);
    CHECK(order_bdiff(*soft_threshold(1.0), st, s).slope >= 1.9);
    CHECK(order_semismooth(*soft_threshold(1.0), st, s).slope >= 1.9);

    const BasePoint fb = diagonal_base_point(BlockKind::singular, (Vector(2) << 0.8, 0.6).finished(), 3, true, 4);
    const auto f = order_semismooth(*frobenius_ball(1.0), fb, s, 0.9);
    CHECK(f.pass());
    CHECK(f.csv().rfind("step,residual\n", 0) == 0);
}

TEST_CASE("equivariance") {
    const auto id = check_equivariance(*identity_map(), BlockKind::singular, 20, 5, 7, 1);
    CHECK(id.pass());
    const auto st = check_equivariance(*soft_threshold(1.0), BlockKind::singular, 100, 10, 15, 2);
    CHECK(st.max_discrepancy <= 1e-10);
    CHECK(st.pass());
    const auto psd = check_equivariance(*psd_projection(), BlockKind::eigen, 100, 10, 10, 3);
    CHECK(psd.max_discrepancy <= 1e-10);
    CHECK(psd.pass());
    CHECK_FALSE(check_equivariance(*broken_weighted(), BlockKind::singular, 50, 6, 8, 4).pass());
    CHECK_FALSE(check_equivariance(*broken_weighted(), BlockKind::eigen, 50, 6, 6, 5).pass());
}

TEST_CASE("suites") {
    const auto empty = run_suite(nlohmann::json::object());
    CHECK(empty.entries.empty());
    CHECK(empty.pass());

    const nlohmann::json broken{
        {"seed", 3},
        {"checks", {{{"check", "equivariance"}, {"map", "broken_weighted"}, {"kind", "eigen"}, {"trials", 20}}}}};
    const auto rb = run_suite(broken);
    CHECK_FALSE(rb.pass());
    CHECK_FALSE(rb.entries.front()["violations"].empty());

    CHECK_THROWS_AS((void)run_suite(nlohmann::json{{"checks", {{{"check", "nope"}, {"map", "identity"}}}}}), Error);
    CHECK_THROWS_AS((void)run_suite(nlohmann::json{{"checks", {{{"check", "lipschitz"}, {"map", "identity"}}}}}), Error);
}

TEST_CASE("default suite passes and is deterministic") {
    const auto cfg = default_suite_config();
    const auto a = run_suite(cfg);
    for (const auto& e : a.entries) {
        INFO(e.dump());
        CHECK(e["pass"] == true);
    }
    CHECK(a.pass());
    const auto b = run_suite(cfg);
    CHECK(a.to_json().dump() == b.to_json().dump());
}

TEST_CASE("reports do not depend on the thread count") {
    const nlohmann::json cfg{
        {"seed", 9},
        {"checks",
         {{{"check", "equivariance"}, {"map", "soft_threshold"}, {"trials", 40}},
          {{"check", "bdiff"},
           {"map", "psd_projection"},
           {"base_point", {{"kind", "eigen"}, {"values", {1, 0, -1}}, {"rotate", 2}}},
           {"steps", {1e-2, 1e-3, 1e-4, 1e-5}}},
          {{"check", "lipschitz"},
           {"map", "soft_threshold"},
           {"base_point", {{"values", {2, 1, 1}}, {"cols", 4}}},
           {"trials", 50}}}}};
    setenv("SPECOP_THREADS", "1", 1);
    const std::string one = run_suite(cfg).to_json().dump();
    setenv("SPECOP_THREADS", "3", 1);
    CHECK(harness_threads() == 3);
    const std::string three = run_suite(cfg).to_json().dump();
    unsetenv("SPECOP_THREADS");
    CHECK(one == three);
}
