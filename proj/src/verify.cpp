#include "specop/verify.hpp"

#include "specop/error.hpp"
#include "specop/jacobian.hpp"
#include "specop/matrix_market.hpp"
#include "specop/random.hpp"
#include "specop/smoothing.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace specop {

using nlohmann::json;

Index harness_threads() {
    if (const char* env = std::getenv("SPECOP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<Index>(v);
    }
    return std::max<Index>(1, static_cast<Index>(std::thread::hardware_concurrency()));
}

void parallel_for(Index count, const std::function<void(Index)>& body) {
    const Index workers = std::min(harness_threads(), count);
    if (workers <= 1) {
        for (Index i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<Index> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (Index i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (Index w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Base points

namespace {

std::string format_values(const Vector& v) {
    std::ostringstream out;
    out << '(';
    for (Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << v(i);
    out << ')';
    return out.str();
}

Matrix random_direction(Rng& rng, const BlockShape& b) {
    Matrix D = b.kind == BlockKind::eigen ? gaussian_symmetric(rng, b.rows) : gaussian_matrix(rng, b.rows, b.cols);
    return D;
}

// Gaussian direction on the whole mixed space, unit Frobenius norm.
MixedPoint unit_mixed(Rng& rng, const MixedSignature& sig) {
    MixedPoint P;
    for (const auto& b : sig) P.push_back(random_direction(rng, b));
    const double n = norm(P);
    for (auto& B : P) B /= n;
    return P;
}

BlockKind kind_of(const json& j) {
    if (!j.contains("kind")) return BlockKind::singular;
    try {
        return block_kind_from_string(j.at("kind").get<std::string>());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config_error, std::string("bad block kind: ") + e.what());
    }
}

BasePoint single_block_from_json(const json& j) {
    const BlockKind kind = kind_of(j);
    if (j.contains("file")) {
        const auto f = mm::read_file(j.at("file").get<std::string>());
        BasePoint bp;
        bp.X = {f.value};
        bp.sig = signature_of(bp.X, {kind});
        require_signature(bp.sig, bp.X, "base point");
        bp.ref = j.value("ref", j.at("file").get<std::string>());
        return bp;
    }
    if (!j.contains("values")) throw Error(ErrorCode::config_error, "base point needs 'values' or 'file'");
    const auto vals = j.at("values").get<std::vector<double>>();
    const Vector v = Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
    const Index cols = j.value("cols", static_cast<Index>(vals.size()));
    const bool rotate = j.contains("rotate") && !(j.at("rotate").is_boolean() && !j.at("rotate").get<bool>());
    const std::uint64_t rseed = rotate && j.at("rotate").is_number_unsigned() ? j.at("rotate").get<std::uint64_t>() : 0;
    BasePoint bp = diagonal_base_point(kind, v, cols, rotate, rseed);
    if (j.contains("ref")) bp.ref = j.at("ref").get<std::string>();
    return bp;
}

}  // namespace

BasePoint diagonal_base_point(BlockKind kind, const Vector& values, Index cols, bool rotate,
                              std::uint64_t rotation_seed) {
    const Index m = values.size();
    if (kind == BlockKind::eigen) cols = m;
    if (cols < m) throw Error(ErrorCode::config_error, "base point needs cols >= number of values");
    Matrix X = Matrix::Zero(m, cols);
    X.leftCols(m).diagonal() = values;
    if (rotate) {
        Rng rng = make_rng(rotation_seed, 0xba5e);
        const Matrix U = random_orthogonal(rng, m);
        if (kind == BlockKind::eigen) {
            X = U * X * U.transpose();
            X = sym_part(X);
        } else {
            X = U * X * random_orthogonal(rng, cols).transpose();
        }
    }
    BasePoint bp;
    bp.X = {X};
    bp.sig = {BlockShape{kind, m, cols}};
    bp.ref = std::string(kind == BlockKind::eigen ? "eig" : "sv") + format_values(values) +
             (kind == BlockKind::singular ? "x" + std::to_string(cols) : "") + (rotate ? "@rot" : "");
    return bp;
}

BasePoint base_point_from_json(const json& j) {
    try {
        if (!j.contains("blocks")) return single_block_from_json(j);
        BasePoint bp;
        std::string ref;
        for (const auto& b : j.at("blocks")) {
            BasePoint part = single_block_from_json(b);
            bp.sig.push_back(part.sig.front());
            bp.X.push_back(part.X.front());
            ref += (ref.empty() ? "" : "+") + part.ref;
        }
        bp.ref = j.value("ref", ref);
        return bp;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config_error, std::string("bad base point: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Orders

void StepSchedule::validate() const {
    if (steps.size() < 4) throw Error(ErrorCode::config_error, "a step schedule needs at least 4 steps");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!(steps[i] > 0.0) || (i > 0 && !(steps[i] < steps[i - 1]))) {
            throw Error(ErrorCode::config_error, "steps must be positive and strictly decreasing");
        }
    }
    if (directions < 1) throw Error(ErrorCode::config_error, "directions must be >= 1");
}

json OrderReport::to_json() const {
    json rows = json::array();
    for (std::size_t i = 0; i < steps.size(); ++i) rows.push_back({{"step", steps[i]}, {"residual", residuals[i]}});
    return {{"check", check},
            {"map", map},
            {"base_point_ref", base_point_ref},
            {"params", {{"target", target}, {"floor", floor}}},
            {"rows", rows},
            {"slope", slope},
            {"intercept", intercept},
            {"fit_window", fit_window},
            {"floor_flag", floor_flag},
            {"verdict", verdict},
            {"pass", pass()}};
}

std::string OrderReport::csv() const {
    std::ostringstream out;
    out << "step,residual\n";
    char buf[64];
    for (std::size_t i = 0; i < steps.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", steps[i], residuals[i]);
        out << buf;
    }
    return out.str();
}

void fit_order(OrderReport& r) {
    r.fit_window.clear();
    r.floor_flag = false;
    // The largest step is pre-asymptotic.
    for (std::size_t i = 1; i < r.steps.size(); ++i) {
        if (r.residuals[i] < r.floor) {
            r.floor_flag = true;
        } else {
            r.fit_window.push_back(static_cast<Index>(i));
        }
    }
    if (r.fit_window.size() < 3) {
        r.slope = std::numeric_limits<double>::quiet_NaN();
        r.intercept = std::numeric_limits<double>::quiet_NaN();
        r.verdict = "exact";
        return;
    }
    const auto n = static_cast<double>(r.fit_window.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (Index i : r.fit_window) {
        const double x = std::log10(r.steps[static_cast<std::size_t>(i)]);
        const double y = std::log10(r.residuals[static_cast<std::size_t>(i)]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    r.intercept = (sy - r.slope * sx) / n;
    r.verdict = r.slope >= r.target ? "consistent" : "fail";
}

double estimate_lipschitz(const SymmetricMap& g, const BasePoint& bp, double radius, Index trials,
                          std::uint64_t seed) {
    if (trials < 2) throw Error(ErrorCode::config_error, "estimate_lipschitz needs trials >= 2");
    std::vector<double> ratio(static_cast<std::size_t>(trials), 0.0);
    parallel_for(trials, [&](Index t) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
        const MixedPoint X = axpy(radius * uniform(rng, 0.0, 1.0), unit_mixed(rng, bp.sig), bp.X);
        // Odd trials probe close pairs, even trials independent ones.
        const MixedPoint Y = t % 2 == 1 ? axpy(radius * 0.05, unit_mixed(rng, bp.sig), X)
                                        : axpy(radius * uniform(rng, 0.0, 1.0), unit_mixed(rng, bp.sig), bp.X);
        const double dx = norm(axpy(-1.0, Y, X));
        if (dx == 0.0) return;
        const MixedPoint GX = eval_spectral_mixed(g, bp.sig, X);
        const MixedPoint GY = eval_spectral_mixed(g, bp.sig, Y);
        ratio[static_cast<std::size_t>(t)] = norm(axpy(-1.0, GY, GX)) / dx;
    });
    return *std::max_element(ratio.begin(), ratio.end());
}

namespace {

OrderReport order_report(const std::string& check, const SymmetricMap& g, const BasePoint& bp,
                         const StepSchedule& schedule, double target, const MixedPoint& G0) {
    schedule.validate();
    OrderReport r;
    r.check = check;
    r.map = g.name();
    r.base_point_ref = bp.ref;
    r.steps = schedule.steps;
    r.residuals.assign(schedule.steps.size(), 0.0);
    r.target = target;
    r.floor = 1e-13 * (1.0 + norm(G0));
    return r;
}

}  // namespace

OrderReport order_bdiff(const SymmetricMap& g, const BasePoint& bp, const StepSchedule& schedule,
                        double target) {
    const MixedDecomposition dec = decompose(bp.sig, bp.X);
    const MixedPoint G0 = eval_spectral_mixed(g, dec);
    const DirectionalDerivative psi(g, dec);
    OrderReport r = order_report("bdiff", g, bp, schedule, target, G0);
    const auto S = static_cast<Index>(schedule.steps.size());
    const Index D = schedule.directions;
    std::vector<double> res(static_cast<std::size_t>(S * D), 0.0);
    parallel_for(S * D, [&](Index k) {
        const Index s = k / D;
        Rng rng = make_rng(schedule.seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(k % D));
        MixedPoint H = unit_mixed(rng, bp.sig);
        for (auto& B : H) B *= schedule.steps[static_cast<std::size_t>(s)];
        const MixedPoint G1 = eval_spectral_mixed(g, bp.sig, axpy(1.0, H, bp.X));
        const MixedPoint lin = axpy(1.0, psi.apply(H), G0);
        res[static_cast<std::size_t>(k)] = norm(axpy(-1.0, lin, G1));
    });
    for (Index k = 0; k < S * D; ++k) {
        auto& slot = r.residuals[static_cast<std::size_t>(k / D)];
        slot = std::max(slot, res[static_cast<std::size_t>(k)]);
    }
    fit_order(r);
    return r;
}

OrderReport order_semismooth(const SymmetricMap& g, const BasePoint& bp, const StepSchedule& schedule,
                             double target, Index max_retries) {
    const MixedPoint G0 = eval_spectral_mixed(g, bp.sig, bp.X);
    OrderReport r = order_report("semismooth", g, bp, schedule, target, G0);
    const auto S = static_cast<Index>(schedule.steps.size());
    const Index D = schedule.directions;
    std::vector<double> res(static_cast<std::size_t>(S * D), 0.0);
    parallel_for(S * D, [&](Index k) {
        const Index s = k / D;
        Rng rng = make_rng(schedule.seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(k % D));
        for (Index attempt = 0; attempt <= max_retries; ++attempt) {
            MixedPoint H = unit_mixed(rng, bp.sig);
            for (auto& B : H) B *= schedule.steps[static_cast<std::size_t>(s)];
            const MixedPoint Y = axpy(1.0, H, bp.X);
            const MixedDecomposition dec = decompose(bp.sig, Y);
            if (!jacobian(g, dec.kappa)) continue;
            const FrechetOperator F(g, dec);
            const MixedPoint lin = axpy(1.0, F.apply(H), G0);
            res[static_cast<std::size_t>(k)] = norm(axpy(-1.0, lin, eval_spectral_mixed(g, dec)));
            return;
        }
        throw Error(ErrorCode::retries_exhausted,
                    "no differentiable point found near " + bp.ref + " after " +
                        std::to_string(max_retries + 1) + " draws");
    });
    for (Index k = 0; k < S * D; ++k) {
        auto& slot = r.residuals[static_cast<std::size_t>(k / D)];
        slot = std::max(slot, res[static_cast<std::size_t>(k)]);
    }
    fit_order(r);
    return r;
}

// ---------------------------------------------------------------------------
// Equivariance

json EquivarianceReport::to_json() const {
    return {{"check", "equivariance"},
            {"map", map},
            {"base_point_ref", std::string("random ") + to_string(kind)},
            {"params", {{"trials", trials}, {"tolerance", tolerance}, {"diagonal_tolerance", diagonal_tolerance}}},
            {"rows",
             {{{"quantity", "max_discrepancy"}, {"value", max_discrepancy}},
              {{"quantity", "max_diagonal"}, {"value", max_diagonal}},
              {{"quantity", "max_diagonal_unordered"}, {"value", max_diagonal_unordered}}}},
            {"verdict", pass() ? "pass" : "fail"},
            {"pass", pass()}};
}

namespace {

struct EquivarianceTrial {
    double discrepancy = 0.0;
    double diagonal = 0.0;
    double unordered = 0.0;
};

double relative(const Matrix& got, const Matrix& expect) {
    return (got - expect).norm() / std::max(1.0, expect.norm());
}

}  // namespace

EquivarianceReport check_equivariance(const SymmetricMap& g, BlockKind kind, Index trials, Index max_rows,
                                      Index max_cols, std::uint64_t seed) {
    if (trials < 1 || max_rows < 1 || max_cols < 1) {
        throw Error(ErrorCode::config_error, "equivariance needs trials, max_rows, max_cols >= 1");
    }
    const bool eig = kind == BlockKind::eigen;
    std::vector<EquivarianceTrial> out(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](Index t) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
        const Index m = uniform_index(rng, 1, max_rows);
        const Index n = eig ? m : uniform_index(rng, m, std::max(m, max_cols));
        const MixedSignature sig{BlockShape{kind, m, n}};
        const auto G = [&](const Matrix& X) { return eval_spectral_mixed(g, sig, {X}).front(); };
        const auto embed = [&](const Matrix& U, const Vector& y, const Matrix& V) {
            Matrix D = Matrix::Zero(m, n);
            D.leftCols(m).diagonal() = y;
            const Matrix X = U * D * V.transpose();
            return eig ? Matrix(sym_part(X)) : X;
        };

        Matrix X;
        if (t % 2 == 0) {
            X = 2.0 * (eig ? gaussian_symmetric(rng, m) : gaussian_matrix(rng, m, n));
        } else {
            // Exact ties and zeros.
            static const double pool_sv[] = {0.0, 0.5, 1.0, 2.0};
            static const double pool_eig[] = {-1.0, 0.0, 0.5, 1.0, 2.0};
            Vector y(m);
            for (Index i = 0; i < m; ++i) {
                y(i) = eig ? pool_eig[uniform_index(rng, 0, 4)] : pool_sv[uniform_index(rng, 0, 3)];
            }
            const Matrix U = random_orthogonal(rng, m);
            X = embed(U, y, eig ? U : random_orthogonal(rng, n));
        }
        const Matrix A = random_orthogonal(rng, m);
        const Matrix B = eig ? A : random_orthogonal(rng, n);
        Matrix AXB = A * X * B.transpose();
        if (eig) AXB = sym_part(AXB);
        EquivarianceTrial tr;
        tr.discrepancy = relative(G(AXB), A * G(X) * B.transpose());

        const Matrix U = random_orthogonal(rng, m);
        const Matrix V = eig ? U : random_orthogonal(rng, n);
        Vector y(m);
        for (Index i = 0; i < m; ++i) y(i) = eig ? uniform(rng, -3.0, 3.0) : uniform(rng, 0.0, 3.0);
        std::sort(y.data(), y.data() + m, std::greater<>());
        tr.diagonal = relative(G(embed(U, y, V)), embed(U, g.eval(y), V));

        Vector z(m);
        const auto perm = random_permutation(rng, m);
        for (Index i = 0; i < m; ++i) {
            z(i) = y(perm[static_cast<std::size_t>(i)]);
            if (!eig && uniform(rng, 0.0, 1.0) < 0.5) z(i) = -z(i);
        }
        tr.unordered = relative(G(embed(U, z, V)), embed(U, g.eval(z), V));
        out[static_cast<std::size_t>(t)] = tr;
    });
    EquivarianceReport rep;
    rep.map = g.name();
    rep.kind = kind;
    rep.trials = trials;
    for (const auto& tr : out) {
        rep.max_discrepancy = std::max(rep.max_discrepancy, tr.discrepancy);
        rep.max_diagonal = std::max(rep.max_diagonal, tr.diagonal);
        rep.max_diagonal_unordered = std::max(rep.max_diagonal_unordered, tr.unordered);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Suite

bool SuiteReport::pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const json& e) { return e.value("pass", false); });
}

json SuiteReport::to_json() const {
    return {{"seed", seed}, {"entries", entries}, {"pass", pass()}};
}

namespace {

StepSchedule schedule_from(const json& c, std::uint64_t seed) {
    StepSchedule s;
    if (c.contains("steps")) s.steps = c.at("steps").get<std::vector<double>>();
    s.directions = c.value("directions", s.directions);
    s.seed = seed;
    return s;
}

json finish(json entry, const std::vector<std::string>& violations) {
    entry["violations"] = violations;
    entry["pass"] = violations.empty();
    if (!entry.contains("verdict")) entry["verdict"] = violations.empty() ? "pass" : "fail";
    return entry;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

json run_check(const json& c, std::uint64_t seed) {
    const std::string check = c.at("check").get<std::string>();
    const MapPtr g = map_from_json(c.at("map"));
    json params = c;
    params.erase("check");
    params.erase("map");
    params.erase("base_point");
    params["seed"] = seed;
    json entry{{"check", check}, {"map", map_to_json(*g)}, {"params", params}};
    std::vector<std::string> violations;

    if (check == "equivariance") {
        const BlockKind kind = kind_of(c);
        const auto rep = check_equivariance(*g, kind, c.value("trials", Index{100}), c.value("max_rows", Index{6}),
                                            c.value("max_cols", Index{8}), seed);
        json j = rep.to_json();
        entry["base_point_ref"] = j["base_point_ref"];
        entry["rows"] = j["rows"];
        if (rep.max_discrepancy > rep.tolerance) {
            violations.push_back("G(AXB^T) vs AG(X)B^T discrepancy " + fmt(rep.max_discrepancy));
        }
        if (rep.max_diagonal > rep.diagonal_tolerance) {
            violations.push_back("diagonal consistency " + fmt(rep.max_diagonal));
        }
        if (rep.max_diagonal_unordered > rep.diagonal_tolerance) {
            violations.push_back("unordered diagonal consistency " + fmt(rep.max_diagonal_unordered));
        }
        return finish(entry, violations);
    }

    if (check == "symmetry") {
        BlockSignature sig;
        for (const auto& b : c.at("blocks")) sig.push_back({kind_of(b), b.at("length").get<Index>()});
        const auto rep = check_mixed_symmetry(*g, sig, c.value("trials", Index{100}), seed);
        entry["base_point_ref"] = "random vectors";
        entry["rows"] = {{{"quantity", "max_discrepancy"}, {"value", rep.max_discrepancy}},
                         {{"quantity", "max_relative"}, {"value", rep.max_relative}}};
        if (!rep.pass) violations.push_back("mixed symmetry discrepancy " + fmt(rep.max_relative));
        return finish(entry, violations);
    }

    const BasePoint bp = base_point_from_json(c.at("base_point"));
    entry["base_point_ref"] = bp.ref;

    if (check == "bdiff" || check == "semismooth") {
        const auto sched = schedule_from(c, seed);
        const double target = c.value("target", 1.9);
        const OrderReport r = check == "bdiff" ? order_bdiff(*g, bp, sched, target)
                                               : order_semismooth(*g, bp, sched, target);
        json j = r.to_json();
        for (const char* k : {"rows", "slope", "intercept", "fit_window", "floor_flag", "verdict"}) entry[k] = j[k];
        entry["params"]["floor"] = r.floor;
        if (!r.pass()) violations.push_back("slope " + fmt(r.slope) + " below target " + fmt(target));
        return finish(entry, violations);
    }

    if (check == "lipschitz") {
        const double L = estimate_lipschitz(*g, bp, c.value("radius", 0.5), c.value("trials", Index{200}), seed);
        const double bound = c.value("bound", g->lipschitz_constant() * (1.0 + 1e-6));
        entry["rows"] = {{{"quantity", "lipschitz_estimate"}, {"value", L}}, {{"quantity", "bound"}, {"value", bound}}};
        if (std::isfinite(bound) && L > bound) violations.push_back("Lipschitz estimate " + fmt(L) + " > " + fmt(bound));
        return finish(entry, violations);
    }

    if (check == "divided_difference") {
        const auto dec = decompose(bp.sig, bp.X);
        const auto rep = check_divided_difference_bounds(*g, dec.kappa, bp.sig.front().kind, c.value("radius", 0.5),
                                                         c.value("trials", Index{200}), seed);
        const double bound = c.value("bound", g->lipschitz_constant() * (1.0 + 1e-6));
        entry["rows"] = {{{"quantity", "lipschitz_estimate"}, {"value", rep.lipschitz_estimate}},
                         {{"quantity", "bound"}, {"value", bound}}};
        if (std::isfinite(bound) && rep.lipschitz_estimate > bound) {
            violations.push_back("divided-difference modulus " + fmt(rep.lipschitz_estimate) + " > " + fmt(bound));
        }
        return finish(entry, violations);
    }

    if (check == "clarke") {
        ClarkeOptions opt;
        opt.force = c.value("force", false);
        const auto rep = clarke_consistency_check(*g, bp.sig, bp.X, c.value("trials", Index{5}), seed, opt);
        json rows = json::array();
        for (std::size_t i = 0; i < rep.steps.size(); ++i) {
            rows.push_back({{"step", rep.steps[i]}, {"raw", rep.raw[i]}, {"extrapolated", rep.extrapolated[i]}});
        }
        entry["rows"] = rows;
        entry["params"]["tolerance"] = rep.tolerance;
        if (!rep.pass) violations.push_back("operator discrepancy " + fmt(rep.extrapolated.back()));
        return finish(entry, violations);
    }

    if (check == "smoothing") {
        if (bp.sig.size() != 1) throw Error(ErrorCode::config_error, "smoothing takes a single block");
        const auto omegas = c.value("omegas", std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
        const double radius = c.value("radius", 0.5);
        const auto rep =
            smoothing_sweep(g, bp.sig, bp.X.front(), omegas, c.value("samples", Index{10}), radius, seed);
        json rows = json::array();
        double Lbar = 0.0;
        for (const auto& row : rep.rows) {
            const SteklovMap gw(g, row.omega);
            const auto sym = check_mixed_symmetry(gw, vector_signature(bp.sig), 20, seed);
            rows.push_back({{"omega", row.omega},
                            {"sup_distance", row.sup_distance},
                            {"deriv_norm", row.deriv_norm},
                            {"symmetric", sym.pass}});
            if (!sym.pass) violations.push_back("smoothed map not symmetric at omega " + fmt(row.omega));
            Lbar = std::max(Lbar, row.deriv_norm);
        }
        const double L0 = estimate_lipschitz(*g, bp, radius, 50, seed);
        entry["rows"] = rows;
        entry["params"]["lipschitz_transfer"] = {{"estimate", L0}, {"lbar", Lbar}};
        if (!rep.nonincreasing) violations.push_back("sup-distance not nonincreasing in omega");
        if (!rep.within_bound) violations.push_back("sup-distance above 0.6 sqrt(m) omega");
        if (!rep.deriv_bounded) violations.push_back("derivative norm above the Lipschitz module");
        if (L0 > Lbar * (1.0 + 1e-3)) violations.push_back("Lipschitz transfer " + fmt(L0) + " > " + fmt(Lbar));
        return finish(entry, violations);
    }

    throw Error(ErrorCode::config_error, "unknown check '" + check + "'");
}

}  // namespace

SuiteReport run_suite(const json& config) {
    SuiteReport rep;
    if (!config.is_object() && !config.is_null()) throw Error(ErrorCode::config_error, "suite config must be an object");
    if (config.is_null() || !config.contains("checks")) return rep;
    try {
        rep.seed = config.value("seed", std::uint64_t{0});
        const auto& checks = config.at("checks");
        if (!checks.is_array()) throw Error(ErrorCode::config_error, "'checks' must be an array");
        for (std::size_t i = 0; i < checks.size(); ++i) {
            const std::uint64_t seed = checks[i].value("seed", derive_seed(rep.seed, i));
            rep.entries.push_back(run_check(checks[i], seed));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config_error, std::string("bad suite config: ") + e.what());
    }
    return rep;
}

json default_suite_config() {
    const auto bp = [](const char* kind, std::vector<double> values, Index cols, bool rotate = true) {
        json j{{"kind", kind}, {"values", values}, {"cols", cols}};
        if (rotate) j["rotate"] = 1;
        return j;
    };
    const json st_kink = bp("singular", {2, 1, 1, 0}, 5);
    const json psd_kink = bp("eigen", {1, 0, 0, -1}, 4);
    const json box_kink = bp("eigen", {1, 1, 0.5, 0}, 4);
    const json ball_kink = bp("singular", {1, 1, 0.5}, 4);
    const json frob_boundary = bp("singular", {0.8, 0.6}, 3);
    const json generic = bp("singular", {2, 1.5, 0.7}, 4);
    const json zero_sv = bp("singular", {1, 0, 0}, 4);

    json checks = json::array();
    for (const auto& name : builtin_map_names()) {
        const MapPtr g = make_map(name);
        for (auto kind : {BlockKind::singular, BlockKind::eigen}) {
            if (!g->supports(kind)) continue;
            checks.push_back({{"check", "equivariance"}, {"map", name}, {"kind", to_string(kind)}, {"trials", 100}});
            checks.push_back({{"check", "symmetry"},
                              {"map", name},
                              {"blocks", {{{"kind", to_string(kind)}, {"length", 4}}}},
                              {"trials", 100}});
        }
    }
    struct Point {
        const char* map;
        json base;
        double target;
        bool clarke;
    };
    const std::vector<Point> points{
        {"identity", generic, 1.9, true},
        {"scalar_scale", generic, 1.9, true},
        {"soft_threshold", st_kink, 1.9, true},
        {"abs_power", zero_sv, 1.9, true},
        {"psd_projection", psd_kink, 1.9, true},
        {"box_clamp", box_kink, 1.9, true},
        {"spectral_ball", ball_kink, 1.9, true},
        {"frobenius_ball", frob_boundary, 0.9, false},
    };
    for (const auto& p : points) {
        const std::vector<double> steps{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
        checks.push_back({{"check", "bdiff"}, {"map", p.map}, {"base_point", p.base}, {"steps", steps}, {"target", p.target}});
        checks.push_back(
            {{"check", "semismooth"}, {"map", p.map}, {"base_point", p.base}, {"steps", steps}, {"target", p.target}});
        if (p.clarke) checks.push_back({{"check", "clarke"}, {"map", p.map}, {"base_point", p.base}, {"trials", 5}});
        if (std::string(p.map) != "abs_power") {
            checks.push_back({{"check", "lipschitz"}, {"map", p.map}, {"base_point", p.base}, {"radius", 0.5}, {"trials", 200}});
            checks.push_back(
                {{"check", "divided_difference"}, {"map", p.map}, {"base_point", p.base}, {"radius", 0.5}, {"trials", 200}});
        }
    }
    checks.push_back({{"check", "clarke"}, {"map", "psd_projection"}, {"base_point", bp("eigen", {0, 0, 0}, 3, false)}, {"trials", 5}});
    checks.push_back({{"check", "smoothing"}, {"map", "soft_threshold"}, {"base_point", bp("singular", {2, 1, 1}, 4)}});
    checks.push_back({{"check", "smoothing"}, {"map", "psd_projection"}, {"base_point", bp("eigen", {1, 0, -1}, 3)}});
    return {{"seed", 20240601}, {"checks", checks}};
}

}  // namespace specop
