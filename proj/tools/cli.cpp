#include "cli.hpp"

#include "specop/error.hpp"
#include "specop/jacobian.hpp"
#include "specop/matrix_market.hpp"
#include "specop/ncm.hpp"
#include "specop/smoothing.hpp"
#include "specop/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace specop::cli {

namespace {

using nlohmann::json;

struct Global {
    std::optional<std::uint64_t> seed;
    double tol_group = default_tol_group;
    std::string output;
    std::string format = "mm";
};

struct Common {
    std::string map = "identity";
    std::string params;
    std::string input;
    std::string kind = "singular";
    std::string direction;
    bool dump_tables = false;
};

struct Verification : std::runtime_error {
    using std::runtime_error::runtime_error;
};

MapPtr load_map(const Common& c) {
    json params = json::object();
    if (!c.params.empty()) {
        try {
            params = json::parse(c.params);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::config_error, std::string("--params is not valid JSON: ") + e.what());
        }
    }
    if (!c.map.empty() && c.map.front() == '{') {
        try {
            return map_from_json(json::parse(c.map));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::config_error, std::string("--map is not valid JSON: ") + e.what());
        }
    }
    return make_map(c.map, params);
}

BlockKind load_kind(const Common& c) { return block_kind_from_string(c.kind); }

Matrix load_matrix(const std::string& path) { return mm::read_file(path).value; }

std::string matrix_text(const Matrix& X, const std::string& format, bool symmetric) {
    std::ostringstream s;
    if (format == "json") {
        json rows = json::array();
        for (Index i = 0; i < X.rows(); ++i) {
            json r = json::array();
            for (Index j = 0; j < X.cols(); ++j) r.push_back(X(i, j));
            rows.push_back(r);
        }
        s << json{{"rows", X.rows()}, {"cols", X.cols()}, {"data", rows}}.dump() << '\n';
    } else {
        mm::write(s, X, symmetric);
    }
    return s.str();
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw Error(ErrorCode::io_error, "write to '" + path + "' failed");
}

// Writes the primary matrix result and a one-line summary when it went to a file.
void emit_matrix(const Global& g, const Matrix& X, bool symmetric, const std::string& what, std::ostream& out) {
    write_text(g.output, matrix_text(X, g.format, symmetric), out);
    if (!g.output.empty() && g.output != "-") {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s: %ldx%ld, ||.||_F = %.17g -> %s\n", what.c_str(),
                      static_cast<long>(X.rows()), static_cast<long>(X.cols()), X.norm(), g.output.c_str());
        out << buf;
    }
}

std::uint64_t require_seed(const Global& g, const char* command) {
    if (!g.seed) throw Error(ErrorCode::config_error, std::string(command) + " needs --seed");
    return *g.seed;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error(ErrorCode::config_error, "bad number '" + item + "' in list");
        }
    }
    return v;
}

void add_common(CLI::App* sub, Common& c, bool direction, bool tables) {
    sub->add_option("--map", c.map, "map name or JSON descriptor {name, params}");
    sub->add_option("--params", c.params, "map parameters as JSON");
    sub->add_option("--input,-i", c.input, "input matrix (Matrix Market)")->required();
    sub->add_option("--kind", c.kind, "block kind: singular or eigen")->check(CLI::IsMember({"singular", "eigen"}));
    if (direction) sub->add_option("--direction,-d", c.direction, "direction H (Matrix Market)");
    if (tables) sub->add_flag("--dump-tables", c.dump_tables, "print the E1/E2/F/C tables as JSON");
}

MixedSignature single(BlockKind kind, const Matrix& X) {
    if (kind == BlockKind::eigen) return sym_signature(X.rows());
    return rect_signature(X.rows(), X.cols());
}

// Tall singular inputs are handled through their transpose.
struct Prepared {
    BlockKind kind;
    Matrix X;
    Matrix H;
    bool transposed = false;
};

Prepared prepare(const Common& c, bool need_direction) {
    Prepared p;
    p.kind = load_kind(c);
    p.X = load_matrix(c.input);
    if (need_direction) {
        if (c.direction.empty()) throw Error(ErrorCode::config_error, "--direction is required");
        p.H = load_matrix(c.direction);
        if (p.H.rows() != p.X.rows() || p.H.cols() != p.X.cols()) {
            throw Error(ErrorCode::shape_mismatch, "direction and input shapes differ");
        }
    }
    if (p.kind == BlockKind::singular && p.X.rows() > p.X.cols()) {
        p.transposed = true;
        p.X.transposeInPlace();
        if (need_direction) p.H.transposeInPlace();
    }
    return p;
}

Matrix finish(const Prepared& p, const Matrix& R) { return p.transposed ? Matrix(R.transpose()) : R; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectral operators: evaluation, derivatives, generalized Jacobians and checks", "specop"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--seed", g.seed, "master seed for stochastic commands");
    app.add_option("--tol-group", g.tol_group, "grouping tolerance for equal spectral values");
    app.add_option("--output,-o", g.output, "output path (default stdout)");
    app.add_option("--format", g.format, "matrix output format")->check(CLI::IsMember({"mm", "json"}));

    Common c;
    auto* eval_cmd = app.add_subcommand("eval", "G(X)");
    add_common(eval_cmd, c, false, false);
    auto* deriv_cmd = app.add_subcommand("deriv", "Frechet derivative G'(X)H");
    add_common(deriv_cmd, c, true, true);
    auto* dir_cmd = app.add_subcommand("dirderiv", "directional derivative G'(X; H)");
    add_common(dir_cmd, c, true, true);

    auto* jac_cmd = app.add_subcommand("jac", "sample a B-subdifferential element");
    add_common(jac_cmd, c, true, false);
    std::string jac_result, jac_dense;
    bool force = false;
    jac_cmd->add_option("--result", jac_result, "write V(H) here (needs --direction)");
    jac_cmd->add_option("--dense", jac_dense, "write the dense matrix of V here");
    jac_cmd->add_flag("--force", force, "sample even without an analytic certificate");

    auto* smooth_cmd = app.add_subcommand("smooth", "smoothing operator Theta(omega, X)");
    add_common(smooth_cmd, c, true, false);
    double omega = 0.0, tau_dot = 0.0, radius = 0.5;
    bool sweep = false;
    std::string omegas = "1e-1,1e-2,1e-3,1e-4,1e-5,1e-6";
    Index samples = 10;
    smooth_cmd->add_option("--omega", omega, "smoothing parameter");
    smooth_cmd->add_option("--tau-dot", tau_dot, "omega component of the derivative direction");
    smooth_cmd->add_flag("--sweep", sweep, "emit the convergence sweep as CSV");
    smooth_cmd->add_option("--omegas", omegas, "comma separated omegas for --sweep");
    smooth_cmd->add_option("--radius", radius, "sampling radius for --sweep");
    smooth_cmd->add_option("--samples", samples, "points per omega for --sweep");

    auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
    std::string config_path;
    bool print_default = false;
    verify_cmd->add_option("--config", config_path, "suite configuration (JSON); default suite when absent");
    verify_cmd->add_flag("--print-default", print_default, "print the default configuration and exit");

    auto* ncm_cmd = app.add_subcommand("ncm", "nearest correlation matrix by semismooth Newton");
    std::string ncm_input, ncm_log;
    NcmProblem problem;
    ncm_cmd->add_option("--input,-i", ncm_input, "matrix A (Matrix Market)")->required();
    ncm_cmd->add_option("--tol", problem.tol, "residual tolerance");
    ncm_cmd->add_option("--max-iter", problem.max_iter, "Newton iteration limit");
    ncm_cmd->add_option("--log", ncm_log, "write the JSON convergence log here (default stdout)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*eval_cmd) {
            const MapPtr map = load_map(c);
            const Prepared p = prepare(c, false);
            const Matrix R = p.kind == BlockKind::eigen ? eval_spectral_sym(*map, p.X, g.tol_group)
                                                        : eval_spectral(*map, p.X, g.tol_group);
            emit_matrix(g, finish(p, R), p.kind == BlockKind::eigen, "G(X)", out);
            return 0;
        }
        if (*deriv_cmd || *dir_cmd) {
            const MapPtr map = load_map(c);
            const Prepared p = prepare(c, true);
            const MixedSignature sig = single(p.kind, p.X);
            const auto dec = decompose(sig, {p.X}, g.tol_group);
            Matrix R;
            json tables;
            if (*deriv_cmd) {
                const FrechetOperator F(*map, dec);
                R = F.apply({p.H}).front();
                tables = F.tables().to_json();
            } else {
                const DirectionalDerivative D(*map, dec);
                R = D.apply({p.H}).front();
                tables = D.zero_tables().to_json();
            }
            emit_matrix(g, finish(p, R), false, *deriv_cmd ? "G'(X)H" : "G'(X;H)", out);
            if (c.dump_tables) out << tables.dump(2) << '\n';
            return 0;
        }
        if (*jac_cmd) {
            const std::uint64_t seed = require_seed(g, "jac");
            const MapPtr map = load_map(c);
            const Prepared p = prepare(c, !jac_result.empty());
            ClarkeOptions opt;
            opt.force = force;
            opt.tol_group = g.tol_group;
            const JacobianHandle h = sample_clarke_element(*map, single(p.kind, p.X), {p.X}, seed, opt);
            write_text(g.output, h.descriptor().dump(2) + "\n", out);
            if (!jac_result.empty()) {
                const Matrix R = finish(p, h.apply(MixedPoint{p.H}).front());
                write_text(jac_result, matrix_text(R, g.format, false), out);
            }
            if (!jac_dense.empty()) write_text(jac_dense, matrix_text(h.assemble_dense(), g.format, false), out);
            if (!g.output.empty() && g.output != "-") {
                out << "handle: seed " << seed << ", " << (h.differentiable_point() ? "differentiable point" : "kink")
                    << (h.heuristic() ? ", heuristic" : "") << " -> " << g.output << '\n';
            }
            return 0;
        }
        if (*smooth_cmd) {
            const MapPtr map = load_map(c);
            if (sweep) {
                const std::uint64_t seed = require_seed(g, "smooth --sweep");
                const Prepared p = prepare(c, false);
                const auto rep = smoothing_sweep(map, single(p.kind, p.X), p.X, parse_list(omegas), samples, radius, seed);
                write_text(g.output, rep.csv(), out);
                if (!rep.pass()) throw Verification("smoothing sweep failed its checks");
                return 0;
            }
            const bool with_dir = !c.direction.empty();
            const Prepared p = prepare(c, with_dir);
            const bool sym = p.kind == BlockKind::eigen;
            Matrix R;
            if (with_dir || tau_dot != 0.0) {
                const Matrix H = with_dir ? p.H : Matrix(Matrix::Zero(p.X.rows(), p.X.cols()));
                R = sym ? smoothing_deriv_sym(map, omega, p.X, H, tau_dot, g.tol_group)
                        : smoothing_deriv(map, omega, p.X, H, tau_dot, g.tol_group);
            } else {
                R = sym ? smoothing_operator_sym(map, omega, p.X, g.tol_group)
                        : smoothing_operator(map, omega, p.X, g.tol_group);
            }
            emit_matrix(g, finish(p, R), false, "Theta", out);
            return 0;
        }
        if (*verify_cmd) {
            if (print_default) {
                write_text(g.output, default_suite_config().dump(2) + "\n", out);
                return 0;
            }
            json config = default_suite_config();
            if (!config_path.empty()) {
                std::ifstream f(config_path);
                if (!f) throw Error(ErrorCode::io_error, "cannot open '" + config_path + "'");
                try {
                    config = json::parse(f);
                } catch (const json::exception& e) {
                    throw Error(ErrorCode::config_error, std::string("config is not valid JSON: ") + e.what());
                }
            }
            if (g.seed && config.is_object()) config["seed"] = *g.seed;
            const SuiteReport rep = run_suite(config);
            write_text(g.output, rep.to_json().dump(2) + "\n", out);
            std::size_t failed = 0;
            for (const auto& e : rep.entries) {
                if (!e.value("pass", false)) {
                    ++failed;
                    err << "FAIL " << e.value("check", "?") << ' ' << e["map"].value("name", "?") << ' '
                        << e.value("base_point_ref", "") << ": " << e["violations"].dump() << '\n';
                }
            }
            err << rep.entries.size() - failed << '/' << rep.entries.size() << " checks passed\n";
            return rep.pass() ? 0 : 1;
        }
        if (*ncm_cmd) {
            problem.seed = require_seed(g, "ncm");
            problem.A = load_matrix(ncm_input);
            NcmResult r;
            try {
                r = solve_ncm(problem);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::max_iterations) throw Verification(e.what());
                throw;
            }
            emit_matrix(g, r.X, true, "X*", out);
            const std::string log = r.log().dump(2) + "\n";
            if (ncm_log.empty()) {
                if (!g.output.empty() && g.output != "-") out << log;
            } else {
                write_text(ncm_log, log, out);
            }
            return 0;
        }
    } catch (const Verification& e) {
        err << "verification failed: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace specop::cli
