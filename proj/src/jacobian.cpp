#include "specop/jacobian.hpp"

#include "specop/error.hpp"
#include "specop/random.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace specop {

using nlohmann::json;

std::uint64_t mixed_hash(const MixedPoint& X) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& B : X) {
        const std::uint64_t hb = matrix_hash(B);
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (hb >> (8 * byte)) & 0xFFU;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

struct HandleBuilder {
    static JacobianHandle build(const SymmetricMap& g, const MixedSignature& sig, const MixedPoint& X_bar,
                                const std::optional<MixedPoint>& W, std::uint64_t seed, Index draws,
                                bool heuristic, double tol_group) {
        JacobianHandle h;
        h.sig_ = sig;
        h.seed_ = seed;
        h.draws_ = draws;
        h.heuristic_ = heuristic;
        h.base_hash_ = mixed_hash(X_bar);
        h.map_ = map_to_json(g);
        MixedDecomposition dec = decompose(sig, X_bar, tol_group);
        if (!W) {
            h.frechet_ = std::make_shared<FrechetOperator>(g, std::move(dec));
            return h;
        }
        auto psi = std::make_shared<DirectionalDerivative>(g, std::move(dec));
        MixedDecomposition wdec = decompose(psi->inner_signature(), *W, tol_group);
        h.inner_ = std::make_shared<FrechetOperator>(*psi->phi(), std::move(wdec));
        h.psi_ = std::move(psi);
        h.W_ = *W;
        return h;
    }

    static void set_transposed(JacobianHandle& h) { h.transposed_ = true; }
};

MixedPoint JacobianHandle::apply(const MixedPoint& H) const {
    if (frechet_) return frechet_->apply(H);
    const MixedPoint inner_value = inner_->apply(psi_->inner_project(H));
    return axpy(1.0, psi_->smooth_part(H), psi_->outer_embed(inner_value));
}

Matrix JacobianHandle::apply(const Matrix& H) const {
    if (sig_.size() != 1) throw Error(ErrorCode::shape_mismatch, "handle acts on a product space");
    if (transposed_) return apply(MixedPoint{H.transpose()}).front().transpose();
    return apply(MixedPoint{H}).front();
}

Matrix JacobianHandle::assemble_dense() const {
    Index total = 0;
    for (const auto& b : sig_) total += b.rows * b.cols;
    if (total > 4096) {
        throw Error(ErrorCode::too_large,
                    "dense assembly needs " + std::to_string(total) + " > 4096 unknowns");
    }
    Matrix D(total, total);
    MixedPoint E = zeros_like(sig_);
    Index col = 0;
    for (std::size_t k = 0; k < sig_.size(); ++k) {
        for (Index j = 0; j < sig_[k].cols; ++j) {
            for (Index i = 0; i < sig_[k].rows; ++i) {
                E[k](i, j) = 1.0;
                const MixedPoint R = apply(E);
                E[k](i, j) = 0.0;
                Index row = 0;
                for (const auto& B : R) {
                    D.col(col).segment(row, B.size()) = Eigen::Map<const Vector>(B.data(), B.size());
                    row += B.size();
                }
                ++col;
            }
        }
    }
    return D;
}

namespace {

json point_json(const MixedPoint& X) {
    json arr = json::array();
    for (const auto& B : X) {
        arr.push_back({{"rows", B.rows()},
                       {"cols", B.cols()},
                       {"data", std::vector<double>(B.data(), B.data() + B.size())}});
    }
    return arr;
}

MixedPoint point_from_json(const json& arr) {
    MixedPoint X;
    for (const auto& b : arr) {
        const auto rows = b.at("rows").get<Index>();
        const auto cols = b.at("cols").get<Index>();
        const auto data = b.at("data").get<std::vector<double>>();
        if (static_cast<Index>(data.size()) != rows * cols) {
            throw Error(ErrorCode::config_error, "W block has the wrong number of entries");
        }
        X.push_back(Eigen::Map<const Matrix>(data.data(), rows, cols));
    }
    return X;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

json JacobianHandle::descriptor() const {
    json j;
    j["map"] = map_;
    j["seed"] = seed_;
    j["base_point_hash"] = hex(base_hash_);
    j["differentiable_point"] = differentiable_point();
    j["draws"] = draws_;
    j["heuristic"] = heuristic_;
    j["transposed"] = transposed_;
    j["tol_group"] = frechet_ ? frechet_->decomposition().tol_group : psi_->decomposition().tol_group;
    j["W"] = point_json(W_);
    return j;
}

JacobianHandle sample_clarke_element(const SymmetricMap& g, const MixedSignature& sig,
                                     const MixedPoint& X_bar, std::uint64_t seed,
                                     const ClarkeOptions& options) {
    const MixedDecomposition dec = decompose(sig, X_bar, options.tol_group);
    if (jacobian(g, dec.kappa)) {
        return HandleBuilder::build(g, sig, X_bar, std::nullopt, seed, 0, false, options.tol_group);
    }
    const bool certified = g.clarke_certified(dec.kappa);
    if (!certified && !options.force) {
        throw Error(ErrorCode::hypothesis_unverified,
                    g.name() + " does not certify the Clarke hypotheses at this base point");
    }
    const DirectionalDerivative psi(g, dec);
    const auto& inner_sig = psi.inner_signature();
    Rng rng = make_rng(seed);
    for (Index draw = 1; draw <= options.max_draws; ++draw) {
        MixedPoint W;
        for (const auto& b : inner_sig) {
            W.push_back(b.kind == BlockKind::eigen ? gaussian_symmetric(rng, b.rows)
                                                   : gaussian_matrix(rng, b.rows, b.cols));
        }
        const MixedDecomposition wdec = decompose(inner_sig, W, options.tol_group);
        if (psi.phi()->jacobian(wdec.kappa)) {
            return HandleBuilder::build(g, sig, X_bar, W, seed, draw, !certified, options.tol_group);
        }
    }
    throw Error(ErrorCode::sampling_exhausted,
                "no differentiable inner point after " + std::to_string(options.max_draws) + " draws");
}

JacobianHandle sample_clarke_element(const SymmetricMap& g, const Matrix& X_bar, std::uint64_t seed,
                                     const ClarkeOptions& options) {
    if (X_bar.rows() > X_bar.cols()) {
        const Matrix Xt = X_bar.transpose();
        JacobianHandle h =
            sample_clarke_element(g, rect_signature(Xt.rows(), Xt.cols()), {Xt}, seed, options);
        HandleBuilder::set_transposed(h);
        return h;
    }
    return sample_clarke_element(g, rect_signature(X_bar.rows(), X_bar.cols()), {X_bar}, seed, options);
}

JacobianHandle sample_clarke_element_sym(const SymmetricMap& g, const Matrix& X_bar, std::uint64_t seed,
                                         const ClarkeOptions& options) {
    require_square(X_bar, "symmetric base point");
    return sample_clarke_element(g, sym_signature(X_bar.rows()), {X_bar}, seed, options);
}

JacobianHandle handle_from_descriptor(const SymmetricMap& g, const MixedSignature& sig,
                                      const MixedPoint& X_bar, const json& descriptor) {
    try {
        const bool transposed = descriptor.value("transposed", false);
        MixedPoint base = X_bar;
        MixedSignature s = sig;
        if (transposed) {
            for (auto& B : base) B.transposeInPlace();
            for (auto& b : s) std::swap(b.rows, b.cols);
        }
        if (descriptor.at("base_point_hash").get<std::string>() != hex(mixed_hash(base))) {
            throw Error(ErrorCode::config_error, "descriptor was recorded at a different base point");
        }
        const double tol = descriptor.value("tol_group", default_tol_group);
        std::optional<MixedPoint> W;
        if (!descriptor.at("differentiable_point").get<bool>()) W = point_from_json(descriptor.at("W"));
        JacobianHandle h = HandleBuilder::build(g, s, base, W, descriptor.at("seed").get<std::uint64_t>(),
                                                descriptor.at("draws").get<Index>(),
                                                descriptor.value("heuristic", false), tol);
        if (transposed) HandleBuilder::set_transposed(h);
        return h;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config_error, std::string("bad handle descriptor: ") + e.what());
    }
}

void ConvexCombination::add(double weight, JacobianHandle handle) {
    if (!(weight >= 0.0)) throw Error(ErrorCode::config_error, "convex weights must be >= 0");
    if (!terms_.empty() && !(terms_.front().second.signature() == handle.signature())) {
        throw Error(ErrorCode::shape_mismatch, "handles act on different spaces");
    }
    terms_.emplace_back(weight, std::move(handle));
}

MixedPoint ConvexCombination::apply(const MixedPoint& H) const {
    if (terms_.empty()) throw Error(ErrorCode::config_error, "empty convex combination");
    double total = 0.0;
    for (const auto& t : terms_) total += t.first;
    if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::config_error, "convex weights must sum to 1");
    MixedPoint out = zeros_like(terms_.front().second.signature());
    for (const auto& [w, h] : terms_) out = axpy(w, h.apply(H), out);
    return out;
}

MixedPoint sequence_point(const JacobianHandle& handle, double t) {
    const DirectionalDerivative* psi = handle.directional();
    if (psi == nullptr) throw Error(ErrorCode::unsupported, "handle was built at a differentiable point");
    const auto& dec = psi->decomposition();
    const auto& wdec = handle.inner_derivative()->decomposition();
    MixedPoint out;
    std::size_t q = 0;
    for (std::size_t k = 0; k < dec.blocks.size(); ++k) {
        const auto& b = dec.blocks[k];
        const Index m = dec.signature[k].rows;
        const Index n = dec.signature[k].cols;
        Matrix M = Matrix::Zero(m, m);
        Matrix N = Matrix::Zero(n, n);
        Vector s = b.s;
        for (const auto& a : b.partition.groups) {
            const auto& w = wdec.blocks[q];
            M.block(a.begin, a.begin, a.size(), a.size()) = w.U;
            N.block(a.begin, a.begin, a.size(), a.size()) = w.U;
            s.segment(a.begin, a.size()) += t * w.s;
            ++q;
        }
        const auto& z = b.partition.zero_set;
        if (!z.empty()) {
            const auto& w = wdec.blocks[q];
            const Index na = b.partition.nonzero_count();
            M.block(z.begin, z.begin, z.size(), z.size()) = w.U;
            N.block(na, na, n - na, n - na) = w.V;
            s.segment(z.begin, z.size()) += t * w.s;
            ++q;
        }
        if (b.kind == BlockKind::singular) {
            const Matrix L = b.U * M;
            const Matrix R = b.V * N;
            out.push_back((L * s.asDiagonal()) * R.leftCols(m).transpose());
        } else {
            const Matrix L = b.U * M;
            const Matrix Y = (L * s.asDiagonal()) * L.transpose();
            out.push_back(0.5 * (Y + Y.transpose()));
        }
    }
    return out;
}

ClarkeConsistencyReport clarke_consistency_check(const SymmetricMap& g, const MixedSignature& sig,
                                                 const MixedPoint& X_bar, Index trials,
                                                 std::uint64_t seed, const ClarkeOptions& options) {
    if (trials < 1) throw Error(ErrorCode::config_error, "trials must be >= 1");
    constexpr Index probes = 8;
    ClarkeConsistencyReport rep;
    rep.trials = trials;
    rep.steps = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    const std::size_t S = rep.steps.size();
    rep.raw.assign(S, 0.0);
    rep.extrapolated.assign(S, 0.0);
    rep.extrapolated[0] = std::numeric_limits<double>::quiet_NaN();

    for (Index trial = 0; trial < trials; ++trial) {
        const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(trial));
        const JacobianHandle handle = sample_clarke_element(g, sig, X_bar, trial_seed, options);
        Rng rng = make_rng(trial_seed, 1);
        std::vector<MixedPoint> H(probes);
        std::vector<MixedPoint> VH(probes);
        for (Index p = 0; p < probes; ++p) {
            MixedPoint P;
            for (const auto& b : sig) {
                P.push_back(b.kind == BlockKind::eigen ? gaussian_symmetric(rng, b.rows)
                                                       : gaussian_matrix(rng, b.rows, b.cols));
            }
            const double nrm = norm(P);
            for (auto& B : P) B /= nrm;
            VH[static_cast<std::size_t>(p)] = handle.apply(P);
            H[static_cast<std::size_t>(p)] = std::move(P);
        }
        if (handle.differentiable_point()) continue;  // the handle is G'(X_bar) itself

        std::vector<MixedPoint> previous;
        for (std::size_t si = 0; si < S; ++si) {
            const MixedPoint Xt = sequence_point(handle, rep.steps[si]);
            const FrechetOperator Ft(g, decompose(sig, Xt, options.tol_group));
            std::vector<MixedPoint> current;
            for (Index p = 0; p < probes; ++p) {
                const auto pi = static_cast<std::size_t>(p);
                current.push_back(Ft.apply(H[pi]));
                rep.raw[si] = std::max(rep.raw[si], norm(axpy(-1.0, VH[pi], current.back())));
                if (si > 0) {
                    const MixedPoint limit =
                        axpy(-1.0 / 9.0, previous[pi], axpy(10.0 / 9.0, current.back(), zeros_like(sig)));
                    rep.extrapolated[si] =
                        std::max(rep.extrapolated[si], norm(axpy(-1.0, VH[pi], limit)));
                }
            }
            previous = std::move(current);
        }
    }
    rep.pass = rep.extrapolated.back() <= rep.tolerance;
    return rep;
}

}  // namespace specop
