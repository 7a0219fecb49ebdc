#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ugcl/autodiff.hpp"
#include "ugcl/dataset.hpp"
#include "ugcl/errors.hpp"
#include "ugcl/loss.hpp"

namespace ugcl {

// Adaptive-moment gradient descent; the paper names only a learning rate, so
// the moment constants are the usual defaults.
class Adam {
  public:
    explicit Adam(std::size_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : m_(n, 0.0), v_(n, 0.0), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    std::int64_t step_count() const { return t_; }

    void step(std::span<double> x, std::span<const double> g, double lr) {
        if (x.size() != m_.size() || g.size() != m_.size()) throw LengthMismatch("adam state shape");
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < x.size(); ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g[i] * g[i];
            const double mhat = m_[i] / c1;
            const double vhat = v_[i] / c2;
            x[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
    }

  private:
    std::vector<double> m_, v_;
    std::int64_t t_ = 0;
    double beta1_, beta2_, eps_;
};

inline double normalize_param(double value, const Interval& iv) {
    return iv.width() > 0.0 ? (value - iv.lo) / iv.width() : 0.5;
}

inline double denormalize_param(double u, const Interval& iv) { return iv.lo + u * iv.width(); }

enum class InitMode { gt_perturbed, range_midpoint };

struct SolveOptions {
    LossConfig cfg{};
    InitMode init = InitMode::gt_perturbed;
    double perturb = 0.2;  // relative perturbation of each ground-truth value
    int max_iters = 2000;
    double tol = 1e-8;
    double lr = 0.02;
    double lr_end = 1e-7;
    int warmup_iters = 50;
    std::uint64_t seed = 0;
    bool freeze_omega = false;
    bool record_trace = false;
};

struct SolveResult {
    CameraParams params{};
    OmegaWeights omega{};
    LossReport final_report{};
    std::vector<LossReport> trace;
    int iterations = 0;
    bool converged = false;
    std::array<double, 10> normalized_error{};  // |u_final - u_gt| per parameter
};

namespace detail {

inline double cosine_lr(double lr0, double lr_end, int warmup, int t, int total) {
    if (t < warmup) return lr0 * static_cast<double>(t + 1) / static_cast<double>(warmup);
    const double frac = total > warmup
                            ? static_cast<double>(t - warmup) / static_cast<double>(total - warmup)
                            : 1.0;
    return lr_end + 0.5 * (lr0 - lr_end) * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace detail

// Direct per-sample optimization of the ten camera parameters (plus the raw
// omegas when learnable and not frozen) under the configured loss. Parameters
// are optimized in range-normalized units for conditioning.
inline SolveResult solve_sample(const Sample& s, const ConfigRange& range, const SolveOptions& opt) {
    std::array<Interval, 10> ivs;
    for (int k = 0; k < 10; ++k) ivs[static_cast<std::size_t>(k)] = range.param_interval(k);

    const auto gt = s.gt.as_array();
    std::array<double, 10> u{};
    Rng rng(opt.seed, static_cast<std::uint64_t>(s.id) * 2 + 1);
    for (std::size_t k = 0; k < 10; ++k) {
        double init_value = ivs[k].midpoint();
        if (opt.init == InitMode::gt_perturbed)
            init_value = gt[k] * (1.0 + rng.uniform(-opt.perturb, opt.perturb));
        u[k] = std::clamp(normalize_param(init_value, ivs[k]), 0.0, 1.0);
    }

    const bool learn_omega = opt.cfg.weights == WeightsMode::learnable && !opt.freeze_omega;
    std::vector<double> x(u.begin(), u.end());
    if (learn_omega) x.resize(10 + kOmegaCount, 0.0);

    Adam adam(x.size());
    ad::Tape tape;
    SolveResult result;

    int t = 0;
    for (; t < opt.max_iters; ++t) {
        tape.reset();
        std::array<ad::Var, 10> leaves;
        for (std::size_t k = 0; k < 10; ++k) leaves[k] = tape.leaf(x[k]);
        std::array<ad::Var, 10> raw;
        for (std::size_t k = 0; k < 10; ++k)
            raw[k] = ad::Var(ivs[k].lo) + leaves[k] * ad::Var(ivs[k].width());
        const auto pred = CameraParamsT<ad::Var>::from_array(raw);

        std::array<ad::Var, kOmegaCount> omega;
        std::vector<ad::Var> omega_leaves;
        if (learn_omega) {
            omega_leaves.reserve(kOmegaCount);
            for (int i = 0; i < kOmegaCount; ++i) {
                omega_leaves.push_back(tape.leaf(x[10 + static_cast<std::size_t>(i)]));
                omega[static_cast<std::size_t>(i)] = omega_leaves.back();
            }
        } else {
            omega.fill(ad::Var(0.0));
        }

        const auto breakdown = evaluate_loss(pred, omega, s, opt.cfg);
        const LossReport report = to_report(breakdown);
        if (!std::isfinite(report.l_total))
            throw NonFiniteLoss("loss became non-finite at iteration " + std::to_string(t) +
                                " of sample " + std::to_string(s.id));
        if (opt.record_trace) result.trace.push_back(report);
        if (report.l_total < opt.tol) {
            result.converged = true;
            break;
        }

        const auto adjoint = tape.gradient(breakdown.l_total);
        std::vector<double> g(x.size(), 0.0);
        for (std::size_t k = 0; k < 10; ++k) g[k] = adjoint[static_cast<std::size_t>(leaves[k].index())];
        if (learn_omega)
            for (int i = 0; i < kOmegaCount; ++i)
                g[10 + static_cast<std::size_t>(i)] =
                    adjoint[static_cast<std::size_t>(omega_leaves[static_cast<std::size_t>(i)].index())];

        adam.step(x, g, detail::cosine_lr(opt.lr, opt.lr_end, opt.warmup_iters, t, opt.max_iters));
        for (std::size_t k = 0; k < 10; ++k) x[k] = std::clamp(x[k], 0.0, 1.0);
    }

    result.iterations = t;
    std::array<double, 10> final_raw{};
    for (std::size_t k = 0; k < 10; ++k) {
        final_raw[k] = denormalize_param(x[k], ivs[k]);
        result.normalized_error[k] = std::abs(x[k] - normalize_param(gt[k], ivs[k]));
    }
    result.params = CameraParams::from_array(final_raw);
    if (learn_omega)
        for (int i = 0; i < kOmegaCount; ++i) result.omega.raw[static_cast<std::size_t>(i)] = x[10 + static_cast<std::size_t>(i)];

    std::array<double, kOmegaCount> omega_d{};
    for (int i = 0; i < kOmegaCount; ++i) omega_d[static_cast<std::size_t>(i)] = result.omega.raw[static_cast<std::size_t>(i)];
    result.final_report = evaluate_loss(constant_params<double>(result.params), omega_d, s, opt.cfg);
    if (!result.converged && result.final_report.l_total < opt.tol) result.converged = true;
    return result;
}

// The correspondence-fed stand-in for the image backbone: one 64-unit tanh
// hidden layer over the flattened, frame-normalized stereo observations, with
// sigmoid range-squashing so outputs always land inside the sampling ranges.
struct Regressor {
    int n_points = 16;
    int hidden = 64;
    std::vector<double> w1, b1, w2, b2;

    std::size_t weight_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

    static Regressor init(int n_points, std::uint64_t seed) {
        Regressor r;
        r.n_points = n_points;
        const int in = 4 * n_points;
        r.w1.resize(static_cast<std::size_t>(r.hidden * in));
        r.b1.assign(static_cast<std::size_t>(r.hidden), 0.0);
        r.w2.resize(static_cast<std::size_t>(10 * r.hidden));
        r.b2.assign(10, 0.0);
        Rng rng(seed, 0xabcdef);
        const double lim1 = std::sqrt(6.0 / static_cast<double>(in + r.hidden));
        for (double& w : r.w1) w = rng.uniform(-lim1, lim1);
        const double lim2 = std::sqrt(6.0 / static_cast<double>(r.hidden + 10));
        for (double& w : r.w2) w = rng.uniform(-lim2, lim2);
        return r;
    }
};

namespace detail {

inline std::vector<double> regressor_features(const Sample& s, const ConfigRange& range) {
    std::vector<double> f;
    f.reserve(static_cast<std::size_t>(4 * s.n_points()));
    const double w = range.image_width;
    const double h = range.image_height;
    for (int i = 0; i < s.n_points(); ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        f.push_back(s.left[k].x / w);
        f.push_back(s.left[k].y / h);
        f.push_back(s.right[k].x / w);
        f.push_back(s.right[k].y / h);
    }
    return f;
}

template <class T>
CameraParamsT<T> regressor_forward_impl(std::span<const T> w1, std::span<const T> b1,
                                         std::span<const T> w2, std::span<const T> b2, int hidden,
                                         const Sample& s, const ConfigRange& range) {
    using std::tanh;
    const std::vector<double> f = regressor_features(s, range);
    const std::size_t in = f.size();
    std::vector<T> h(static_cast<std::size_t>(hidden));
    for (std::size_t j = 0; j < h.size(); ++j) {
        T acc = b1[j];
        const std::size_t base = j * in;
        for (std::size_t k = 0; k < in; ++k) acc = acc + w1[base + k] * T(f[k]);
        h[j] = tanh(acc);
    }
    std::array<T, 10> out;
    for (std::size_t m = 0; m < 10; ++m) {
        T acc = b2[m];
        const std::size_t base = m * static_cast<std::size_t>(hidden);
        for (std::size_t j = 0; j < h.size(); ++j) acc = acc + w2[base + j] * h[j];
        const Interval iv = range.param_interval(static_cast<int>(m));
        out[m] = T(iv.lo) + sigmoid(acc) * T(iv.width());
    }
    return CameraParamsT<T>::from_array(out);
}

}  // namespace detail

inline CameraParams regressor_forward(const Regressor& r, const Sample& s, const ConfigRange& range) {
    if (s.n_points() != r.n_points) throw LengthMismatch("sample size does not match regressor input");
    return detail::regressor_forward_impl<double>(r.w1, r.b1, r.w2, r.b2, r.hidden, s, range);
}

struct TrainOptions {
    LossConfig cfg{};
    int epochs = 100;
    int batch = 32;
    double lr = 0.001;       // base learning rate; cosine-decayed per epoch
    double lr_min_frac = 0.05;
    std::uint64_t seed = 0;
    double val_fraction = 0.1;
    bool freeze_omega = false;
    OmegaWeights omega_init{};  // raw omegas at the start of training
};

struct TrainLogRow {
    int epoch = 0;
    double l_total = 0.0, l_cam = 0.0, l_3d = 0.0, l_con = 0.0;
    std::array<double, 10> mae{};  // table order (pitch last)
    std::array<double, kOmegaCount> omega_eff{};
};

struct TrainResult {
    Regressor model;
    OmegaWeights omega{};
    std::vector<TrainLogRow> log;
    std::vector<std::size_t> train_idx, val_idx;
    std::size_t steps_per_epoch = 0;
    bool omega_collapsed = false;
};

inline std::string regressor_to_json(const Regressor& r, const OmegaWeights& omega,
                                     const LossConfig& cfg, const ConfigRange& range) {
    auto arr = [](const std::vector<double>& v) {
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ',';
            detail::append_double(out, v[i]);
        }
        out += ']';
        return out;
    };
    std::string out = "{\"kind\":\"ugcl-regressor\",\"n_points\":" + std::to_string(r.n_points);
    out += ",\"hidden\":" + std::to_string(r.hidden);
    out += ",\"w1\":" + arr(r.w1) + ",\"b1\":" + arr(r.b1);
    out += ",\"w2\":" + arr(r.w2) + ",\"b2\":" + arr(r.b2);
    out += ",\"omega\":" + arr(std::vector<double>(omega.raw.begin(), omega.raw.end()));
    out += ",\"variant\":\"" + variant_name(cfg.variant) + "\"";
    out += ",\"constraints\":\"" + cfg.constraint_name() + "\"";
    out += ",\"weights\":\"" + weights_name(cfg.weights) + "\"";
    out += ",\"range\":" + range_to_json(range);
    out += '}';
    return out;
}

struct LoadedRegressor {
    Regressor model;
    OmegaWeights omega;
    LossConfig cfg;
    ConfigRange range;
};

inline LoadedRegressor regressor_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "ugcl-regressor")
        throw SchemaVersionMismatch("not a regressor file");
    LoadedRegressor out;
    out.model.n_points = j.at("n_points").get<int>();
    out.model.hidden = j.at("hidden").get<int>();
    out.model.w1 = j.at("w1").get<std::vector<double>>();
    out.model.b1 = j.at("b1").get<std::vector<double>>();
    out.model.w2 = j.at("w2").get<std::vector<double>>();
    out.model.b2 = j.at("b2").get<std::vector<double>>();
    const auto omega = j.at("omega").get<std::vector<double>>();
    if (omega.size() != kOmegaCount) throw SchemaVersionMismatch("bad omega length");
    std::copy(omega.begin(), omega.end(), out.omega.raw.begin());
    out.cfg.variant = variant_from_name(j.at("variant").get<std::string>());
    out.cfg.constraints = constraint_set_from_name(j.at("constraints").get<std::string>());
    out.cfg.weights = weights_from_name(j.at("weights").get<std::string>());
    out.range = range_from_json(j.at("range"));
    return out;
}

// Mini-batch training of the regressor (and the omegas when learnable) on the
// configured loss. Deterministic for a given seed: the split, the shuffles,
// and the weight init all derive from it.
inline TrainResult train_regressor(const std::vector<Sample>& data, const ConfigRange& range,
                                   const TrainOptions& opt) {
    if (data.empty()) throw LengthMismatch("training dataset is empty");
    const int n_points = data.front().n_points();

    TrainResult result;
    result.model = Regressor::init(n_points, opt.seed);

    // Deterministic 90/10 split.
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng split_rng(opt.seed, 0x5bd1);
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[split_rng.next_u64() % i]);
    const std::size_t val_count = static_cast<std::size_t>(std::floor(
        static_cast<double>(data.size()) * opt.val_fraction));
    result.val_idx.assign(idx.end() - static_cast<std::ptrdiff_t>(val_count), idx.end());
    result.train_idx.assign(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(val_count));

    const bool learn_omega = opt.cfg.weights == WeightsMode::learnable && !opt.freeze_omega;
    const std::size_t n_weights = result.model.weight_count();
    std::vector<double> params;
    params.reserve(n_weights + (learn_omega ? kOmegaCount : 0));
    auto push_all = [&](const std::vector<double>& v) { params.insert(params.end(), v.begin(), v.end()); };
    push_all(result.model.w1);
    push_all(result.model.b1);
    push_all(result.model.w2);
    push_all(result.model.b2);
    result.omega = opt.omega_init;
    if (learn_omega)
        params.insert(params.end(), opt.omega_init.raw.begin(), opt.omega_init.raw.end());

    Adam adam(params.size());
    ad::Tape tape;

    const std::size_t batch = static_cast<std::size_t>(opt.batch);
    const std::size_t steps_per_epoch = result.train_idx.size() / batch;
    result.steps_per_epoch = steps_per_epoch;

    for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
        const double frac = opt.epochs > 1 ? static_cast<double>(epoch - 1) / (opt.epochs - 1) : 0.0;
        const double lr = opt.lr * (opt.lr_min_frac +
                                    (1.0 - opt.lr_min_frac) * 0.5 * (1.0 + std::cos(std::numbers::pi * frac)));
        Rng shuffle_rng(opt.seed, 0x10000 + static_cast<std::uint64_t>(epoch));
        std::vector<std::size_t> order = result.train_idx;
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.next_u64() % i]);

        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            tape.reset();
            std::vector<ad::Var> leaves;
            leaves.reserve(params.size());
            for (const double p : params) leaves.push_back(tape.leaf(p));

            const std::size_t in = static_cast<std::size_t>(4 * n_points);
            const std::size_t hidden = static_cast<std::size_t>(result.model.hidden);
            std::span<const ad::Var> w1(leaves.data(), hidden * in);
            std::span<const ad::Var> b1(leaves.data() + hidden * in, hidden);
            std::span<const ad::Var> w2(leaves.data() + hidden * in + hidden, 10 * hidden);
            std::span<const ad::Var> b2(leaves.data() + hidden * in + hidden + 10 * hidden, 10);

            std::array<ad::Var, kOmegaCount> omega;
            for (int i = 0; i < kOmegaCount; ++i) {
                const std::size_t k = static_cast<std::size_t>(i);
                omega[k] = learn_omega ? leaves[n_weights + k] : ad::Var(opt.omega_init.raw[k]);
            }

            ad::Var batch_loss(0.0);
            for (std::size_t k = 0; k < batch; ++k) {
                const Sample& s = data[order[step * batch + k]];
                const auto pred = detail::regressor_forward_impl<ad::Var>(
                    w1, b1, w2, b2, result.model.hidden, s, range);
                batch_loss = batch_loss + evaluate_loss(pred, omega, s, opt.cfg).l_total;
            }
            batch_loss = batch_loss / ad::Var(static_cast<double>(batch));
            if (!std::isfinite(batch_loss.value()))
                throw NonFiniteLoss("batch loss non-finite at epoch " + std::to_string(epoch));

            const auto adjoint = tape.gradient(batch_loss);
            std::vector<double> g(params.size());
            for (std::size_t i = 0; i < params.size(); ++i)
                g[i] = adjoint[static_cast<std::size_t>(leaves[i].index())];
            adam.step(params, g, lr);
        }

        // Sync flat parameters back into the model for evaluation.
        std::size_t off = 0;
        auto pull = [&](std::vector<double>& v) {
            std::copy(params.begin() + static_cast<std::ptrdiff_t>(off),
                      params.begin() + static_cast<std::ptrdiff_t>(off + v.size()), v.begin());
            off += v.size();
        };
        pull(result.model.w1);
        pull(result.model.b1);
        pull(result.model.w2);
        pull(result.model.b2);
        if (learn_omega)
            for (int i = 0; i < kOmegaCount; ++i) result.omega.raw[static_cast<std::size_t>(i)] = params[n_weights + static_cast<std::size_t>(i)];

        TrainLogRow row;
        row.epoch = epoch;
        std::array<double, kOmegaCount> omega_d = result.omega.raw;
        std::array<double, 10> mae_param_order{};
        for (const std::size_t vi : result.val_idx) {
            const Sample& s = data[vi];
            const CameraParams pred = regressor_forward(result.model, s, range);
            const auto rep = evaluate_loss(constant_params<double>(pred), omega_d, s, opt.cfg);
            row.l_total += rep.l_total;
            row.l_cam += rep.l_cam;
            row.l_3d += rep.l_3d;
            row.l_con += rep.l_con;
            const auto pa = pred.as_array();
            const auto ga = s.gt.as_array();
            for (std::size_t k = 0; k < 10; ++k) mae_param_order[k] += std::abs(pa[k] - ga[k]);
        }
        const double nv = static_cast<double>(std::max<std::size_t>(result.val_idx.size(), 1));
        row.l_total /= nv;
        row.l_cam /= nv;
        row.l_3d /= nv;
        row.l_con /= nv;
        for (std::size_t k = 0; k < 10; ++k)
            row.mae[k] = mae_param_order[static_cast<std::size_t>(kTableOrder[k])] / nv;
        row.omega_eff = OmegaWeights{omega_d}.effective();
        if (learn_omega) {
            bool all_small = true;
            for (const double w : row.omega_eff) all_small &= w < 0.05;
            if (all_small) result.omega_collapsed = true;
        }
        result.log.push_back(row);
    }
    return result;
}

}  // namespace ugcl
