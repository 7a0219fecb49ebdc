#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ugcl/autodiff.hpp"
#include "ugcl/dataset.hpp"
#include "ugcl/errors.hpp"
#include "ugcl/geometry.hpp"

namespace ugcl {

// Plain compares whole predicted sets against their targets; disentangled
// gives every quantity its own term in which only that quantity comes from
// the prediction, removing gradient cross-talk between parameters.
enum class LossVariant { plain, disentangled };

// Cumulative constraint ladder. Vanishing points are always on; the world
// center and the rotation residuals stack on top.
enum class ConstraintSet { vp, vp_wc, vp_wc_r };

// fixed pins every effective weight to 0.5 (the sigmoid of zero); learnable
// exposes the raw omegas to the optimizer.
enum class WeightsMode { fixed, learnable };

struct LossConfig {
    LossVariant variant = LossVariant::disentangled;
    ConstraintSet constraints = ConstraintSet::vp_wc_r;
    WeightsMode weights = WeightsMode::fixed;
    bool include_axis_planes = false;

    bool with_wc() const { return constraints != ConstraintSet::vp; }
    bool with_r() const { return constraints == ConstraintSet::vp_wc_r; }

    std::string constraint_name() const {
        switch (constraints) {
            case ConstraintSet::vp: return "vp";
            case ConstraintSet::vp_wc: return "vp-wc";
            case ConstraintSet::vp_wc_r: return "vp-wc-r";
        }
        return "?";
    }
};

inline ConstraintSet constraint_set_from_name(const std::string& name) {
    if (name == "vp") return ConstraintSet::vp;
    if (name == "vp-wc") return ConstraintSet::vp_wc;
    if (name == "vp-wc-r") return ConstraintSet::vp_wc_r;
    throw UnknownParameter("unknown constraint set: " + name);
}

inline LossVariant variant_from_name(const std::string& name) {
    if (name == "plain") return LossVariant::plain;
    if (name == "disentangled") return LossVariant::disentangled;
    throw UnknownParameter("unknown loss variant: " + name);
}

inline WeightsMode weights_from_name(const std::string& name) {
    if (name == "fixed") return WeightsMode::fixed;
    if (name == "learnable") return WeightsMode::learnable;
    throw UnknownParameter("unknown weights mode: " + name);
}

inline std::string variant_name(LossVariant v) {
    return v == LossVariant::plain ? "plain" : "disentangled";
}

inline std::string weights_name(WeightsMode w) {
    return w == WeightsMode::fixed ? "fixed" : "learnable";
}

inline constexpr int kOmegaCount = 19;

// Raw (pre-sigmoid) learnable weights. Indices follow the loss layout:
// 0..9 camera terms, 10..12 reconstruction terms, 13..15 vanishing-point
// terms, 16..18 the three group weights.
struct OmegaWeights {
    std::array<double, kOmegaCount> raw{};

    std::array<double, kOmegaCount> effective() const {
        std::array<double, kOmegaCount> out{};
        for (int i = 0; i < kOmegaCount; ++i) out[static_cast<std::size_t>(i)] = sigmoid(raw[static_cast<std::size_t>(i)]);
        return out;
    }
};

template <class T>
T mae(std::span<const T> pred, std::span<const double> actual) {
    if (pred.size() != actual.size()) throw LengthMismatch();
    if (pred.empty()) throw LengthMismatch("mae needs at least one element");
    using std::abs;
    T sum = abs(pred[0] - T(actual[0]));
    for (std::size_t i = 1; i < pred.size(); ++i) sum = sum + abs(pred[i] - T(actual[i]));
    return sum / T(static_cast<double>(pred.size()));
}

inline double mae(std::span<const double> pred, std::span<const double> actual) {
    return mae<double>(pred, actual);
}

// Quantities a disentangled term can substitute: one of the ten camera
// parameters, one derived 3D coordinate, or one derived vanishing point.
enum class ParamId {
    fx, fy, px, py, b, d, theta_p, tx, ty, tz,
    x3d, y3d, z3d,
    vx, vy, vz,
};

template <class T>
CameraParamsT<T> constant_params(const CameraParams& p) {
    return {T(p.fx), T(p.fy), T(p.px), T(p.py), T(p.b), T(p.d), T(p.theta_p), T(p.tx), T(p.ty), T(p.tz)};
}

namespace detail {

template <class T>
CameraParamsT<T> substitute_one(const CameraParams& gt, const CameraParamsT<T>& pred, int k) {
    auto arr = constant_params<T>(gt).as_array();
    arr[static_cast<std::size_t>(k)] = pred.as_array()[static_cast<std::size_t>(k)];
    return CameraParamsT<T>::from_array(arr);
}

// MAE over the parameter block plus the derived 3D reconstruction block,
// evaluated with `eval_params`, against the sample's stored targets. The
// denominator is structural (10 + 3N) so it does not depend on which entries
// happen to be exact.
template <class T>
T param_pipeline_loss(const CameraParamsT<T>& eval_params, const Sample& s) {
    using std::abs;
    const auto pred = eval_params.as_array();
    const auto gt = s.gt.as_array();
    T sum = T(0.0);
    for (std::size_t k = 0; k < 10; ++k) sum = sum + abs(pred[k] - T(gt[k]));
    for (std::size_t i = 0; i < s.left.size(); ++i) {
        const Vec3<T> r = reconstruct_3d(eval_params, Vec2<T>{T(s.left[i].x), T(s.left[i].y)});
        sum = sum + abs(r.x - T(s.gt_recon[i].x)) + abs(r.y - T(s.gt_recon[i].y)) +
              abs(r.z - T(s.gt_recon[i].z));
    }
    const double n = 10.0 + 3.0 * static_cast<double>(s.left.size());
    return sum / T(n);
}

// Per-coordinate absolute-error sums of the derived reconstruction block.
template <class T>
struct ReconErrors {
    T x, y, z;
};

template <class T>
ReconErrors<T> recon_errors(const CameraParamsT<T>& pred, const Sample& s) {
    using std::abs;
    ReconErrors<T> e{T(0.0), T(0.0), T(0.0)};
    for (std::size_t i = 0; i < s.left.size(); ++i) {
        const Vec3<T> r = reconstruct_3d(pred, Vec2<T>{T(s.left[i].x), T(s.left[i].y)});
        e.x = e.x + abs(r.x - T(s.gt_recon[i].x));
        e.y = e.y + abs(r.y - T(s.gt_recon[i].y));
        e.z = e.z + abs(r.z - T(s.gt_recon[i].z));
    }
    return e;
}

// Vanishing-point error sums with pairwise exclusion: a coordinate pair only
// participates when both the predicted and the actual point are finite. `n`
// counts the participating scalar entries across all three points.
template <class T>
struct VpErrors {
    T x, y, z;
    int n = 0;
};

template <class T>
VpErrors<T> vp_errors(const ConstraintTargetsT<T>& pred, const ConstraintTargets& actual) {
    using std::abs;
    VpErrors<T> e{T(0.0), T(0.0), T(0.0), 0};
    auto pair_err = [&](const FlaggedPoint<T>& p, const FlaggedPoint<double>& a, T& slot) {
        if (!p.finite || !a.finite) return;
        slot = slot + abs(p.point.x - T(a.point.x)) + abs(p.point.y - T(a.point.y));
        e.n += 2;
    };
    pair_err(pred.vx, actual.vx, e.x);
    pair_err(pred.vy, actual.vy, e.y);
    pair_err(pred.vz, actual.vz, e.z);
    return e;
}

}  // namespace detail

// Per-term loss values before weighting; T is double for inference paths and
// the tape variable during optimization.
template <class T>
struct LossTerms {
    std::array<T, 10> cam_terms{};  // L_fx .. L_tz in parameter order
    T x_term{}, y_term{}, z_term{};
    T vx_term{}, vy_term{}, vz_term{};
    T wc_term{};
    std::array<T, 5> rot_terms{};
    std::array<T, 3> axis_terms{};
};

template <class T>
struct LossBreakdown : LossTerms<T> {
    std::array<T, kOmegaCount> omega_eff{};
    T l_cam{}, l_3d{}, l_con{}, l_total{};
};

using LossReport = LossBreakdown<double>;

template <class T>
LossReport to_report(const LossBreakdown<T>& b) {
    LossReport r;
    for (int i = 0; i < 10; ++i) r.cam_terms[static_cast<std::size_t>(i)] = value_of(b.cam_terms[static_cast<std::size_t>(i)]);
    r.x_term = value_of(b.x_term);
    r.y_term = value_of(b.y_term);
    r.z_term = value_of(b.z_term);
    r.vx_term = value_of(b.vx_term);
    r.vy_term = value_of(b.vy_term);
    r.vz_term = value_of(b.vz_term);
    r.wc_term = value_of(b.wc_term);
    for (int i = 0; i < 5; ++i) r.rot_terms[static_cast<std::size_t>(i)] = value_of(b.rot_terms[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 3; ++i) r.axis_terms[static_cast<std::size_t>(i)] = value_of(b.axis_terms[static_cast<std::size_t>(i)]);
    for (int i = 0; i < kOmegaCount; ++i) r.omega_eff[static_cast<std::size_t>(i)] = value_of(b.omega_eff[static_cast<std::size_t>(i)]);
    r.l_cam = value_of(b.l_cam);
    r.l_3d = value_of(b.l_3d);
    r.l_con = value_of(b.l_con);
    r.l_total = value_of(b.l_total);
    return r;
}

// The whole-set diagnostic losses: L1 over the ten parameters, L2 over the
// derived 3D block, L3 over the vanishing-point block, and their mean.
template <class T>
struct SetLosses {
    T l1, l2, l3, lt;
};

template <class T>
SetLosses<T> set_losses(const CameraParamsT<T>& pred, const Sample& s) {
    using std::abs;
    const auto pa = pred.as_array();
    const auto ga = s.gt.as_array();
    T l1 = T(0.0);
    for (std::size_t k = 0; k < 10; ++k) l1 = l1 + abs(pa[k] - T(ga[k]));
    l1 = l1 / T(10.0);

    const auto re = detail::recon_errors(pred, s);
    const T l2 = (re.x + re.y + re.z) / T(3.0 * static_cast<double>(s.left.size()));

    const auto ct = constraint_targets(compose_projection(pred));
    const auto ve = detail::vp_errors(ct, s.gt_targets);
    const T l3 = ve.n > 0 ? (ve.x + ve.y + ve.z) / T(static_cast<double>(ve.n)) : T(0.0);

    return {l1, l2, l3, (l1 + l2 + l3) / T(3.0)};
}

// One disentangled term: only the selected quantity is taken from the
// prediction; every other input to its pipeline stays at ground truth. For
// derived quantities (3D coordinates, vanishing points) the substituted
// quantity is the derived one, computed from the full prediction.
template <class T>
T disentangled_param_loss(ParamId which, const CameraParamsT<T>& pred, const Sample& s) {
    const int idx = static_cast<int>(which);
    if (idx < 0 || idx > static_cast<int>(ParamId::vz)) throw UnknownParameter();
    if (idx <= static_cast<int>(ParamId::tz))
        return detail::param_pipeline_loss(detail::substitute_one(s.gt, pred, idx), s);
    if (which == ParamId::x3d || which == ParamId::y3d || which == ParamId::z3d) {
        const auto re = detail::recon_errors(pred, s);
        const T num = which == ParamId::x3d ? re.x : (which == ParamId::y3d ? re.y : re.z);
        return num / T(3.0 * static_cast<double>(s.left.size()));
    }
    const auto ct = constraint_targets(compose_projection(pred));
    const auto ve = detail::vp_errors(ct, s.gt_targets);
    if (ve.n == 0) return T(0.0);
    const T num = which == ParamId::vx ? ve.x : (which == ParamId::vy ? ve.y : ve.z);
    return num / T(static_cast<double>(ve.n));
}

// Weighted group assembly:
//
//   L_Cam = mean of the 10 weighted camera terms
//   L_3D  = mean of the 3 weighted reconstruction terms
//   L_con = mean of the enabled weighted constraint terms; the world-center,
//           rotation and axis-plane terms carry the group weight since they
//           have no per-term omega of their own
//   L_total = (w17*L_Cam + w18*L_3D + w19*L_con) / 3
//
// Fixed mode pins every effective weight to 0.5 = sigmoid(0).
template <class T>
LossBreakdown<T> group_losses(const LossTerms<T>& terms, const std::array<T, kOmegaCount>& omega_raw,
                              const LossConfig& cfg) {
    LossBreakdown<T> out;
    static_cast<LossTerms<T>&>(out) = terms;

    auto weight = [&](int i) -> T {
        if (cfg.weights == WeightsMode::fixed) return T(0.5);
        return sigmoid(omega_raw[static_cast<std::size_t>(i)]);
    };
    for (int i = 0; i < kOmegaCount; ++i) out.omega_eff[static_cast<std::size_t>(i)] = weight(i);

    const auto& w = out.omega_eff;
    T cam_sum = T(0.0);
    for (std::size_t k = 0; k < 10; ++k) cam_sum = cam_sum + w[k] * out.cam_terms[k];
    out.l_cam = cam_sum / T(10.0);

    out.l_3d = (w[10] * out.x_term + w[11] * out.y_term + w[12] * out.z_term) / T(3.0);

    T con_sum = w[13] * out.vx_term + w[14] * out.vy_term + w[15] * out.vz_term;
    int con_count = 3;
    if (cfg.with_wc()) {
        con_sum = con_sum + w[18] * out.wc_term;
        con_count += 1;
    }
    if (cfg.with_r()) {
        for (const T& t : out.rot_terms) con_sum = con_sum + w[18] * t;
        con_count += 5;
    }
    if (cfg.include_axis_planes) {
        for (const T& t : out.axis_terms) con_sum = con_sum + w[18] * t;
        con_count += 3;
    }
    out.l_con = con_sum / T(static_cast<double>(con_count));

    out.l_total = (w[16] * out.l_cam + w[17] * out.l_3d + w[18] * out.l_con) / T(3.0);
    return out;
}

// Computes every per-term value for one sample. Under the plain variant the
// per-slot values are the shared, fully-predicted set losses; under
// disentangled each slot isolates its own quantity.
template <class T>
LossTerms<T> loss_terms(const CameraParamsT<T>& pred, const Sample& s, const LossConfig& cfg) {
    using std::abs;
    LossTerms<T> out;

    // Camera terms.
    if (cfg.variant == LossVariant::disentangled) {
        for (int k = 0; k < 10; ++k)
            out.cam_terms[static_cast<std::size_t>(k)] =
                detail::param_pipeline_loss(detail::substitute_one(s.gt, pred, k), s);
    } else {
        const T shared = detail::param_pipeline_loss(pred, s);
        out.cam_terms.fill(shared);
    }

    // Reconstruction terms.
    const auto re = detail::recon_errors(pred, s);
    const T denom3d = T(3.0 * static_cast<double>(s.left.size()));
    if (cfg.variant == LossVariant::disentangled) {
        out.x_term = re.x / denom3d;
        out.y_term = re.y / denom3d;
        out.z_term = re.z / denom3d;
    } else {
        const T shared = (re.x + re.y + re.z) / denom3d;
        out.x_term = shared;
        out.y_term = shared;
        out.z_term = shared;
    }

    // Constraint terms.
    const ProjectionModelT<T> model = compose_projection(pred);
    const auto ct = constraint_targets(model);
    const auto ve = detail::vp_errors(ct, s.gt_targets);
    if (ve.n > 0) {
        const T denom = T(static_cast<double>(ve.n));
        if (cfg.variant == LossVariant::disentangled) {
            out.vx_term = ve.x / denom;
            out.vy_term = ve.y / denom;
            out.vz_term = ve.z / denom;
        } else {
            const T shared = (ve.x + ve.y + ve.z) / denom;
            out.vx_term = shared;
            out.vy_term = shared;
            out.vz_term = shared;
        }
    } else {
        out.vx_term = T(0.0);
        out.vy_term = T(0.0);
        out.vz_term = T(0.0);
    }
    if (cfg.with_wc()) {
        if (ct.wc.finite && s.gt_targets.wc.finite)
            out.wc_term = (abs(ct.wc.point.x - T(s.gt_targets.wc.point.x)) +
                           abs(ct.wc.point.y - T(s.gt_targets.wc.point.y))) /
                          T(2.0);
        else
            out.wc_term = T(0.0);
    }
    if (cfg.with_r()) {
        const auto rr = rotation_residuals(model.r);
        out.rot_terms = {abs(rr[0]), abs(rr[1]), abs(rr[2]), rr[3], abs(rr[4])};
    }
    if (cfg.include_axis_planes) out.axis_terms = axis_plane_residuals(model);
    return out;
}

// Full objective for one sample: per-term values plus the weighted groups.
template <class T>
LossBreakdown<T> evaluate_loss(const CameraParamsT<T>& pred, const std::array<T, kOmegaCount>& omega_raw,
                               const Sample& s, const LossConfig& cfg) {
    return group_losses(loss_terms(pred, s, cfg), omega_raw, cfg);
}

// Convenience overload for fixed-weight evaluation.
template <class T>
LossBreakdown<T> evaluate_loss(const CameraParamsT<T>& pred, const Sample& s, const LossConfig& cfg) {
    std::array<T, kOmegaCount> zeros;
    zeros.fill(T(0.0));
    return evaluate_loss(pred, zeros, s, cfg);
}

// Jacobian of the ten camera terms with respect to the ten predicted
// parameters, read straight off the tape. Row q holds dL_q/d(param j); under
// the disentangled variant every off-diagonal entry is exactly zero because
// parameter j never enters the subgraph of L_q.
inline std::array<std::array<double, 10>, 10> camera_term_jacobian(const CameraParams& pred,
                                                                   const Sample& s,
                                                                   const LossConfig& cfg) {
    ad::Tape tape;
    std::array<ad::Var, 10> leaves;
    const auto pa = pred.as_array();
    for (std::size_t k = 0; k < 10; ++k) leaves[k] = tape.leaf(pa[k]);
    const auto pred_vars = CameraParamsT<ad::Var>::from_array(leaves);
    const auto breakdown = evaluate_loss(pred_vars, s, cfg);

    std::array<std::array<double, 10>, 10> jac{};
    for (std::size_t q = 0; q < 10; ++q) {
        if (!breakdown.cam_terms[q].tracked()) continue;  // constant term
        const auto adjoint = tape.gradient(breakdown.cam_terms[q]);
        for (std::size_t j = 0; j < 10; ++j)
            jac[q][j] = adjoint[static_cast<std::size_t>(leaves[j].index())];
    }
    return jac;
}

}  // namespace ugcl
