#pragma once

#include <array>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "ugcl/dataset.hpp"
#include "ugcl/loss.hpp"
#include "ugcl/solver.hpp"

namespace ugcl {

inline constexpr std::array<const char*, 10> kTableColumns = {"fx", "fy", "px", "py", "b",
                                                              "d",  "tx", "ty", "tz", "theta_p"};

struct MaeRow {
    std::string name;
    std::array<double, 10> mae{};  // table column order (pitch last)
};

struct MaeTable {
    std::string dataset_id;
    std::uint64_t sample_count = 0;
    std::uint64_t seed = 0;
    std::vector<MaeRow> rows;
};

// Per-parameter mean absolute error in raw units (pixels, meters, radians).
inline MaeRow evaluate_predictions(const std::string& name, std::span<const CameraParams> preds,
                                   std::span<const Sample> samples) {
    if (preds.size() != samples.size() || samples.empty())
        throw AlignmentMismatch("predictions must align one-to-one with samples");
    MaeRow row;
    row.name = name;
    std::array<double, 10> acc{};
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto pa = preds[i].as_array();
        const auto ga = samples[i].gt.as_array();
        for (std::size_t k = 0; k < 10; ++k) acc[k] += std::abs(pa[k] - ga[k]);
    }
    for (std::size_t k = 0; k < 10; ++k)
        row.mae[k] = acc[static_cast<std::size_t>(kTableOrder[k])] / static_cast<double>(preds.size());
    return row;
}

// Published reference MAE on the full-scale CVGL benchmark (19,080 test
// images, CNN backbone). Kept for eyeball comparison next to desk-scale runs;
// not a target this artifact reproduces.
inline const std::vector<MaeRow>& reference_cvgl_ablation() {
    static const std::vector<MaeRow> rows = {
        {"UGCL-VP (reference)", {1.979, 1.973, 0.334, 0.438, 0.143, 2.616, 0.200, 0.125, 0.126, 0.009}},
        {"UGCL-VP-WC (reference)", {1.875, 1.900, 0.253, 0.129, 0.143, 2.640, 0.200, 0.125, 0.125, 0.013}},
        {"UGCL-VP-WC-R (reference)", {1.747, 1.804, 0.139, 0.089, 0.143, 2.542, 0.200, 0.125, 0.126, 0.009}},
    };
    return rows;
}

inline std::string mae_table_txt(const MaeTable& table) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof(buf), "# dataset: %s  samples: %llu  seed: %llu\n",
                  table.dataset_id.c_str(), static_cast<unsigned long long>(table.sample_count),
                  static_cast<unsigned long long>(table.seed));
    out += buf;
    out += "# units: fx,fy,px,py,d in pixels; b,tx,ty,tz in meters; theta_p in radians\n";
    std::snprintf(buf, sizeof(buf), "%-28s", "method");
    out += buf;
    for (const char* col : kTableColumns) {
        std::snprintf(buf, sizeof(buf), "%10s", col);
        out += buf;
    }
    out += '\n';
    for (const MaeRow& row : table.rows) {
        std::snprintf(buf, sizeof(buf), "%-28s", row.name.c_str());
        out += buf;
        for (const double v : row.mae) {
            std::snprintf(buf, sizeof(buf), "%10.4f", v);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

inline std::string mae_table_csv(const MaeTable& table) {
    std::string out = "method";
    for (const char* col : kTableColumns) {
        out += ',';
        out += col;
    }
    out += '\n';
    for (const MaeRow& row : table.rows) {
        out += row.name;
        for (const double v : row.mae) {
            out += ',';
            detail::append_double(out, v);
        }
        out += '\n';
    }
    return out;
}

inline std::string train_log_csv(const std::vector<TrainLogRow>& rows) {
    std::string out = "epoch,L_total,L_Cam,L_3D,L_con";
    const std::array<const char*, 10> mae_cols = {"mae_fx", "mae_fy", "mae_px", "mae_py", "mae_b",
                                                  "mae_d",  "mae_tx", "mae_ty", "mae_tz", "mae_tp"};
    for (const char* c : mae_cols) {
        out += ',';
        out += c;
    }
    for (int i = 1; i <= kOmegaCount; ++i) out += ",omega_" + std::to_string(i);
    out += '\n';
    for (const TrainLogRow& r : rows) {
        out += std::to_string(r.epoch);
        for (const double v : {r.l_total, r.l_cam, r.l_3d, r.l_con}) {
            out += ',';
            detail::append_double(out, v);
        }
        for (const double v : r.mae) {
            out += ',';
            detail::append_double(out, v);
        }
        for (const double v : r.omega_eff) {
            out += ',';
            detail::append_double(out, v);
        }
        out += '\n';
    }
    return out;
}

struct AblateOptions {
    int epochs = 100;
    int batch = 32;
    double lr = 0.001;
    std::uint64_t seed = 0;
    LossVariant variant = LossVariant::disentangled;
    WeightsMode weights = WeightsMode::fixed;
    bool freeze_omega = false;
    double val_fraction = 0.1;
};

struct AblateRung {
    LossConfig cfg;
    TrainResult train;
    MaeRow row;
};

struct AblateResult {
    MaeTable table;
    std::vector<AblateRung> rungs;
};

// Runs the identical training experiment under each rung of the constraint
// ladder and evaluates per-parameter MAE on the shared validation split.
inline AblateResult ablate(const std::vector<Sample>& data, const ConfigRange& range,
                           const AblateOptions& opt, const std::string& dataset_id = "") {
    const std::array<ConstraintSet, 3> ladder = {ConstraintSet::vp, ConstraintSet::vp_wc,
                                                 ConstraintSet::vp_wc_r};
    const std::array<const char*, 3> names = {"UGCL-VP", "UGCL-VP-WC", "UGCL-VP-WC-R"};

    AblateResult result;
    result.table.dataset_id = dataset_id;
    result.table.seed = opt.seed;
    for (std::size_t rung = 0; rung < ladder.size(); ++rung) {
        TrainOptions topt;
        topt.cfg.variant = opt.variant;
        topt.cfg.constraints = ladder[rung];
        topt.cfg.weights = opt.weights;
        topt.epochs = opt.epochs;
        topt.batch = opt.batch;
        topt.lr = opt.lr;
        topt.seed = opt.seed;
        topt.val_fraction = opt.val_fraction;
        topt.freeze_omega = opt.freeze_omega;

        AblateRung r;
        r.cfg = topt.cfg;
        r.train = train_regressor(data, range, topt);

        std::vector<CameraParams> preds;
        std::vector<Sample> val;
        preds.reserve(r.train.val_idx.size());
        val.reserve(r.train.val_idx.size());
        for (const std::size_t vi : r.train.val_idx) {
            val.push_back(data[vi]);
            preds.push_back(regressor_forward(r.train.model, data[vi], range));
        }
        r.row = evaluate_predictions(names[rung], preds, val);
        result.table.sample_count = val.size();
        result.table.rows.push_back(r.row);
        result.rungs.push_back(std::move(r));
    }
    return result;
}

}  // namespace ugcl
