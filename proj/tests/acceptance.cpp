// Acceptance suite: every criterion runs at its stated tolerance and prints
// one [PASS]/[FAIL] line. The process exits nonzero if any criterion fails.
//
// Usage: acceptance <path-to-ugcl-cli> [workdir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ugcl/dataset.hpp"
#include "ugcl/eval.hpp"
#include "ugcl/gradcheck.hpp"
#include "ugcl/loss.hpp"
#include "ugcl/solver.hpp"

namespace fs = std::filesystem;
using namespace ugcl;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(const char* id, bool pass, const std::string& detail, double elapsed,
            double budget_s) {
    const bool in_budget = elapsed < budget_s;
    const bool ok = pass && in_budget;
    std::printf("[%s] %s: %s (%.1f s, budget %.0f s)\n", ok ? "PASS" : "FAIL", id, detail.c_str(),
                elapsed, budget_s);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c);
    return buf;
}

// --- A1: constraint oracles -------------------------------------------------

void a1() {
    const auto start = Clock::now();
    ConfigRange range;
    double max_rot = 0.0, max_vp = 0.0, max_wc = 0.0;
    bool pass = true;
    for (int trial = 0; trial < 1000; ++trial) {
        Rng rng(101, static_cast<std::uint64_t>(trial));
        const CameraParams p = sample_config(range, rng);
        const auto m = compose_projection(p);

        for (const double r : rotation_residuals(m.r)) max_rot = std::max(max_rot, std::abs(r));

        // Finite vanishing points against the infinity-point projection oracle.
        const auto vps = vanishing_points(m);
        const Vec4<double> axes[3] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}};
        for (int j = 0; j < 3; ++j) {
            const auto& v = vps[static_cast<std::size_t>(j)];
            if (!v.finite) continue;
            const double hx = dot(m.p.row(0), axes[j]);
            const double hy = dot(m.p.row(1), axes[j]);
            const double hw = dot(m.p.row(2), axes[j]);
            const double ex = std::abs(v.point.x - hx / hw) / std::max(1.0, std::abs(hx / hw));
            const double ey = std::abs(v.point.y - hy / hw) / std::max(1.0, std::abs(hy / hw));
            max_vp = std::max({max_vp, ex, ey});
        }

        const auto wc = world_center(m);
        if (wc.finite) {
            const auto oracle = project_point(m, Vec3<double>{0.0, 0.0, 0.0});
            max_wc = std::max(max_wc, std::abs(wc.point.x - oracle.x) / std::max(1.0, std::abs(oracle.x)));
            max_wc = std::max(max_wc, std::abs(wc.point.y - oracle.y) / std::max(1.0, std::abs(oracle.y)));
        }
    }
    pass = max_rot < 1e-10 && max_vp < 1e-9 && max_wc < 1e-9;
    report("A1 constraint oracles", pass,
           fmt("1000 cameras, max rotation residual %.2e, vp rel err %.2e, wc rel err %.2e", max_rot,
               max_vp, max_wc),
           seconds_since(start), 5.0);
}

// --- A2: gradient suite -----------------------------------------------------

void a2() {
    const auto start = Clock::now();
    GradCheckOptions opt;  // 100 trials x 12 configurations, tol 1e-5
    const GradCheckResult res = run_gradcheck(opt);
    double max_err = 0.0;
    int excluded = 0;
    for (const auto& cr : res.configs) {
        max_err = std::max(max_err, cr.max_err);
        excluded += cr.excluded;
    }
    report("A2 gradient suite", res.all_pass,
           fmt("100 configs x 12 losses, max rel err %.2e, %.0f excluded", max_err,
               static_cast<double>(excluded)),
           seconds_since(start), 30.0);
}

// --- A3: round-trip suite ---------------------------------------------------

void a3() {
    const auto start = Clock::now();
    ConfigRange range;
    const auto samples = make_dataset(range, 1000, 303);
    double max_rel = 0.0;
    for (const Sample& s : samples) {
        for (int i = 0; i < s.n_points(); ++i) {
            const auto k = static_cast<std::size_t>(i);
            CameraParams p = s.gt;
            p.d = s.disparity[k];
            const auto back = reconstruct_3d(p, s.left[k]);
            const auto& src = s.points3d[k];
            const double err = std::sqrt((back.x - src.x) * (back.x - src.x) +
                                         (back.y - src.y) * (back.y - src.y) +
                                         (back.z - src.z) * (back.z - src.z));
            const double scale = std::max(1.0, std::sqrt(src.x * src.x + src.y * src.y + src.z * src.z));
            max_rel = std::max(max_rel, err / scale);
        }
    }
    report("A3 round-trip suite", max_rel < 1e-8,
           fmt("1000 samples x 16 points, max relative error %.2e", max_rel), seconds_since(start),
           5.0);
}

// --- A4: recovery experiment ------------------------------------------------

void a4() {
    const auto start = Clock::now();
    const ConfigRange range = recovery_range();
    const auto samples = make_dataset(range, 100, 1234);
    int recovered = 0;
    double worst = 0.0;
    for (const Sample& s : samples) {
        SolveOptions opt;  // vp-wc-r, fixed omega, gt perturbed 20%, defaults
        opt.seed = 7;
        const SolveResult res = solve_sample(s, range, opt);
        double max_err = 0.0;
        for (const double e : res.normalized_error) max_err = std::max(max_err, e);
        recovered += max_err < 1e-3;
        worst = std::max(worst, max_err);
    }
    report("A4 recovery experiment", recovered >= 95,
           fmt("%.0f/100 samples within 1e-3 normalized, worst %.2e", static_cast<double>(recovered),
               worst),
           seconds_since(start), 60.0);
}

// --- A5: ablation direction -------------------------------------------------

AblateResult run_benchmark_ablation() {
    const ConfigRange range = benchmark_range();
    const auto samples = make_dataset(range, 2000, 42);
    AblateOptions opt;  // 100 epochs, batch 32, lr 0.001, disentangled, fixed
    opt.seed = 42;
    return ablate(samples, range, opt, "benchmark-2000@42");
}

void a5(const AblateResult& res, double ablation_seconds) {
    double intrinsic[3];
    for (int i = 0; i < 3; ++i) {
        const auto& mae = res.table.rows[static_cast<std::size_t>(i)].mae;
        intrinsic[i] = (mae[0] + mae[1] + mae[2] + mae[3]) / 4.0;
    }
    const bool pass = intrinsic[2] <= 1.05 * intrinsic[1] && intrinsic[1] <= 1.05 * intrinsic[0];
    report("A5 ablation direction", pass,
           fmt("intrinsic MAE vp %.4f, vp-wc %.4f, vp-wc-r %.4f (each step within 1.05x)",
               intrinsic[0], intrinsic[1], intrinsic[2]),
           ablation_seconds, 600.0);
}

// --- A6: disentanglement ----------------------------------------------------

void a6() {
    const auto start = Clock::now();
    const ConfigRange range = recovery_range();
    const auto samples = make_dataset(range, 1, 88);
    const Sample& s = samples[0];
    auto pa = s.gt.as_array();
    for (std::size_t k = 0; k < 10; ++k) pa[k] *= 1.1;
    const CameraParams pred = CameraParams::from_array(pa);

    LossConfig cfg;
    cfg.variant = LossVariant::disentangled;
    const auto jac = camera_term_jacobian(pred, s, cfg);
    int nonzero_cross = 0;
    for (std::size_t q = 0; q < 10; ++q)
        for (std::size_t j = 0; j < 10; ++j) nonzero_cross += q != j && jac[q][j] != 0.0;

    cfg.variant = LossVariant::plain;
    const auto plain = camera_term_jacobian(pred, s, cfg);
    int plain_cross = 0;
    for (std::size_t q = 0; q < 10; ++q)
        for (std::size_t j = 0; j < 10; ++j) plain_cross += q != j && plain[q][j] != 0.0;

    report("A6 disentanglement", nonzero_cross == 0 && plain_cross > 0,
           fmt("disentangled cross-gradients %.0f (exact zeros), plain nonzero cross-gradients %.0f",
               static_cast<double>(nonzero_cross), static_cast<double>(plain_cross)),
           seconds_since(start), 30.0);
}

// --- A7: determinism of the CLI ----------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int shell(const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()); }

void a7(const std::string& cli, const fs::path& work) {
    const auto start = Clock::now();
    fs::create_directories(work);
    bool pass = true;
    std::string detail;

    const auto gen_a = work / "det_a.jsonl";
    const auto gen_b = work / "det_b.jsonl";
    pass &= shell(cli + " generate --count 50 --seed 5 --out " + gen_a.string()) == 0;
    pass &= shell(cli + " generate --count 50 --seed 5 --out " + gen_b.string()) == 0;
    const bool gen_ok = pass && slurp(gen_a) == slurp(gen_b);
    pass &= gen_ok;

    const auto train_data = work / "det_train.jsonl";
    pass &= shell(cli + " generate --count 200 --seed 7 --preset benchmark --out " +
                  train_data.string()) == 0;
    const auto t_a = work / "train_a";
    const auto t_b = work / "train_b";
    const std::string train_flags = " train --dataset " + train_data.string() +
                                    " --epochs 5 --seed 3 --out ";
    pass &= shell(cli + train_flags + t_a.string()) == 0;
    pass &= shell(cli + train_flags + t_b.string()) == 0;
    const bool train_ok = pass &&
                          slurp(t_a / "curves_vp-wc-r.csv") == slurp(t_b / "curves_vp-wc-r.csv") &&
                          slurp(t_a / "regressor.json") == slurp(t_b / "regressor.json");
    pass &= train_ok;

    const auto ab_a = work / "ablate_a";
    const auto ab_b = work / "ablate_b";
    const std::string ablate_flags = " ablate --dataset " + train_data.string() +
                                     " --epochs 2 --seed 3 --out ";
    pass &= shell(cli + ablate_flags + ab_a.string()) == 0;
    pass &= shell(cli + ablate_flags + ab_b.string()) == 0;
    bool ablate_ok = pass;
    if (ablate_ok) {
        ablate_ok &= slurp(ab_a / "mae_table.csv") == slurp(ab_b / "mae_table.csv");
        for (const char* f : {"curves_vp.csv", "curves_vp-wc.csv", "curves_vp-wc-r.csv"})
            ablate_ok &= slurp(ab_a / f) == slurp(ab_b / f);
    }
    pass &= ablate_ok;

    detail = std::string("generate ") + (gen_ok ? "identical" : "DIFFERS") + ", train " +
             (train_ok ? "identical" : "DIFFERS") + ", ablate " +
             (ablate_ok ? "identical" : "DIFFERS");
    report("A7 determinism", pass, detail, seconds_since(start), 300.0);
}

// --- A8: training progress ----------------------------------------------------

void a8() {
    const auto start = Clock::now();
    // The pinned run: 100 epochs, batch 32, base lr 0.001, full constraint
    // ladder, on the 2000-sample benchmark.
    const ConfigRange range = benchmark_range();
    const auto samples = make_dataset(range, 2000, 42);
    TrainOptions opt;
    opt.seed = 42;
    const TrainResult trained = train_regressor(samples, range, opt);
    const auto& log = trained.log;
    const double first = log.front().l_total;
    const double last = log.back().l_total;
    const double ratio = first / last;

    // The TrainLog CSV must be well-formed: header plus one row per epoch,
    // each with 34 columns and monotone epoch numbers.
    const std::string csv = train_log_csv(log);
    std::istringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    bool well_formed = line.rfind("epoch,L_total,", 0) == 0;
    int rows = 0;
    int prev_epoch = 0;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        ++rows;
        int cols = 1;
        for (const char c : line) cols += c == ',';
        well_formed &= cols == 34;
        const int epoch = std::atoi(line.c_str());
        well_formed &= epoch > prev_epoch;
        prev_epoch = epoch;
    }
    well_formed &= rows == 100;

    report("A8 training progress", ratio >= 10.0 && well_formed,
           fmt("val L_total epoch 1 %.4f -> epoch 100 %.4f (%.1fx reduction), log well-formed",
               first, last, ratio),
           seconds_since(start), 900.0);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <ugcl-cli> [workdir]\n");
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "ugcl_acceptance";

    a1();
    a2();
    a3();
    a4();

    const auto ablation_start = Clock::now();
    const AblateResult ablation = run_benchmark_ablation();
    std::printf("(benchmark ablation: 3 rungs x 100 epochs on 2000 samples, %.1f s)\n",
                seconds_since(ablation_start));

    a5(ablation);
    a6();
    a7(cli, work);
    a8();

    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
}
