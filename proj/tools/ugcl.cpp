// Command-line front end: dataset generation, per-sample solving, regressor
// training, evaluation, the constraint-ladder ablation, gradient checking,
// and a constraint report for user-supplied cameras.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ugcl/dataset.hpp"
#include "ugcl/eval.hpp"
#include "ugcl/gradcheck.hpp"
#include "ugcl/loss.hpp"
#include "ugcl/solver.hpp"

namespace fs = std::filesystem;
using namespace ugcl;

namespace {

// Messages go to stdout and, when an output directory is active, to log.txt.
class RunLog {
  public:
    void open(const fs::path& dir) {
        file_.open(dir / "log.txt", std::ios::trunc);
    }
    void line(const std::string& msg) {
        std::cout << msg << '\n';
        if (file_.is_open()) file_ << msg << '\n';
    }

  private:
    std::ofstream file_;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

struct CommonLossFlags {
    std::string constraints = "vp-wc-r";
    std::string variant = "disentangled";
    std::string weights = "fixed";
    bool axis_planes = false;

    LossConfig to_config() const {
        LossConfig cfg;
        cfg.constraints = constraint_set_from_name(constraints);
        cfg.variant = variant_from_name(variant);
        cfg.weights = weights_from_name(weights);
        cfg.include_axis_planes = axis_planes;
        return cfg;
    }

    void add_to(CLI::App* cmd) {
        cmd->add_option("--constraints", constraints, "constraint set: vp, vp-wc, vp-wc-r")
            ->check(CLI::IsMember({"vp", "vp-wc", "vp-wc-r"}));
        cmd->add_option("--variant", variant, "loss variant: plain or disentangled")
            ->check(CLI::IsMember({"plain", "disentangled"}));
        cmd->add_option("--weights", weights, "omega mode: fixed (0.5 each) or learnable")
            ->check(CLI::IsMember({"fixed", "learnable"}));
        cmd->add_flag("--axis-planes", axis_planes,
                      "include the literal axis-plane residuals in L_con (off by default)");
    }

    nlohmann::json to_json() const {
        return {{"constraints", constraints}, {"variant", variant}, {"weights", weights},
                {"axis_planes", axis_planes}};
    }
};

ConfigRange range_for(const std::string& preset, const std::string& range_file) {
    ConfigRange range;
    if (preset == "benchmark")
        range = benchmark_range();
    else if (preset == "recovery")
        range = recovery_range();
    if (!range_file.empty()) {
        std::ifstream in(range_file);
        if (!in) throw IoError("cannot open range file: " + range_file);
        nlohmann::json j;
        in >> j;
        range = range_from_json(j);
    }
    validate_range(range);
    return range;
}

std::string range_summary(const ConfigRange& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "fov [%g,%g] deg  pitch [%g,%g] rad  px [%g,%g]  py [%g,%g]  b [%g,%g] m  "
                  "t [%g,%g]x[%g,%g]x[%g,%g] m  depth [%g,%g] m  %dx%d px  N=%d%s",
                  r.fov_deg.lo, r.fov_deg.hi, r.pitch_rad.lo, r.pitch_rad.hi, r.px.lo, r.px.hi,
                  r.py.lo, r.py.hi, r.baseline.lo, r.baseline.hi, r.tx.lo, r.tx.hi, r.ty.lo,
                  r.ty.hi, r.tz.lo, r.tz.hi, r.depth.lo, r.depth.hi, r.image_width,
                  r.image_height, r.points_per_sample, r.scene_grid ? "  (landmark grid)" : "");
    return buf;
}

void write_run_config(const fs::path& dir, const nlohmann::json& j) {
    write_file(dir / "run_config", j.dump(2) + "\n");
}

std::string param_line(const CameraParams& p) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "fx=%.6f fy=%.6f px=%.6f py=%.6f b=%.6f d=%.6f theta_p=%.6f tx=%.6f ty=%.6f tz=%.6f",
                  p.fx, p.fy, p.px, p.py, p.b, p.d, p.theta_p, p.tx, p.ty, p.tz);
    return buf;
}

std::string trace_csv(const std::vector<LossReport>& trace) {
    std::string out = "iter,L_total,L_Cam,L_3D,L_con\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += std::to_string(i);
        for (const double v : {trace[i].l_total, trace[i].l_cam, trace[i].l_3d, trace[i].l_con}) {
            out += ',';
            ugcl::detail::append_double(out, v);
        }
        out += '\n';
    }
    return out;
}

int run_generate(std::int64_t count, std::uint64_t seed, const std::string& out_path,
                 const std::string& preset, const std::string& range_file) {
    const ConfigRange range = range_for(preset, range_file);
    const auto samples = make_dataset(range, count, seed);
    const std::string checksum = write_dataset(out_path, samples, range, seed);
    std::cout << "wrote " << samples.size() << " samples to " << out_path << "\n"
              << "ranges: " << range_summary(range) << "\n"
              << "fnv1a64: " << checksum << "\n";
    return 0;
}

int run_solve(const std::string& dataset_path, long index, bool all, const CommonLossFlags& loss,
              const std::string& init, double perturb, int iters, double tol, double lr,
              std::uint64_t seed, bool freeze_omega, bool trace, const std::string& out_dir,
              int threads) {
    const Dataset data = read_dataset(dataset_path);
    if (data.samples.empty()) throw EmptyRange("dataset has no samples");

    fs::create_directories(out_dir);
    RunLog log;
    log.open(out_dir);
    write_run_config(out_dir, {{"subcommand", "solve"},
                               {"dataset", dataset_path},
                               {"index", index},
                               {"all", all},
                               {"loss", loss.to_json()},
                               {"init", init},
                               {"perturb", perturb},
                               {"iters", iters},
                               {"tol", tol},
                               {"lr", lr},
                               {"seed", seed},
                               {"freeze_omega", freeze_omega}});

    SolveOptions opt;
    opt.cfg = loss.to_config();
    opt.init = init == "midpoint" ? InitMode::range_midpoint : InitMode::gt_perturbed;
    opt.perturb = perturb;
    opt.max_iters = iters;
    opt.tol = tol;
    if (lr > 0) opt.lr = lr;
    opt.seed = seed;
    opt.freeze_omega = freeze_omega;

    if (!all) {
        if (index < 0 || index >= static_cast<long>(data.samples.size()))
            throw EmptyRange("sample index out of range");
        opt.record_trace = trace;
        const Sample& s = data.samples[static_cast<std::size_t>(index)];
        const SolveResult res = solve_sample(s, data.header.range, opt);
        log.line("sample " + std::to_string(index) + ": " +
                 (res.converged ? "converged" : "stopped") + " after " +
                 std::to_string(res.iterations) + " iterations, L_total = " +
                 std::to_string(res.final_report.l_total));
        log.line("estimate: " + param_line(res.params));
        log.line("truth:    " + param_line(s.gt));
        double max_err = 0.0;
        for (const double e : res.normalized_error) max_err = std::max(max_err, e);
        log.line("max normalized error: " + std::to_string(max_err));
        std::string sol = "{\"params\":" ;
        {
            std::string arr = "[";
            const auto pa = res.params.as_array();
            for (std::size_t k = 0; k < pa.size(); ++k) {
                if (k) arr += ',';
                ugcl::detail::append_double(arr, pa[k]);
            }
            sol += arr + "]";
        }
        sol += ",\"iterations\":" + std::to_string(res.iterations);
        sol += std::string(",\"converged\":") + (res.converged ? "true" : "false") + "}\n";
        write_file(fs::path(out_dir) / "solution.json", sol);
        if (trace) write_file(fs::path(out_dir) / "trace.csv", trace_csv(res.trace));
        return 0;
    }

    // Batch mode: solve every sample (in parallel when allowed) and report MAE.
    const std::size_t n = data.samples.size();
    std::vector<SolveResult> results(n);
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : hw;
    std::vector<std::future<void>> futures;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < workers; ++w)
        futures.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                results[i] = solve_sample(data.samples[i], data.header.range, opt);
        }));
    for (auto& f : futures) f.get();

    std::vector<CameraParams> preds;
    preds.reserve(n);
    int within = 0;
    for (std::size_t i = 0; i < n; ++i) {
        preds.push_back(results[i].params);
        double max_err = 0.0;
        for (const double e : results[i].normalized_error) max_err = std::max(max_err, e);
        within += max_err < 1e-3;
    }
    MaeTable table;
    table.dataset_id = dataset_path;
    table.sample_count = n;
    table.seed = seed;
    table.rows.push_back(evaluate_predictions("solve[" + loss.constraints + "]", preds, data.samples));
    write_file(fs::path(out_dir) / "mae_table.txt", mae_table_txt(table));
    write_file(fs::path(out_dir) / "mae_table.csv", mae_table_csv(table));
    log.line(mae_table_txt(table));
    log.line("samples with max normalized error < 1e-3: " + std::to_string(within) + "/" +
             std::to_string(n));
    return 0;
}

int run_train(const std::string& dataset_path, const CommonLossFlags& loss, int epochs, int batch,
              double lr, std::uint64_t seed, bool freeze_omega, const std::string& out_dir) {
    const Dataset data = read_dataset(dataset_path);
    fs::create_directories(out_dir);
    RunLog log;
    log.open(out_dir);
    write_run_config(out_dir, {{"subcommand", "train"},
                               {"dataset", dataset_path},
                               {"loss", loss.to_json()},
                               {"epochs", epochs},
                               {"batch", batch},
                               {"lr", lr},
                               {"seed", seed},
                               {"freeze_omega", freeze_omega}});

    TrainOptions opt;
    opt.cfg = loss.to_config();
    opt.epochs = epochs;
    opt.batch = batch;
    opt.lr = lr;
    opt.seed = seed;
    opt.freeze_omega = freeze_omega;
    const TrainResult res = train_regressor(data.samples, data.header.range, opt);

    const std::string slug = opt.cfg.constraint_name();
    write_file(fs::path(out_dir) / ("curves_" + slug + ".csv"), train_log_csv(res.log));
    write_file(fs::path(out_dir) / "regressor.json",
               regressor_to_json(res.model, res.omega, opt.cfg, data.header.range) + "\n");
    char buf[256];
    std::snprintf(buf, sizeof(buf), "epoch %d: val L_total %.6f (L_Cam %.6f, L_3D %.6f, L_con %.6f)",
                  res.log.back().epoch, res.log.back().l_total, res.log.back().l_cam,
                  res.log.back().l_3d, res.log.back().l_con);
    log.line(buf);
    if (res.omega_collapsed)
        log.line("warning: all effective omegas fell below 0.05 (weight collapse)");
    log.line("model written to " + (fs::path(out_dir) / "regressor.json").string());
    return 0;
}

int run_evaluate(const std::string& dataset_path, const std::string& model_path,
                 const std::string& name, const std::string& out_dir) {
    const Dataset data = read_dataset(dataset_path);
    std::ifstream in(model_path);
    if (!in) throw IoError("cannot open model: " + model_path);
    nlohmann::json j;
    in >> j;
    const LoadedRegressor loaded = regressor_from_json(j);

    std::vector<CameraParams> preds;
    preds.reserve(data.samples.size());
    for (const Sample& s : data.samples)
        preds.push_back(regressor_forward(loaded.model, s, loaded.range));

    MaeTable table;
    table.dataset_id = dataset_path;
    table.sample_count = data.samples.size();
    table.seed = data.header.seed;
    table.rows.push_back(evaluate_predictions(name, preds, data.samples));

    fs::create_directories(out_dir);
    RunLog log;
    log.open(out_dir);
    write_run_config(out_dir, {{"subcommand", "evaluate"},
                               {"dataset", dataset_path},
                               {"model", model_path},
                               {"name", name}});
    write_file(fs::path(out_dir) / "mae_table.txt", mae_table_txt(table));
    write_file(fs::path(out_dir) / "mae_table.csv", mae_table_csv(table));
    log.line(mae_table_txt(table));
    return 0;
}

int run_ablate(const std::string& dataset_path, std::uint64_t seed, int epochs, int batch,
               double lr, const std::string& variant, const std::string& weights,
               bool freeze_omega, const std::string& out_dir) {
    const Dataset data = read_dataset(dataset_path);
    fs::create_directories(out_dir);
    RunLog log;
    log.open(out_dir);
    write_run_config(out_dir, {{"subcommand", "ablate"},
                               {"dataset", dataset_path},
                               {"seed", seed},
                               {"epochs", epochs},
                               {"batch", batch},
                               {"lr", lr},
                               {"variant", variant},
                               {"weights", weights},
                               {"freeze_omega", freeze_omega}});

    AblateOptions opt;
    opt.seed = seed;
    opt.epochs = epochs;
    opt.batch = batch;
    opt.lr = lr;
    opt.variant = variant_from_name(variant);
    opt.weights = weights_from_name(weights);
    opt.freeze_omega = freeze_omega;
    const AblateResult res = ablate(data.samples, data.header.range, opt, dataset_path);

    write_file(fs::path(out_dir) / "mae_table.txt", mae_table_txt(res.table));
    write_file(fs::path(out_dir) / "mae_table.csv", mae_table_csv(res.table));
    for (const AblateRung& rung : res.rungs)
        write_file(fs::path(out_dir) / ("curves_" + rung.cfg.constraint_name() + ".csv"),
                   train_log_csv(rung.train.log));
    log.line(mae_table_txt(res.table));
    MaeTable ref;
    ref.dataset_id = "CVGL (published, 19080 images, CNN backbone)";
    ref.rows = reference_cvgl_ablation();
    log.line("reference results, not reproduced at desk scale:");
    log.line(mae_table_txt(ref));
    return 0;
}

int run_gradcheck(int trials, std::uint64_t seed, int points, double tol) {
    GradCheckOptions opt;
    opt.trials = trials;
    opt.seed = seed;
    opt.n_points = points;
    opt.tol = tol;
    const GradCheckResult res = run_gradcheck(opt);
    for (const auto& cr : res.configs) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-30s components %6d  excluded %3d  max err %.3e  %s",
                      cr.label().c_str(), cr.components, cr.excluded, cr.max_err,
                      cr.pass ? "PASS" : "FAIL");
        std::cout << buf << '\n';
    }
    std::cout << (res.all_pass ? "gradcheck: PASS" : "gradcheck: FAIL") << '\n';
    return res.all_pass ? 0 : 4;
}

int run_check(const std::string& input, bool degrees) {
    std::string text;
    if (input.empty() || input == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        text = ss.str();
    } else {
        std::ifstream in(input);
        if (!in) throw IoError("cannot open: " + input);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }

    Mat34<double> p{};
    Mat3<double> rotation{};
    bool have_exact_rotation = false;

    // A JSON object holds camera parameters; otherwise expect 12 numbers.
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        const nlohmann::json j = nlohmann::json::parse(text);
        CameraParams params{};
        params.fx = j.at("fx").get<double>();
        params.fy = j.at("fy").get<double>();
        params.px = j.at("px").get<double>();
        params.py = j.at("py").get<double>();
        params.b = j.value("b", 0.5);
        params.d = j.value("d", 1.0);
        params.theta_p = j.at("theta_p").get<double>();
        params.tx = j.value("tx", 0.0);
        params.ty = j.value("ty", 0.0);
        params.tz = j.value("tz", 0.0);
        if (degrees) params.theta_p = deg2rad(params.theta_p);
        const auto model = compose_projection(params);
        p = model.p;
        rotation = model.r;
        have_exact_rotation = true;
    } else {
        std::istringstream ss(text);
        for (int i = 0; i < 12; ++i)
            if (!(ss >> p.a[static_cast<std::size_t>(i)]))
                throw UnknownParameter("expected 12 whitespace-separated matrix entries");
        rotation = decompose_projection(p).r;
    }

    ProjectionModelT<double> model;
    model.p = p;
    model.r = rotation;
    const auto rr = rotation_residuals(rotation);
    const auto ar = axis_plane_residuals(model);
    const auto ct = constraint_targets(model);

    std::printf("rotation residuals (%s):\n", have_exact_rotation ? "from parameters" : "from RQ factorization");
    std::printf("  r1.r2          % .6e\n", rr[0]);
    std::printf("  r1.r3          % .6e\n", rr[1]);
    std::printf("  r2.r3          % .6e\n", rr[2]);
    std::printf("  |R R^T - I|_F  % .6e\n", rr[3]);
    std::printf("  det(R) - 1     % .6e\n", rr[4]);
    std::printf("axis-plane residuals (|p_i x p_j|, literal; nonzero for valid cameras):\n");
    std::printf("  rows 1,2       % .6e\n", ar[0]);
    std::printf("  rows 1,3       % .6e\n", ar[1]);
    std::printf("  rows 2,3       % .6e\n", ar[2]);
    auto flagged = [](const char* name, const FlaggedPoint<double>& fp) {
        if (fp.finite)
            std::printf("  %-4s (%.6f, %.6f)\n", name, fp.point.x, fp.point.y);
        else
            std::printf("  %-4s at infinity (divisor below 1e-12)\n", name);
    };
    std::printf("vanishing points and world center:\n");
    flagged("V_x", ct.vx);
    flagged("V_y", ct.vy);
    flagged("V_z", ct.vz);
    flagged("W_c", ct.wc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UGCL camera-geometry and constrained-calibration toolkit"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "cap on worker threads (0 = hardware)");

    // generate
    auto* generate = app.add_subcommand("generate", "write a synthetic correspondence dataset");
    std::int64_t count = 900;
    std::uint64_t gen_seed = 0;
    std::string gen_out, range_file, preset = "default";
    generate->add_option("--count", count, "number of samples")->required();
    generate->add_option("--seed", gen_seed, "rng seed")->envname("UGCL_SEED");
    generate->add_option("--out", gen_out, "output dataset path")->required();
    generate->add_option("--range-file", range_file, "JSON file with sampling ranges");
    generate->add_option("--preset", preset, "range preset: default, benchmark, recovery")
        ->check(CLI::IsMember({"default", "benchmark", "recovery"}));

    // solve
    auto* solve = app.add_subcommand("solve", "optimize camera parameters per sample");
    std::string solve_dataset, solve_out = "solve_run", solve_init = "gt-perturbed";
    long solve_index = 0;
    bool solve_all = false, solve_trace = false, solve_freeze = false;
    double solve_perturb = 0.2, solve_tol = 1e-8, solve_lr = 0.0;
    int solve_iters = 2000;
    std::uint64_t solve_seed = 0;
    CommonLossFlags solve_loss;
    solve->add_option("--dataset", solve_dataset, "dataset path")->required();
    solve->add_option("--index", solve_index, "sample index to solve");
    solve->add_flag("--all", solve_all, "solve every sample and report MAE");
    solve_loss.add_to(solve);
    solve->add_option("--init", solve_init, "initialization: gt-perturbed or midpoint")
        ->check(CLI::IsMember({"gt-perturbed", "midpoint"}));
    solve->add_option("--perturb", solve_perturb, "relative perturbation of the ground truth");
    solve->add_option("--iters", solve_iters, "maximum iterations");
    solve->add_option("--tol", solve_tol, "stop when L_total drops below this");
    solve->add_option("--lr", solve_lr, "initial learning rate (0 = default)");
    solve->add_option("--seed", solve_seed, "rng seed")->envname("UGCL_SEED");
    solve->add_flag("--freeze-omega", solve_freeze, "keep omegas at initialization");
    solve->add_flag("--trace", solve_trace, "write the per-iteration loss trace");
    solve->add_option("--out", solve_out, "output directory");

    // train
    auto* train = app.add_subcommand("train", "train the correspondence regressor");
    std::string train_dataset, train_out = "train_run";
    int train_epochs = 100, train_batch = 32;
    double train_lr = 0.001;
    std::uint64_t train_seed = 0;
    bool train_freeze = false;
    CommonLossFlags train_loss;
    train->add_option("--dataset", train_dataset, "dataset path")->required();
    train_loss.add_to(train);
    train->add_option("--epochs", train_epochs, "training epochs");
    train->add_option("--batch", train_batch, "mini-batch size");
    train->add_option("--lr", train_lr, "base learning rate");
    train->add_option("--seed", train_seed, "rng seed")->envname("UGCL_SEED");
    train->add_flag("--freeze-omega", train_freeze, "keep omegas at initialization");
    train->add_option("--out", train_out, "output directory");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "per-parameter MAE of a trained model");
    std::string eval_dataset, eval_model, eval_name = "regressor", eval_out = "eval_run";
    evaluate->add_option("--dataset", eval_dataset, "dataset path")->required();
    evaluate->add_option("--model", eval_model, "regressor.json from train")->required();
    evaluate->add_option("--name", eval_name, "row label");
    evaluate->add_option("--out", eval_out, "output directory");

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "train the vp / vp-wc / vp-wc-r ladder");
    std::string abl_dataset, abl_out = "ablate_run", abl_variant = "disentangled",
                abl_weights = "fixed";
    int abl_epochs = 100, abl_batch = 32;
    double abl_lr = 0.001;
    std::uint64_t abl_seed = 0;
    bool abl_freeze = false;
    ablate_cmd->add_option("--dataset", abl_dataset, "dataset path")->required();
    ablate_cmd->add_option("--seed", abl_seed, "rng seed shared by all rungs")->envname("UGCL_SEED");
    ablate_cmd->add_option("--epochs", abl_epochs, "training epochs per rung");
    ablate_cmd->add_option("--batch", abl_batch, "mini-batch size");
    ablate_cmd->add_option("--lr", abl_lr, "base learning rate");
    ablate_cmd->add_option("--variant", abl_variant, "loss variant")
        ->check(CLI::IsMember({"plain", "disentangled"}));
    ablate_cmd->add_option("--weights", abl_weights, "omega mode")
        ->check(CLI::IsMember({"fixed", "learnable"}));
    ablate_cmd->add_flag("--freeze-omega", abl_freeze, "keep omegas at initialization");
    ablate_cmd->add_option("--out", abl_out, "output directory");

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    int gc_trials = 100, gc_points = 8;
    std::uint64_t gc_seed = 1;
    double gc_tol = 1e-5;
    gradcheck->add_option("--trials", gc_trials, "number of random configurations");
    gradcheck->add_option("--seed", gc_seed, "rng seed")->envname("UGCL_SEED");
    gradcheck->add_option("--points", gc_points, "correspondences per trial sample");
    gradcheck->add_option("--tol", gc_tol, "componentwise error tolerance");

    // check
    auto* check = app.add_subcommand("check",
                                     "print constraint residuals for a 3x4 matrix or camera JSON");
    std::string check_input;
    bool check_degrees = false;
    check->add_option("input", check_input, "file path, or - for stdin");
    check->add_flag("--degrees", check_degrees, "treat theta_p in the JSON as degrees");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*generate) return run_generate(count, gen_seed, gen_out, preset, range_file);
        if (*solve)
            return run_solve(solve_dataset, solve_index, solve_all, solve_loss, solve_init,
                             solve_perturb, solve_iters, solve_tol, solve_lr, solve_seed,
                             solve_freeze, solve_trace, solve_out, threads);
        if (*train)
            return run_train(train_dataset, train_loss, train_epochs, train_batch, train_lr,
                             train_seed, train_freeze, train_out);
        if (*evaluate) return run_evaluate(eval_dataset, eval_model, eval_name, eval_out);
        if (*ablate_cmd)
            return run_ablate(abl_dataset, abl_seed, abl_epochs, abl_batch, abl_lr, abl_variant,
                              abl_weights, abl_freeze, abl_out);
        if (*gradcheck) return run_gradcheck(gc_trials, gc_seed, gc_points, gc_tol);
        if (*check) return run_check(check_input, check_degrees);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
