#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ugcl/eval.hpp"
#include "ugcl/solver.hpp"

using namespace ugcl;

TEST_CASE("adam takes bounded, counted steps", "[solver]") {
    Adam adam(2);
    std::vector<double> x{1.0, -1.0};
    const std::vector<double> g{100.0, -0.001};
    adam.step(x, g, 0.1);
    CHECK(adam.step_count() == 1);
    // First step moves by roughly lr in the gradient's sign direction.
    CHECK_THAT(x[0], Catch::Matchers::WithinAbs(1.0 - 0.1, 1e-6));
    CHECK_THAT(x[1], Catch::Matchers::WithinAbs(-1.0 + 0.1, 1e-4));
    CHECK_THROWS_AS(adam.step(x, std::vector<double>{1.0}, 0.1), LengthMismatch);
}

TEST_CASE("normalization helpers handle degenerate intervals", "[solver]") {
    const Interval iv{2.0, 2.0};
    CHECK(normalize_param(2.0, iv) == 0.5);
    CHECK(denormalize_param(0.5, iv) == 2.0);
    const Interval wide{0.0, 10.0};
    CHECK(normalize_param(2.5, wide) == 0.25);
    CHECK(denormalize_param(0.25, wide) == 2.5);
}

TEST_CASE("solving from the truth converges immediately", "[solver]") {
    const ConfigRange range = recovery_range();
    const auto samples = make_dataset(range, 1, 51);
    SolveOptions opt;
    opt.perturb = 0.0;  // ground-truth initialization
    const auto res = solve_sample(samples[0], range, opt);
    CHECK(res.converged);
    CHECK(res.iterations == 0);
    CHECK(res.final_report.l_total < 1e-10);
}

TEST_CASE("perturbed initializations recover the parameters", "[solver]") {
    const ConfigRange range = recovery_range();
    const auto samples = make_dataset(range, 8, 1234);
    for (const Sample& s : samples) {
        SolveOptions opt;
        opt.seed = 7;
        const auto res = solve_sample(s, range, opt);
        double max_err = 0.0;
        for (const double e : res.normalized_error) max_err = std::max(max_err, e);
        INFO("sample " << s.id);
        CHECK(max_err < 1e-3);
    }
}

TEST_CASE("plain and disentangled traces are both recordable", "[solver]") {
    const ConfigRange range = recovery_range();
    const auto samples = make_dataset(range, 1, 77);
    for (const LossVariant variant : {LossVariant::plain, LossVariant::disentangled}) {
        SolveOptions opt;
        opt.cfg.variant = variant;
        opt.max_iters = 50;
        opt.record_trace = true;
        const auto res = solve_sample(samples[0], range, opt);
        REQUIRE(res.trace.size() == 50);
        CHECK(res.trace.front().l_total > res.trace.back().l_total);
    }
}

TEST_CASE("training takes floor(train/batch) steps per epoch", "[solver]") {
    const ConfigRange range = benchmark_range();
    const auto samples = make_dataset(range, 320, 9);
    TrainOptions opt;
    opt.epochs = 1;
    opt.batch = 32;
    opt.val_fraction = 0.0;  // 320 training samples
    const auto res = train_regressor(samples, range, opt);
    CHECK(res.steps_per_epoch == 10);
    CHECK(res.train_idx.size() == 320);

    TrainOptions with_split = opt;
    with_split.val_fraction = 0.1;
    const auto split = train_regressor(samples, range, with_split);
    CHECK(split.train_idx.size() == 288);
    CHECK(split.val_idx.size() == 32);
    CHECK(split.steps_per_epoch == 9);
}

TEST_CASE("training is deterministic under a seed", "[solver]") {
    const ConfigRange range = benchmark_range();
    const auto samples = make_dataset(range, 128, 3);
    TrainOptions opt;
    opt.epochs = 3;
    opt.seed = 21;
    const auto a = train_regressor(samples, range, opt);
    const auto b = train_regressor(samples, range, opt);
    CHECK(train_log_csv(a.log) == train_log_csv(b.log));
    CHECK(a.model.w1 == b.model.w1);
    CHECK(a.model.w2 == b.model.w2);
}

TEST_CASE("regressor outputs always land inside the ranges", "[solver]") {
    const ConfigRange range = benchmark_range();
    const auto samples = make_dataset(range, 10, 33);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const Regressor model = Regressor::init(range.points_per_sample, seed);
        for (const Sample& s : samples) {
            const CameraParams pred = regressor_forward(model, s, range);
            const auto pa = pred.as_array();
            for (int k = 0; k < 10; ++k) {
                const Interval iv = range.param_interval(k);
                CHECK(pa[static_cast<std::size_t>(k)] >= iv.lo);
                CHECK(pa[static_cast<std::size_t>(k)] <= iv.hi);
            }
        }
    }
    const Regressor wrong = Regressor::init(range.points_per_sample + 1, 1);
    CHECK_THROWS_AS(regressor_forward(wrong, samples[0], range), LengthMismatch);
}

TEST_CASE("regressor serialization round trips", "[solver]") {
    const ConfigRange range = benchmark_range();
    const auto samples = make_dataset(range, 40, 12);
    TrainOptions opt;
    opt.epochs = 2;
    opt.seed = 5;
    const auto trained = train_regressor(samples, range, opt);
    const std::string json = regressor_to_json(trained.model, trained.omega, opt.cfg, range);
    const LoadedRegressor loaded = regressor_from_json(nlohmann::json::parse(json));
    for (const Sample& s : samples) {
        const auto a = regressor_forward(trained.model, s, range).as_array();
        const auto b = regressor_forward(loaded.model, s, loaded.range).as_array();
        CHECK(a == b);
    }
}

TEST_CASE("collapsed weights are detected, not hidden", "[solver]") {
    const ConfigRange range = benchmark_range();
    const auto samples = make_dataset(range, 64, 13);
    TrainOptions opt;
    opt.epochs = 1;
    opt.cfg.weights = WeightsMode::learnable;
    opt.omega_init.raw.fill(-4.0);  // sigmoid(-4) ~ 0.018 < 0.05 everywhere
    const auto res = train_regressor(samples, range, opt);
    CHECK(res.omega_collapsed);

    TrainOptions healthy = opt;
    healthy.omega_init = OmegaWeights{};
    CHECK(!train_regressor(samples, range, healthy).omega_collapsed);
}

TEST_CASE("frozen omegas stay at their initialization", "[solver]") {
    const ConfigRange range = benchmark_range();
    const auto samples = make_dataset(range, 64, 14);
    TrainOptions opt;
    opt.epochs = 2;
    opt.cfg.weights = WeightsMode::learnable;
    opt.freeze_omega = true;
    opt.omega_init.raw.fill(0.25);
    const auto res = train_regressor(samples, range, opt);
    for (const double w : res.omega.raw) CHECK(w == 0.25);
}
