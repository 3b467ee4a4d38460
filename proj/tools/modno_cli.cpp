// Command-line front end: data generation, training, evaluation, full
// benchmark sweeps, cost accounting, and the gradient self-check.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "modno/checkpoint.hpp"
#include "modno/errors.hpp"
#include "modno/experiment.hpp"
#include "modno/gradcheck.hpp"
#include "modno/matrix.hpp"
#include "modno/rng.hpp"

namespace {

using namespace modno;

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string qtag(double q) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%g", q);
    return buf;
}

ExperimentConfig load_config_with_overrides(const std::string& path,
                                            const std::optional<std::uint64_t>& seed) {
    ExperimentConfig cfg = load_experiment_config(path);
    if (seed) cfg.seed = *seed;
    return cfg;
}

int cmd_datagen(const std::string& config_path, const std::string& out_dir,
                const std::optional<std::uint64_t>& seed) {
    ExperimentConfig cfg = load_config_with_overrides(config_path, seed);
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    for (int i = 0; i < static_cast<int>(cfg.operators.size()); ++i) {
        const std::string& name = cfg.operators[static_cast<std::size_t>(i)].name;
        for (const char* split : {"train", "test"}) {
            DatasetShard shard = build_operator_shard(cfg, i, split);
            std::filesystem::path path =
                std::filesystem::path(out_dir) / (name + "_" + split + ".bin");
            save_shard(path.string(), shard);
            std::printf("%s %s: %d functions, %zu queries, dt %s -> %s\n", name.c_str(), split,
                        shard.batch.function_count(), shard.batch.total_queries(),
                        g17(shard.dt).c_str(), path.string().c_str());
        }
    }
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_dir, double q,
              const std::optional<std::uint64_t>& seed) {
    ExperimentConfig cfg = load_config_with_overrides(config_path, seed);
    cfg.validate();
    std::filesystem::create_directories(out_dir);

    std::vector<DatasetShard> train_shards, test_shards;
    std::vector<ShardView> views;
    for (int i = 0; i < static_cast<int>(cfg.operators.size()); ++i) {
        train_shards.push_back(build_operator_shard(cfg, i, "train"));
        test_shards.push_back(build_operator_shard(cfg, i, "test"));
    }
    for (std::size_t i = 0; i < train_shards.size(); ++i)
        views.push_back(ShardView{&train_shards[i].batch, &test_shards[i].batch});

    TrainConfig tc = cfg.train;
    tc.shared_data_fraction = q;
    tc.rng_seed = derive_seed(cfg.seed, 400);
    ModnoTrainResult result = train_modno(init_modno_model(cfg), views, tc);

    std::filesystem::path base(out_dir);
    std::string ckpt = (base / ("modno_q" + qtag(q) + ".ckpt")).string();
    save_checkpoint(ckpt, result.model);
    result.history.write_csv((base / ("history_modno_q" + qtag(q) + ".csv")).string());

    for (std::size_t i = 0; i < test_shards.size(); ++i) {
        double err = evaluate_modno(result.model, static_cast<int>(i), test_shards[i].batch);
        std::printf("%s: relative_l2 %s\n", cfg.operators[i].name.c_str(), g17(err).c_str());
    }
    std::printf("checkpoint -> %s\n", ckpt.c_str());
    return 0;
}

int cmd_eval(const std::string& config_path, const std::string& ckpt_path,
             const std::optional<std::uint64_t>& seed) {
    ExperimentConfig cfg = load_config_with_overrides(config_path, seed);
    cfg.validate();
    ModnoModel model = load_checkpoint(ckpt_path);
    if (model.operator_count() != static_cast<int>(cfg.operators.size()))
        throw ConfigError("eval: checkpoint has " + std::to_string(model.operator_count()) +
                          " operators, config has " + std::to_string(cfg.operators.size()));
    for (int i = 0; i < static_cast<int>(cfg.operators.size()); ++i) {
        DatasetShard test = build_operator_shard(cfg, i, "test");
        double err = evaluate_modno(model, i, test.batch);
        std::printf("%s: relative_l2 %s\n",
                    cfg.operators[static_cast<std::size_t>(i)].name.c_str(), g17(err).c_str());
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::optional<std::string>& out_root,
              const std::optional<std::uint64_t>& seed, const std::vector<double>& q_values) {
    ExperimentConfig cfg = load_config_with_overrides(config_path, seed);
    if (out_root) cfg.out_root = *out_root;
    if (!q_values.empty()) cfg.q_sweep = q_values;
    ExperimentArtifacts art = run_experiment(cfg);
    std::ifstream md(std::filesystem::path(art.out_dir) / "results.md");
    std::cout << md.rdbuf();
    std::printf("results -> %s\n", art.out_dir.c_str());
    return 0;
}

int cmd_cost(const std::string& config_path, const std::vector<double>& q_values) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    std::vector<double> qs = q_values.empty() ? cfg.q_sweep : q_values;
    if (qs.empty()) qs.push_back(1.0);
    for (double q : qs) {
        CostLedger ledger = build_cost_ledger_from_config(cfg, q);
        std::printf("q %s: c_mol %s c_sol %s ratio %.6f\n", qtag(q).c_str(),
                    g17(ledger.c_mol).c_str(), g17(ledger.c_sol).c_str(),
                    ledger.c_mol / ledger.c_sol);
    }
    return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
    GradCheckReport report = run_gradient_check(20, seed);
    for (std::size_t m = 0; m < report.cases.size(); ++m) {
        const GradCheckCase& c = report.cases[m];
        std::string shape;
        for (std::size_t l = 0; l < c.layer_sizes.size(); ++l) {
            if (l) shape += "x";
            shape += std::to_string(c.layer_sizes[l]);
        }
        std::printf("model %2zu: layers %-12s %-4s batch %d  rel_error %.3e\n", m + 1,
                    shape.c_str(), activation_name(c.activation).c_str(), c.batch_rows,
                    c.rel_error);
    }
    std::printf("gradcheck: worst rel_error %.3e, tolerance %.0e: %s\n", report.worst_rel_error,
                report.tolerance, report.passed ? "PASS" : "FAIL");
    return report.passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-operator DeepONet laboratory"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    std::string config_path;
    std::string out_dir;
    std::string ckpt_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_root;
    std::vector<double> q_values;
    double q_single = 1.0;
    std::uint64_t gradcheck_seed = 0;
    int threads = 0;

    app.add_option("--threads", threads, "BLAS thread count (default 1)");

    CLI::App* datagen = app.add_subcommand("datagen", "Build and save train/test shards");
    datagen->add_option("--config", config_path, "Experiment config JSON")->required();
    datagen->add_option("--out", out_dir, "Output directory")->default_val("data");
    datagen->add_option("--seed", seed, "Override the config seed");

    CLI::App* train = app.add_subcommand("train", "Train one multi-operator model");
    train->add_option("--config", config_path, "Experiment config JSON")->required();
    train->add_option("--out", out_dir, "Output directory")->default_val("runs/train");
    train->add_option("--q", q_single, "Shared-data fraction")->check(CLI::Range(0.0, 1.0));
    train->add_option("--seed", seed, "Override the config seed");

    CLI::App* eval = app.add_subcommand("eval", "Score a checkpoint on the test shards");
    eval->add_option("--config", config_path, "Experiment config JSON")->required();
    eval->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
    eval->add_option("--seed", seed, "Override the config seed");

    CLI::App* sweep = app.add_subcommand("sweep", "Run the full experiment");
    sweep->add_option("--config", config_path, "Experiment config JSON")->required();
    sweep->add_option("--out", out_root, "Override the output root");
    sweep->add_option("--seed", seed, "Override the config seed");
    sweep->add_option("--q", q_values, "Override the q sweep")->delimiter(',');

    CLI::App* cost = app.add_subcommand("cost", "Print the training-cost ledger");
    cost->add_option("--config", config_path, "Experiment config JSON")->required();
    cost->add_option("--q", q_values, "Shared-data fractions")->delimiter(',');

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
    gradcheck->add_option("--seed", gradcheck_seed, "Base seed for the random networks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (threads > 0) set_blas_threads(threads);
        if (datagen->parsed()) return cmd_datagen(config_path, out_dir, seed);
        if (train->parsed()) return cmd_train(config_path, out_dir, q_single, seed);
        if (eval->parsed()) return cmd_eval(config_path, ckpt_path, seed);
        if (sweep->parsed()) return cmd_sweep(config_path, out_root, seed, q_values);
        if (cost->parsed()) return cmd_cost(config_path, q_values);
        if (gradcheck->parsed()) return cmd_gradcheck(gradcheck_seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
