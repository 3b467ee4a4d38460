#include "modno/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <utility>

#include "modno/errors.hpp"

namespace modno {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// [begin, end) ranges over function indices; a single range means full batch
std::vector<std::pair<int, int>> chunk_ranges(int n_functions, int minibatch) {
    std::vector<std::pair<int, int>> out;
    if (minibatch <= 0 || minibatch >= n_functions) {
        out.emplace_back(0, n_functions);
        return out;
    }
    for (int begin = 0; begin < n_functions; begin += minibatch)
        out.emplace_back(begin, std::min(begin + minibatch, n_functions));
    return out;
}

// One trunk-phase pass over the operator's shard: an optimizer step per chunk.
// Returns the query-weighted mean of the chunk losses.
double trunk_phase(ModnoModel& model, int op_index, const OperatorBatch& train,
                   OptimState& state, int minibatch) {
    double weighted_loss = 0.0, weight = 0.0;
    for (auto [begin, end] : chunk_ranges(train.function_count(), minibatch)) {
        LossGrads lg;
        if (begin == 0 && end == train.function_count()) {
            lg = local_loss_and_grads(model, op_index, train);
        } else {
            std::vector<int> idx(end - begin);
            std::iota(idx.begin(), idx.end(), begin);
            OperatorBatch chunk = subset_batch(train, idx);
            lg = local_loss_and_grads(model, op_index, chunk);
        }
        optimizer_step(state, model.trunks[op_index], lg.trunk);
        double w = 0.0;
        for (int p = begin; p < end; ++p) w += static_cast<double>(train.queries[p].points.rows);
        weighted_loss += lg.loss * w;
        weight += w;
    }
    return weighted_loss / weight;
}

}  // namespace

SubsampleMode subsample_mode_from_string(const std::string& name) {
    if (name == "per_epoch_resample") return SubsampleMode::per_epoch_resample;
    if (name == "fixed_subset") return SubsampleMode::fixed_subset;
    throw ConfigError("unknown subsample mode: " + name);
}

std::string subsample_mode_name(SubsampleMode m) {
    return m == SubsampleMode::per_epoch_resample ? "per_epoch_resample" : "fixed_subset";
}

double TrainConfig::trunk_lr_for(int op_index) const {
    return trunk_lrs.empty() ? trunk_lr : trunk_lrs[static_cast<std::size_t>(op_index)];
}

void TrainConfig::validate(int n_operators) const {
    if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
    if (shared_data_fraction < 0.0 || shared_data_fraction > 1.0)
        throw ConfigError("train config: shared_data_fraction must lie in [0, 1]");
    if (branch_lr <= 0.0) throw ConfigError("train config: branch learning rate must be positive");
    if (!trunk_lrs.empty() && static_cast<int>(trunk_lrs.size()) != n_operators)
        throw ConfigError("train config: one trunk learning rate per operator required");
    if (trunk_lrs.empty()) {
        if (trunk_lr <= 0.0) throw ConfigError("train config: trunk learning rate must be positive");
    } else {
        for (double lr : trunk_lrs)
            if (lr <= 0.0) throw ConfigError("train config: trunk learning rates must be positive");
    }
    if (minibatch_size < 0) throw ConfigError("train config: minibatch size must be >= 0");
    if (eval_every < 1) throw ConfigError("train config: eval stride must be >= 1");
}

void TrainHistory::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open history file for writing: " + path);
    const std::size_t n_ops = entries.empty() ? 0 : entries.front().local_losses.size();
    const bool with_rel = !entries.empty() && !entries.front().rel_errors.empty();
    out << "epoch,global_loss";
    for (std::size_t i = 0; i < n_ops; ++i) out << ",loss_op_" << i;
    if (with_rel)
        for (std::size_t i = 0; i < n_ops; ++i) out << ",relerr_op_" << i;
    out << ",seconds\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
    };
    for (const auto& e : entries) {
        out << e.epoch;
        put(e.global_loss);
        for (double v : e.local_losses) put(v);
        if (with_rel)
            for (double v : e.rel_errors) put(v);
        put(e.seconds);
        out << '\n';
    }
    if (!out) throw IoError("failed writing history file: " + path);
}

std::vector<int> subsample_for_shared(int n_functions, double q, Rng& rng) {
    if (n_functions <= 0) throw ConfigError("subsample: need at least one function");
    if (q < 0.0 || q > 1.0) throw ConfigError("subsample: q must lie in [0, 1]");
    // tiny slack so floating-point noise just above an integer does not bump ceil
    int count = static_cast<int>(std::ceil(q * n_functions - 1e-12));
    count = std::clamp(count, 0, n_functions);
    std::vector<int> idx;
    if (count >= n_functions) {
        idx.resize(static_cast<std::size_t>(n_functions));
        std::iota(idx.begin(), idx.end(), 0);
        return idx;
    }
    std::vector<int> pool(static_cast<std::size_t>(n_functions));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < count; ++i) {
        int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_functions - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    idx.assign(pool.begin(), pool.begin() + count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

ModnoTrainResult train_modno(ModnoModel model, const std::vector<ShardView>& shards,
                             const TrainConfig& cfg, const EpochObserver& observer) {
    model.check_consistent();
    const int n_ops = model.operator_count();
    cfg.validate(n_ops);
    if (static_cast<int>(shards.size()) != n_ops)
        throw ShapeError("train_modno: one shard per operator required");
    int with_test = 0;
    for (int i = 0; i < n_ops; ++i) {
        if (!shards[i].train) throw ConfigError("train_modno: missing training data for an operator");
        shards[i].train->check_against(model.n_sensors, model.query_dims[i]);
        if (shards[i].test) {
            shards[i].test->check_against(model.n_sensors, model.query_dims[i]);
            ++with_test;
        }
    }
    if (with_test != 0 && with_test != n_ops)
        throw ConfigError("train_modno: held-out data must be given for all operators or none");
    const bool track_rel = with_test == n_ops;

    std::vector<OptimState> trunk_states;
    trunk_states.reserve(static_cast<std::size_t>(n_ops));
    for (int i = 0; i < n_ops; ++i)
        trunk_states.push_back(optimizer_init(cfg.optimizer, cfg.trunk_lr_for(i), model.trunks[i]));
    OptimState branch_state = optimizer_init(cfg.optimizer, cfg.branch_lr, model.shared_branch);

    Rng rng(cfg.rng_seed);
    const double q = cfg.shared_data_fraction;
    std::vector<std::vector<int>> fixed_subsets(static_cast<std::size_t>(n_ops));
    if (cfg.subsample_mode == SubsampleMode::fixed_subset && q > 0.0)
        for (int i = 0; i < n_ops; ++i)
            fixed_subsets[static_cast<std::size_t>(i)] =
                subsample_for_shared(shards[i].train->function_count(), q, rng);

    TrainHistory hist;
    hist.entries.reserve(static_cast<std::size_t>(cfg.epochs));
    std::vector<double> rel(static_cast<std::size_t>(n_ops), 0.0);
    const auto t0 = Clock::now();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        TrainHistory::Entry entry;
        entry.epoch = epoch;
        entry.local_losses.resize(static_cast<std::size_t>(n_ops));

        for (int i = 0; i < n_ops; ++i)
            entry.local_losses[static_cast<std::size_t>(i)] =
                trunk_phase(model, i, *shards[i].train, trunk_states[static_cast<std::size_t>(i)],
                            cfg.minibatch_size);

        if (q > 0.0) {
            std::vector<const OperatorBatch*> batches(static_cast<std::size_t>(n_ops));
            std::vector<std::vector<int>> subsets(static_cast<std::size_t>(n_ops));
            for (int i = 0; i < n_ops; ++i) {
                batches[static_cast<std::size_t>(i)] = shards[i].train;
                subsets[static_cast<std::size_t>(i)] =
                    cfg.subsample_mode == SubsampleMode::fixed_subset
                        ? fixed_subsets[static_cast<std::size_t>(i)]
                        : subsample_for_shared(shards[i].train->function_count(), q, rng);
            }
            GlobalLossGrads gg = global_loss_and_grads(model, batches, subsets);
            optimizer_step(branch_state, model.shared_branch, gg.branch);
            entry.global_loss = gg.loss;
        } else {
            entry.global_loss = 0.0;
        }

        if (track_rel) {
            if (epoch == 1 || epoch == cfg.epochs || epoch % cfg.eval_every == 0)
                for (int i = 0; i < n_ops; ++i)
                    rel[static_cast<std::size_t>(i)] = evaluate_modno(model, i, *shards[i].test);
            entry.rel_errors = rel;
        }
        entry.seconds = seconds_since(t0);
        hist.entries.push_back(std::move(entry));
        if (observer) observer(epoch, model);
    }
    return {std::move(model), std::move(hist)};
}

DonTrainResult train_single_don(DonModel model, const ShardView& shard, const TrainConfig& cfg) {
    model.check_consistent();
    cfg.validate(1);
    if (!shard.train) throw ConfigError("train_single_don: missing training data");
    shard.train->check_against(model.n_sensors, model.query_dim);
    if (shard.test) shard.test->check_against(model.n_sensors, model.query_dim);

    ModnoModel m;
    m.n_sensors = model.n_sensors;
    m.basis_count = model.basis_count;
    m.query_dims = {model.query_dim};
    m.shared_branch = std::move(model.branch);
    m.trunks.push_back(std::move(model.trunk));

    OptimState trunk_state = optimizer_init(cfg.optimizer, cfg.trunk_lr_for(0), m.trunks[0]);
    OptimState branch_state = optimizer_init(cfg.optimizer, cfg.branch_lr, m.shared_branch);

    TrainHistory hist;
    hist.entries.reserve(static_cast<std::size_t>(cfg.epochs));
    double rel = 0.0;
    const auto t0 = Clock::now();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        TrainHistory::Entry entry;
        entry.epoch = epoch;
        entry.local_losses = {trunk_phase(m, 0, *shard.train, trunk_state, cfg.minibatch_size)};

        LossGrads lg = local_loss_and_grads(m, 0, *shard.train);
        optimizer_step(branch_state, m.shared_branch, lg.branch);
        entry.global_loss = lg.loss;

        if (shard.test) {
            if (epoch == 1 || epoch == cfg.epochs || epoch % cfg.eval_every == 0)
                rel = evaluate_modno(m, 0, *shard.test);
            entry.rel_errors = {rel};
        }
        entry.seconds = seconds_since(t0);
        hist.entries.push_back(std::move(entry));
    }

    model.branch = std::move(m.shared_branch);
    model.trunk = std::move(m.trunks[0]);
    return {std::move(model), std::move(hist)};
}

}  // namespace modno
