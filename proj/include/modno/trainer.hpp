#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "modno/don.hpp"
#include "modno/optimizer.hpp"
#include "modno/rng.hpp"

namespace modno {

enum class SubsampleMode { per_epoch_resample, fixed_subset };

SubsampleMode subsample_mode_from_string(const std::string& name);
std::string subsample_mode_name(SubsampleMode m);

struct TrainConfig {
    int epochs = 1;
    double trunk_lr = 1e-3;          // uniform rate, used when trunk_lrs is empty
    std::vector<double> trunk_lrs;   // optional per-operator override
    double branch_lr = 1e-3;
    double shared_data_fraction = 1.0;  // q: fraction of each shard fed to the branch step
    int minibatch_size = 0;             // functions per step; 0 means full batch
    OptimKind optimizer = OptimKind::adam;
    std::uint64_t rng_seed = 0;
    SubsampleMode subsample_mode = SubsampleMode::per_epoch_resample;
    int eval_every = 1;  // held-out error refresh stride, in epochs

    double trunk_lr_for(int op_index) const;
    void validate(int n_operators) const;
};

// Per-operator training data plus an optional held-out batch for the
// per-epoch relative error column.
struct ShardView {
    const OperatorBatch* train = nullptr;
    const OperatorBatch* test = nullptr;
};

struct TrainHistory {
    struct Entry {
        int epoch = 0;
        double global_loss = 0.0;
        std::vector<double> local_losses;
        std::vector<double> rel_errors;  // empty when no held-out data given
        double seconds = 0.0;            // cumulative wall-clock
    };
    std::vector<Entry> entries;

    // columns: epoch, global_loss, loss_op_0.., relerr_op_0.., seconds
    void write_csv(const std::string& path) const;
};

struct ModnoTrainResult {
    ModnoModel model;
    TrainHistory history;
};

struct DonTrainResult {
    DonModel model;
    TrainHistory history;
};

// Draws ceil(q * n_functions) distinct function indices, ascending. q=1 is the
// identity selection and consumes no randomness.
std::vector<int> subsample_for_shared(int n_functions, double q, Rng& rng);

// Called after each completed epoch with the current parameters.
using EpochObserver = std::function<void(int epoch, const ModnoModel& model)>;

// Alternating multi-operator training. Each epoch updates every trunk from its
// own shard at the current branch, then updates the shared branch once from a
// q-fraction of every shard at the just-updated trunks. With q=0 the branch
// step is skipped and the recorded global loss is the empty sum, zero.
ModnoTrainResult train_modno(ModnoModel model, const std::vector<ShardView>& shards,
                             const TrainConfig& cfg, const EpochObserver& observer = {});

// Single-operator baseline with the same loss, optimizer, and per-epoch
// trunk-then-branch order, so a one-operator q=1 run of train_modno and this
// trainer produce bit-identical trajectories from equal initializations.
DonTrainResult train_single_don(DonModel model, const ShardView& shard, const TrainConfig& cfg);

}  // namespace modno
