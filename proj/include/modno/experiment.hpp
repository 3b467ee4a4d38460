#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "modno/cost.hpp"
#include "modno/dataset.hpp"
#include "modno/trainer.hpp"

namespace modno {

// One row of an experiment: the equation, its data distribution, and the
// query meshes the shards are built on.
struct OperatorSetup {
    std::string name;
    PdeSpec pde;
    InitialConditionSpec ic;
    Grid1D grid{1.0, 8};
    QueryMeshSpec train_mesh;
    QueryMeshSpec test_mesh;
};

// Full description of one benchmark run: the operators, dataset sizes,
// network shape, training schedule, and the q sweep. Loadable from JSON.
struct ExperimentConfig {
    std::string experiment_id = "custom";  // exp1..exp5 or custom
    std::vector<OperatorSetup> operators;
    int n_train = 0;
    int n_test = 0;
    int n_sensors = 0;
    int basis_count = 0;  // K
    int width = 0;        // hidden width of branch and trunks
    int depth = 2;        // hidden layer count
    Activation activation = Activation::tanh_act;
    TrainConfig train;
    std::vector<double> q_sweep;
    std::string out_root = "runs";
    std::uint64_t seed = 0;

    void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

// FNV-1a over the bytes; names output directories so distinct configs never
// collide silently.
std::uint64_t fnv1a_hash(const std::string& bytes);

// Error table in the layout of the published benchmarks: one row per
// operator, a single-model column, and one MODNO column per q. Errors are
// stored as fractions; renderers scale to percent.
struct ResultsTable {
    std::string experiment_id;
    std::vector<std::string> operator_names;
    std::vector<double> single_errors;  // one per operator
    std::vector<double> q_values;
    Matrix modno_errors;              // [n_operators x n_q]
    std::vector<double> cost_ratios;  // c_mol / c_sol per q
    std::uint64_t seed = 0;
    std::string config_hash;  // hex

    void validate() const;
};

// Lossless CSV (%.17g) and a percent-rendered markdown table (2 decimals).
void write_results_csv(const ResultsTable& table, const std::string& path);
ResultsTable read_results_csv(const std::string& path);
void write_results_markdown(const ResultsTable& table, const std::string& path);

struct ExperimentArtifacts {
    ResultsTable table;
    std::string out_dir;  // content-hashed directory holding all files
};

// End-to-end run: builds train/test shards per operator, trains one
// single-operator model per operator and one MODNO per q (all from the same
// derived initialization), evaluates on the off-grid test shards, computes
// cost ratios, and writes shards, histories, plot data, and the results
// table under out_root/<experiment>-<hash>/. A stage failure flushes
// whatever results exist to partial_results.csv and rethrows with the stage
// name attached.
ExperimentArtifacts run_experiment(const ExperimentConfig& cfg);

// Train or test shard for one configured operator, on the seed stream
// run_experiment uses (stream 2i for train, 2i+1 for test), so standalone
// data generation and full sweeps produce identical shards.
DatasetShard build_operator_shard(const ExperimentConfig& cfg, int op_index,
                                  const std::string& split);

// The multi-operator initialization shared by every q of an experiment: one
// branch (stream 200) and one trunk per operator (streams 201+i).
ModnoModel init_modno_model(const ExperimentConfig& cfg);

// Mean over the batch of per-function relative L2 errors for the
// single-operator model.
double evaluate_don(const DonModel& model, const OperatorBatch& batch);

// Whitespace-delimited columns (x [t] target prediction) for the chosen
// functions of a shard, with a # header and one # sample separator per
// function. Values print as %.17g so a parse recovers them bit-exactly.
void emit_solution_plotdata(const ModnoModel& model, int op_index, const DatasetShard& shard,
                            const std::vector<int>& sample_indices, const std::string& path);

// Cost ledger for the configured networks and shards: per-query pass costs
// are the forward+backward multiply counts of the trunk (dedicated) and
// branch (shared) nets.
CostLedger build_cost_ledger(const ExperimentConfig& cfg,
                             const std::vector<DatasetShard>& train_shards, double q);

// Same ledger computed from the config alone: per-function query counts
// follow from the training mesh (points per slice times time slices), so no
// data has to be built or solved.
CostLedger build_cost_ledger_from_config(const ExperimentConfig& cfg, double q);

}  // namespace modno
