#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "modno/don.hpp"
#include "modno/grid.hpp"
#include "modno/initial_conditions.hpp"
#include "modno/pde.hpp"

namespace modno {

// Query layout of a shard. A snapshot operator (query_dim 1) queries the
// solution at the terminal time on one spatial mesh; a space-time operator
// (query_dim 2) attaches a time coordinate to every query. The mesh itself
// is an equispaced subset of the solver grid, optionally shifted by a
// fraction of a cell so train and test meshes never coincide.
struct QueryMeshSpec {
    int query_dim = 1;
    int n_points = 0;           // spatial points per time slice; 0 means the full grid
    double offset_cells = 0.0;  // spatial shift in units of the solver cell, in [0, 1)
    int n_times = 1;            // query_dim 2: time slices per input function
    double eval_time = -1.0;    // query_dim 2: fix every query time to this value;
                                // negative means n_times random draws per function
                                // from [0, train_time_range]

    void validate(const Grid1D& grid, const PdeSpec& pde) const;
};

// Per-operator dataset: sensor readings of the input functions and the query
// points with solver-produced target values, plus everything needed to
// regenerate or extend it (equation, family, grid, calibrated step).
struct DatasetShard {
    int operator_id = 0;
    PdeSpec pde;
    InitialConditionSpec ic;
    Grid1D grid{1.0, 8};
    QueryMeshSpec mesh;
    std::vector<int> sensor_indices;  // equispaced solver-grid indices
    std::string split;                // "train" or "test"
    double dt = 0.0;                  // shared step calibrated for the shard
    OperatorBatch batch;

    int n_sensors() const { return static_cast<int>(sensor_indices.size()); }
    std::vector<double> sensor_locations() const;
    void check_consistent() const;
};

// Indices {0, s, 2s, ...} with s = grid.n_points / n_sensors.
std::vector<int> equispaced_sensor_indices(const Grid1D& grid, int n_sensors);

// Samples n_functions initial conditions, solves the equation for each, and
// records (sensor readings, query points, target values). The step size is
// calibrated on the first sample and halved once as margin; a sample whose
// solve still diverges is re-solved at its own calibrated step, and rejected
// and redrawn if that also fails, with at most 10 rejections per slot.
// Deterministic: content is a pure function of the arguments.
DatasetShard build_shard(const PdeSpec& pde, const InitialConditionSpec& ic, int n_functions,
                         int n_sensors, const QueryMeshSpec& mesh, const Grid1D& grid,
                         std::uint64_t seed, const std::string& split);

// Mean over test functions of the relative L2 error of the constant
// predictor that answers the pointwise mean of all training targets. The
// mean is carried to the test mesh by trigonometric interpolation. Defined
// for snapshot operators only (both shards must have query_dim 1).
double mean_baseline_error(const DatasetShard& train_shard, const DatasetShard& test_shard);

// Binary shard file, one shard per file. Layout: magic "MODNODS1", a u32
// version, operator id, equation id and parameters, initial-condition spec,
// grid, query-mesh spec, split tag, calibrated step, sensor indices, then
// little-endian f64 blocks: sensor readings [n_functions x n_sensors] and
// per function the query points [n_q x d] and targets [n_q x 1].
void save_shard(const std::string& path, const DatasetShard& shard);
DatasetShard load_shard(const std::string& path);

}  // namespace modno
