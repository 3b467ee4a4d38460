#pragma once

#include <vector>

#include "modno/mlp.hpp"

namespace modno {

// Single-operator model: prediction at x is the inner product of the K branch
// outputs for û with the K trunk outputs for x.
struct DonModel {
    MlpParams branch;  // R^{n_sensors} -> R^{basis_count}
    MlpParams trunk;   // R^{query_dim} -> R^{basis_count}
    int n_sensors = 0;
    int basis_count = 0;
    int query_dim = 0;

    void check_consistent() const;
};

// Multi-operator model: one shared branch, one dedicated trunk per operator.
struct ModnoModel {
    MlpParams shared_branch;
    std::vector<MlpParams> trunks;
    int n_sensors = 0;
    int basis_count = 0;
    std::vector<int> query_dims;  // one per operator

    int operator_count() const { return static_cast<int>(trunks.size()); }
    void check_consistent() const;

    // The single-operator model (shared_branch, trunks[i]).
    DonModel as_don(int op_index) const;
};

// Query coordinates and target values for one input function.
struct QueryBatch {
    Matrix points;   // [n_q x d]
    Matrix targets;  // [n_q x 1]
};

// Training/eval data for one operator: sensor readings per input function and
// the paired query batches.
struct OperatorBatch {
    Matrix u_hats;                    // [n_functions x n_sensors]
    std::vector<QueryBatch> queries;  // one per input function
    // All query batches use one identical point matrix. Enables the matrix
    // fast path; set via detect_shared_mesh when the batch is assembled.
    bool shared_mesh = false;

    int function_count() const { return u_hats.rows; }
    std::size_t total_queries() const;
    void check_against(int n_sensors, int query_dim) const;
};

bool detect_shared_mesh(const std::vector<QueryBatch>& queries);

// Row subset of a batch: selected input functions with their query batches.
OperatorBatch subset_batch(const OperatorBatch& batch, const std::vector<int>& indices);

// Prediction for one input function (u_hat is [1 x n_sensors]); returns [n_q x 1].
Matrix don_predict(const DonModel& model, const Matrix& u_hat, const Matrix& points);
Matrix modno_predict(const ModnoModel& model, int op_index, const Matrix& u_hat, const Matrix& points);

// Predictions for every function in the batch, in order.
std::vector<Matrix> modno_predict_batch(const ModnoModel& model, int op_index,
                                        const OperatorBatch& batch);

// Mean over the batch of per-function relative L2 errors.
double evaluate_modno(const ModnoModel& model, int op_index, const OperatorBatch& batch);

struct LossGrads {
    double loss = 0.0;
    MlpGrads trunk;   // d loss / d trunks[op_index]
    MlpGrads branch;  // d loss / d shared_branch
};

// Mean squared error over every query point of every function in the batch,
// with exact gradients for the operator's trunk and the shared branch.
LossGrads local_loss_and_grads(const ModnoModel& model, int op_index, const OperatorBatch& batch);

struct GlobalLossGrads {
    double loss = 0.0;              // sum of the per-operator local losses
    MlpGrads branch;                // sum of the per-operator branch gradients
    std::vector<double> local_losses;
};

// Shared-branch objective: sum of local losses over all operators, each
// evaluated on the given subset of its batch. An identity subset reuses the
// batch without copying, so q=1 reproduces the local computation bit for bit.
GlobalLossGrads global_loss_and_grads(const ModnoModel& model,
                                      const std::vector<const OperatorBatch*>& batches,
                                      const std::vector<std::vector<int>>& subsets);

}  // namespace modno
