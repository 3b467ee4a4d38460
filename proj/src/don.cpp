#include "modno/don.hpp"

#include <string>

#include "modno/errors.hpp"
#include "modno/metrics.hpp"

namespace modno {

void DonModel::check_consistent() const {
    branch.check_consistent();
    trunk.check_consistent();
    if (branch.input_dim() != n_sensors) throw ShapeError("don: branch input width != n_sensors");
    if (trunk.input_dim() != query_dim) throw ShapeError("don: trunk input width != query_dim");
    if (branch.output_dim() != basis_count || trunk.output_dim() != basis_count)
        throw ShapeError("don: branch/trunk output widths must both equal basis_count");
}

void ModnoModel::check_consistent() const {
    if (trunks.empty()) throw ConfigError("modno model: needs at least one operator trunk");
    if (query_dims.size() != trunks.size()) throw ShapeError("modno model: query_dims size != trunk count");
    shared_branch.check_consistent();
    if (shared_branch.input_dim() != n_sensors) throw ShapeError("modno model: branch input width != n_sensors");
    if (shared_branch.output_dim() != basis_count) throw ShapeError("modno model: branch output width != basis_count");
    for (std::size_t i = 0; i < trunks.size(); ++i) {
        trunks[i].check_consistent();
        if (trunks[i].output_dim() != basis_count)
            throw ShapeError("modno model: trunk " + std::to_string(i) + " output width != basis_count");
        if (trunks[i].input_dim() != query_dims[i])
            throw ShapeError("modno model: trunk " + std::to_string(i) + " input width != its query_dim");
    }
}

DonModel ModnoModel::as_don(int op_index) const {
    if (op_index < 0 || op_index >= operator_count())
        throw IndexError("modno model: operator index out of range");
    DonModel d;
    d.branch = shared_branch;
    d.trunk = trunks[op_index];
    d.n_sensors = n_sensors;
    d.basis_count = basis_count;
    d.query_dim = query_dims[op_index];
    return d;
}

std::size_t OperatorBatch::total_queries() const {
    std::size_t n = 0;
    for (const auto& q : queries) n += static_cast<std::size_t>(q.points.rows);
    return n;
}

void OperatorBatch::check_against(int n_sensors, int query_dim) const {
    if (u_hats.rows == 0 || queries.empty()) throw ConfigError("operator batch: empty");
    if (u_hats.rows != static_cast<int>(queries.size()))
        throw ShapeError("operator batch: one query batch per input function required");
    if (u_hats.cols != n_sensors) throw ShapeError("operator batch: sensor count mismatch");
    for (const auto& q : queries) {
        if (q.points.cols != query_dim) throw ShapeError("operator batch: query point dimension mismatch");
        if (q.targets.rows != q.points.rows || q.targets.cols != 1)
            throw ShapeError("operator batch: targets must be [n_q x 1] matching points");
    }
}

bool detect_shared_mesh(const std::vector<QueryBatch>& queries) {
    if (queries.empty()) return false;
    for (std::size_t p = 1; p < queries.size(); ++p)
        if (!(queries[p].points == queries[0].points)) return false;
    return true;
}

OperatorBatch subset_batch(const OperatorBatch& batch, const std::vector<int>& indices) {
    OperatorBatch out;
    out.u_hats = gather_rows(batch.u_hats, indices);
    out.queries.reserve(indices.size());
    for (int idx : indices) {
        if (idx < 0 || idx >= static_cast<int>(batch.queries.size()))
            throw IndexError("subset_batch: function index out of range");
        out.queries.push_back(batch.queries[idx]);
    }
    out.shared_mesh = batch.shared_mesh;
    return out;
}

Matrix don_predict(const DonModel& model, const Matrix& u_hat, const Matrix& points) {
    model.check_consistent();
    if (u_hat.rows != 1 || u_hat.cols != model.n_sensors)
        throw ShapeError("don_predict: u_hat must be [1 x n_sensors]");
    Matrix a = mlp_forward(model.branch, u_hat);   // [1 x K]
    Matrix b = mlp_forward(model.trunk, points);   // [n_q x K]
    return matmul_nt(b, a);                        // [n_q x 1]
}

Matrix modno_predict(const ModnoModel& model, int op_index, const Matrix& u_hat, const Matrix& points) {
    model.check_consistent();
    if (op_index < 0 || op_index >= model.operator_count())
        throw IndexError("modno_predict: operator index out of range");
    if (u_hat.rows != 1 || u_hat.cols != model.n_sensors)
        throw ShapeError("modno_predict: u_hat must be [1 x n_sensors]");
    Matrix a = mlp_forward(model.shared_branch, u_hat);
    Matrix b = mlp_forward(model.trunks[op_index], points);
    return matmul_nt(b, a);
}

std::vector<Matrix> modno_predict_batch(const ModnoModel& model, int op_index,
                                        const OperatorBatch& batch) {
    model.check_consistent();
    if (op_index < 0 || op_index >= model.operator_count())
        throw IndexError("modno_predict_batch: operator index out of range");
    batch.check_against(model.n_sensors, model.query_dims[op_index]);

    Matrix a = mlp_forward(model.shared_branch, batch.u_hats);  // [N_u x K]
    std::vector<Matrix> preds;
    preds.reserve(batch.queries.size());
    if (batch.shared_mesh) {
        Matrix t = mlp_forward(model.trunks[op_index], batch.queries[0].points);  // [n_q x K]
        Matrix p = matmul_nt(a, t);                                               // [N_u x n_q]
        for (int i = 0; i < p.rows; ++i) {
            Matrix col(p.cols, 1);
            for (int j = 0; j < p.cols; ++j) col(j, 0) = p(i, j);
            preds.push_back(std::move(col));
        }
        return preds;
    }
    for (std::size_t p = 0; p < batch.queries.size(); ++p) {
        Matrix a_row = gather_rows(a, {static_cast<int>(p)});
        Matrix t = mlp_forward(model.trunks[op_index], batch.queries[p].points);
        preds.push_back(matmul_nt(t, a_row));
    }
    return preds;
}

double evaluate_modno(const ModnoModel& model, int op_index, const OperatorBatch& batch) {
    std::vector<Matrix> preds = modno_predict_batch(model, op_index, batch);
    double sum = 0.0;
    for (std::size_t p = 0; p < preds.size(); ++p)
        sum += relative_l2(preds[p], batch.queries[p].targets);
    return sum / static_cast<double>(preds.size());
}

LossGrads local_loss_and_grads(const ModnoModel& model, int op_index, const OperatorBatch& batch) {
    model.check_consistent();
    if (op_index < 0 || op_index >= model.operator_count())
        throw IndexError("local_loss_and_grads: operator index out of range");
    batch.check_against(model.n_sensors, model.query_dims[op_index]);

    const MlpParams& trunk = model.trunks[op_index];
    const double total = static_cast<double>(batch.total_queries());
    LossGrads out;

    Matrix a = mlp_forward(model.shared_branch, batch.u_hats);  // [N_u x K]

    if (batch.shared_mesh) {
        const Matrix& points = batch.queries[0].points;
        Matrix t = mlp_forward(trunk, points);  // [n_q x K]
        Matrix pred = matmul_nt(a, t);          // [N_u x n_q]

        // residual matrix doubles as the prediction cotangent
        Matrix d_pred(pred.rows, pred.cols);
        double loss = 0.0;
        for (int p = 0; p < pred.rows; ++p) {
            const Matrix& y = batch.queries[p].targets;
            for (int j = 0; j < pred.cols; ++j) {
                double r = pred(p, j) - y(j, 0);
                loss += r * r;
                d_pred(p, j) = 2.0 * r / total;
            }
        }
        out.loss = loss / total;

        Matrix d_a = matmul(d_pred, t);      // [N_u x K]
        Matrix d_t = matmul_tn(d_pred, a);   // [n_q x K]
        out.trunk = mlp_backward(trunk, points, d_t).grads;
        out.branch = mlp_backward(model.shared_branch, batch.u_hats, d_a).grads;
        return out;
    }

    Matrix d_a(a.rows, a.cols);
    out.trunk = MlpGrads::zeros_like(trunk);
    double loss = 0.0;
    for (std::size_t p = 0; p < batch.queries.size(); ++p) {
        const QueryBatch& q = batch.queries[p];
        Matrix a_row = gather_rows(a, {static_cast<int>(p)});  // [1 x K]
        Matrix t = mlp_forward(trunk, q.points);               // [n_q x K]
        Matrix pred = matmul_nt(t, a_row);                     // [n_q x 1]

        Matrix d_pred(pred.rows, 1);
        for (int j = 0; j < pred.rows; ++j) {
            double r = pred(j, 0) - q.targets(j, 0);
            loss += r * r;
            d_pred(j, 0) = 2.0 * r / total;
        }

        Matrix d_t = matmul(d_pred, a_row);       // [n_q x K]
        out.trunk.add_scaled(mlp_backward(trunk, q.points, d_t).grads, 1.0);
        Matrix d_a_row = matmul_tn(d_pred, t);    // [1 x K]
        for (int k = 0; k < d_a.cols; ++k) d_a(static_cast<int>(p), k) = d_a_row(0, k);
    }
    out.loss = loss / total;
    out.branch = mlp_backward(model.shared_branch, batch.u_hats, d_a).grads;
    return out;
}

GlobalLossGrads global_loss_and_grads(const ModnoModel& model,
                                      const std::vector<const OperatorBatch*>& batches,
                                      const std::vector<std::vector<int>>& subsets) {
    model.check_consistent();
    if (batches.empty()) throw ConfigError("global_loss_and_grads: empty operator list");
    if (static_cast<int>(batches.size()) != model.operator_count() || subsets.size() != batches.size())
        throw ShapeError("global_loss_and_grads: one batch and one subset per operator required");

    GlobalLossGrads out;
    out.branch = MlpGrads::zeros_like(model.shared_branch);
    out.local_losses.reserve(batches.size());
    for (std::size_t i = 0; i < batches.size(); ++i) {
        const OperatorBatch& full = *batches[i];
        bool identity = static_cast<int>(subsets[i].size()) == full.function_count();
        if (identity)
            for (std::size_t p = 0; p < subsets[i].size(); ++p)
                if (subsets[i][p] != static_cast<int>(p)) { identity = false; break; }

        LossGrads local = identity
            ? local_loss_and_grads(model, static_cast<int>(i), full)
            : local_loss_and_grads(model, static_cast<int>(i), subset_batch(full, subsets[i]));
        out.loss += local.loss;
        out.local_losses.push_back(local.loss);
        out.branch.add_scaled(local.branch, 1.0);
    }
    return out;
}

}  // namespace modno
