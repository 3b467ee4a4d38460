#include <doctest.h>

#include <cmath>
#include <vector>

#include "modno/don.hpp"
#include "modno/errors.hpp"
#include "modno/metrics.hpp"
#include "modno/rng.hpp"

using namespace modno;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

ModnoModel make_model(int n_ops, int n_sensors, int k, int query_dim, std::uint64_t seed) {
    ModnoModel m;
    m.n_sensors = n_sensors;
    m.basis_count = k;
    m.shared_branch = mlp_init({n_sensors, 8, k}, Activation::tanh_act, seed);
    for (int i = 0; i < n_ops; ++i) {
        m.trunks.push_back(mlp_init({query_dim, 8, k}, Activation::tanh_act, derive_seed(seed, i + 1)));
        m.query_dims.push_back(query_dim);
    }
    return m;
}

OperatorBatch make_batch(const ModnoModel& m, int op, int n_fn, int n_q, std::uint64_t seed,
                         bool shared_points) {
    OperatorBatch b;
    b.u_hats = random_matrix(n_fn, m.n_sensors, derive_seed(seed, 0));
    Matrix common = random_matrix(n_q, m.query_dims[op], derive_seed(seed, 1));
    for (int p = 0; p < n_fn; ++p) {
        QueryBatch q;
        q.points = shared_points ? common : random_matrix(n_q, m.query_dims[op], derive_seed(seed, 100 + p));
        q.targets = random_matrix(n_q, 1, derive_seed(seed, 200 + p));
        b.queries.push_back(std::move(q));
    }
    b.shared_mesh = detect_shared_mesh(b.queries);
    return b;
}

double grads_max_rel_diff(const MlpGrads& got, const MlpGrads& want) {
    double worst = 0.0;
    for (std::size_t l = 0; l < got.weights.size(); ++l) {
        for (std::size_t i = 0; i < got.weights[l].data.size(); ++i) {
            double d = std::fabs(got.weights[l].data[i] - want.weights[l].data[i]);
            worst = std::max(worst, d / (std::fabs(want.weights[l].data[i]) + 1e-8));
        }
        for (std::size_t i = 0; i < got.biases[l].data.size(); ++i) {
            double d = std::fabs(got.biases[l].data[i] - want.biases[l].data[i]);
            worst = std::max(worst, d / (std::fabs(want.biases[l].data[i]) + 1e-8));
        }
    }
    return worst;
}

bool grads_equal(const MlpGrads& a, const MlpGrads& b) {
    for (std::size_t l = 0; l < a.weights.size(); ++l)
        if (!(a.weights[l] == b.weights[l] && a.biases[l] == b.biases[l])) return false;
    return true;
}

}  // namespace

TEST_CASE("don_predict: zero branch output forces zero prediction") {
    DonModel d;
    d.n_sensors = 3;
    d.basis_count = 1;
    d.query_dim = 1;
    d.branch = mlp_init({3, 4, 1}, Activation::tanh_act, 1);
    d.trunk = mlp_init({1, 4, 1}, Activation::tanh_act, 2);
    for (auto& w : d.branch.weights)
        for (double& v : w.data) v = 0.0;
    // output bias is already zero, so the branch emits exactly 0
    Matrix u = random_matrix(1, 3, 5);
    Matrix pts = random_matrix(7, 1, 6);
    Matrix pred = don_predict(d, u, pts);
    for (double v : pred.data) CHECK(v == 0.0);
}

TEST_CASE("don_predict: hand-built rank-2 inner product gives 11 and 17") {
    DonModel d;
    d.n_sensors = 2;
    d.basis_count = 2;
    d.query_dim = 1;
    // branch: all weights zero, output bias (1, 2) -> constant output (1, 2)
    d.branch = mlp_init({2, 1, 2}, Activation::relu, 1);
    for (auto& w : d.branch.weights)
        for (double& v : w.data) v = 0.0;
    d.branch.biases[1](0, 0) = 1.0;
    d.branch.biases[1](0, 1) = 2.0;
    // trunk: relu passthrough hidden, output = x*(2,2) + (3,4)
    d.trunk = mlp_init({1, 1, 2}, Activation::relu, 2);
    d.trunk.weights[0](0, 0) = 1.0;
    d.trunk.biases[0](0, 0) = 0.0;
    d.trunk.weights[1](0, 0) = 2.0;
    d.trunk.weights[1](1, 0) = 2.0;
    d.trunk.biases[1](0, 0) = 3.0;
    d.trunk.biases[1](0, 1) = 4.0;

    Matrix u(1, 2, 0.3);
    Matrix pts(2, 1);
    pts(0, 0) = 0.0;  // trunk -> (3,4), inner product with (1,2) = 11
    pts(1, 0) = 1.0;  // trunk -> (5,6), inner product with (1,2) = 17
    Matrix pred = don_predict(d, u, pts);
    CHECK(pred(0, 0) == doctest::Approx(11.0).epsilon(1e-14));
    CHECK(pred(1, 0) == doctest::Approx(17.0).epsilon(1e-14));
}

TEST_CASE("don_predict: matches per-point scalar oracle") {
    ModnoModel m = make_model(1, 5, 4, 2, 11);
    DonModel d = m.as_don(0);
    Matrix u = random_matrix(1, 5, 21);
    Matrix pts = random_matrix(6, 2, 22);
    Matrix pred = don_predict(d, u, pts);

    Matrix a = mlp_forward(d.branch, u);
    for (int j = 0; j < pts.rows; ++j) {
        Matrix one(1, 2);
        one(0, 0) = pts(j, 0);
        one(0, 1) = pts(j, 1);
        Matrix b = mlp_forward(d.trunk, one);
        double want = 0.0;
        for (int k = 0; k < d.basis_count; ++k) want += a(0, k) * b(0, k);
        CHECK(std::fabs(pred(j, 0) - want) < 1e-12);
    }
}

TEST_CASE("modno_predict: reassembled DonModel is bit-identical per operator") {
    ModnoModel m = make_model(3, 5, 4, 1, 31);
    Matrix u = random_matrix(1, 5, 33);
    Matrix pts = random_matrix(9, 1, 34);
    for (int i = 0; i < 3; ++i) {
        Matrix via_modno = modno_predict(m, i, u, pts);
        Matrix via_don = don_predict(m.as_don(i), u, pts);
        CHECK(via_modno == via_don);
    }
    CHECK_THROWS_AS(modno_predict(m, 3, u, pts), IndexError);
    CHECK_THROWS_AS(modno_predict(m, -1, u, pts), IndexError);
    CHECK_THROWS_AS(m.as_don(7), IndexError);
}

TEST_CASE("modno_predict: operators with identical trunk parameters predict identically") {
    ModnoModel m = make_model(2, 4, 3, 1, 41);
    m.trunks[1] = m.trunks[0];
    Matrix u = random_matrix(1, 4, 43);
    Matrix pts = random_matrix(5, 1, 44);
    CHECK(modno_predict(m, 0, u, pts) == modno_predict(m, 1, u, pts));
}

TEST_CASE("basis sharing: changing trunk j never changes operator i predictions") {
    ModnoModel m = make_model(3, 4, 3, 1, 51);
    Matrix u = random_matrix(1, 4, 53);
    Matrix pts = random_matrix(5, 1, 54);
    Matrix before0 = modno_predict(m, 0, u, pts);
    Matrix before2 = modno_predict(m, 2, u, pts);
    for (auto& w : m.trunks[1].weights)
        for (double& v : w.data) v += 0.37;
    CHECK(modno_predict(m, 0, u, pts) == before0);
    CHECK(modno_predict(m, 2, u, pts) == before2);
}

TEST_CASE("local loss: zero residual means zero loss and zero gradients") {
    ModnoModel m = make_model(2, 4, 3, 1, 61);
    OperatorBatch b = make_batch(m, 0, 3, 6, 62, true);
    std::vector<Matrix> preds = modno_predict_batch(m, 0, b);
    for (std::size_t p = 0; p < preds.size(); ++p) b.queries[p].targets = preds[p];

    LossGrads r = local_loss_and_grads(m, 0, b);
    CHECK(r.loss == 0.0);
    CHECK(r.trunk.max_abs() == 0.0);
    CHECK(r.branch.max_abs() == 0.0);
}

TEST_CASE("local loss: all-zero trunk annihilates the basis, zero targets give zero loss") {
    ModnoModel m = make_model(1, 4, 2, 1, 71);
    for (auto& w : m.trunks[0].weights)
        for (double& v : w.data) v = 0.0;
    for (auto& bi : m.trunks[0].biases)
        for (double& v : bi.data) v = 0.0;
    OperatorBatch b = make_batch(m, 0, 2, 5, 72, true);
    for (auto& q : b.queries)
        for (double& v : q.targets.data) v = 0.0;
    LossGrads r = local_loss_and_grads(m, 0, b);
    CHECK(r.loss == 0.0);
}

TEST_CASE("local loss: gradients match finite differences for trunk and branch") {
    ModnoModel m = make_model(2, 4, 3, 1, 81);
    OperatorBatch b = make_batch(m, 1, 3, 5, 82, true);
    LossGrads r = local_loss_and_grads(m, 1, b);

    auto loss_of_trunk = [&](const MlpParams& p) {
        ModnoModel probe = m;
        probe.trunks[1] = p;
        return local_loss_and_grads(probe, 1, b).loss;
    };
    auto loss_of_branch = [&](const MlpParams& p) {
        ModnoModel probe = m;
        probe.shared_branch = p;
        return local_loss_and_grads(probe, 1, b).loss;
    };
    MlpGrads fd_trunk = finite_difference_grad(loss_of_trunk, m.trunks[1], 1e-5);
    MlpGrads fd_branch = finite_difference_grad(loss_of_branch, m.shared_branch, 1e-5);
    CHECK(grads_max_rel_diff(r.trunk, fd_trunk) < 1e-6);
    CHECK(grads_max_rel_diff(r.branch, fd_branch) < 1e-6);
}

TEST_CASE("local loss: shared-mesh fast path agrees with the per-function path") {
    ModnoModel m = make_model(1, 4, 3, 1, 91);
    OperatorBatch shared = make_batch(m, 0, 4, 6, 92, true);
    REQUIRE(shared.shared_mesh);
    OperatorBatch general = shared;
    general.shared_mesh = false;

    LossGrads fast = local_loss_and_grads(m, 0, shared);
    LossGrads slow = local_loss_and_grads(m, 0, general);
    CHECK(std::fabs(fast.loss - slow.loss) < 1e-14);
    CHECK(grads_max_rel_diff(fast.trunk, slow.trunk) < 1e-10);
    CHECK(grads_max_rel_diff(fast.branch, slow.branch) < 1e-10);

    std::vector<Matrix> pf = modno_predict_batch(m, 0, shared);
    std::vector<Matrix> ps = modno_predict_batch(m, 0, general);
    for (std::size_t p = 0; p < pf.size(); ++p)
        for (std::size_t j = 0; j < pf[p].data.size(); ++j)
            CHECK(std::fabs(pf[p].data[j] - ps[p].data[j]) < 1e-13);
}

TEST_CASE("local loss: distinct per-function meshes are handled") {
    ModnoModel m = make_model(1, 4, 3, 2, 101);
    OperatorBatch b = make_batch(m, 0, 3, 4, 102, false);
    REQUIRE_FALSE(b.shared_mesh);
    LossGrads r = local_loss_and_grads(m, 0, b);
    CHECK(r.loss > 0.0);

    auto loss_of_branch = [&](const MlpParams& p) {
        ModnoModel probe = m;
        probe.shared_branch = p;
        return local_loss_and_grads(probe, 0, b).loss;
    };
    MlpGrads fd = finite_difference_grad(loss_of_branch, m.shared_branch, 1e-5);
    CHECK(grads_max_rel_diff(r.branch, fd) < 1e-6);
}

TEST_CASE("local loss: empty batch is rejected") {
    ModnoModel m = make_model(1, 4, 3, 1, 111);
    OperatorBatch empty;
    CHECK_THROWS_AS(local_loss_and_grads(m, 0, empty), ConfigError);
}

TEST_CASE("global loss: single operator with full subset equals the local computation") {
    ModnoModel m = make_model(1, 4, 3, 1, 121);
    OperatorBatch b = make_batch(m, 0, 4, 5, 122, true);
    LossGrads local = local_loss_and_grads(m, 0, b);
    GlobalLossGrads global = global_loss_and_grads(m, {&b}, {{0, 1, 2, 3}});
    CHECK(global.loss == local.loss);
    CHECK(grads_equal(global.branch, local.branch));
}

TEST_CASE("global loss: identical shards and trunks double the single-operator loss") {
    ModnoModel m = make_model(2, 4, 3, 1, 131);
    m.trunks[1] = m.trunks[0];
    OperatorBatch b = make_batch(m, 0, 3, 5, 132, true);
    LossGrads local = local_loss_and_grads(m, 0, b);
    GlobalLossGrads global = global_loss_and_grads(m, {&b, &b}, {{0, 1, 2}, {0, 1, 2}});
    CHECK(global.loss == 2.0 * local.loss);
}

TEST_CASE("global loss: branch gradient is the sum of independent per-operator gradients") {
    ModnoModel m = make_model(3, 4, 3, 1, 141);
    OperatorBatch b0 = make_batch(m, 0, 3, 5, 142, true);
    OperatorBatch b1 = make_batch(m, 1, 2, 7, 143, true);
    OperatorBatch b2 = make_batch(m, 2, 4, 4, 144, false);
    std::vector<std::vector<int>> subs = {{0, 1, 2}, {0, 1}, {0, 1, 2, 3}};
    GlobalLossGrads global = global_loss_and_grads(m, {&b0, &b1, &b2}, subs);

    MlpGrads want = MlpGrads::zeros_like(m.shared_branch);
    want.add_scaled(local_loss_and_grads(m, 0, b0).branch, 1.0);
    want.add_scaled(local_loss_and_grads(m, 1, b1).branch, 1.0);
    want.add_scaled(local_loss_and_grads(m, 2, b2).branch, 1.0);
    CHECK(grads_max_rel_diff(global.branch, want) < 1e-12);
    CHECK(global.local_losses.size() == 3);
    CHECK(global.loss == doctest::Approx(global.local_losses[0] + global.local_losses[1] +
                                         global.local_losses[2]).epsilon(1e-15));
}

TEST_CASE("global loss: proper subsets restrict the data") {
    ModnoModel m = make_model(1, 4, 3, 1, 151);
    OperatorBatch b = make_batch(m, 0, 4, 5, 152, true);
    OperatorBatch manual = subset_batch(b, {1, 3});
    GlobalLossGrads via_subset = global_loss_and_grads(m, {&b}, {{1, 3}});
    LossGrads direct = local_loss_and_grads(m, 0, manual);
    CHECK(via_subset.loss == direct.loss);
    CHECK_THROWS_AS(global_loss_and_grads(m, {}, {}), ConfigError);
}

TEST_CASE("subset_batch keeps rows and queries aligned") {
    ModnoModel m = make_model(1, 3, 2, 1, 161);
    OperatorBatch b = make_batch(m, 0, 5, 4, 162, true);
    OperatorBatch s = subset_batch(b, {4, 0});
    CHECK(s.function_count() == 2);
    for (int j = 0; j < 3; ++j) {
        CHECK(s.u_hats(0, j) == b.u_hats(4, j));
        CHECK(s.u_hats(1, j) == b.u_hats(0, j));
    }
    CHECK(s.queries[0].targets == b.queries[4].targets);
    CHECK(s.queries[1].targets == b.queries[0].targets);
    CHECK(s.shared_mesh);
    CHECK_THROWS_AS(subset_batch(b, {5}), IndexError);
}

TEST_CASE("relative_l2: fixed points of the metric") {
    Matrix t = random_matrix(6, 1, 171);
    CHECK(relative_l2(t, t) == 0.0);
    Matrix zero(6, 1, 0.0);
    CHECK(relative_l2(zero, t) == doctest::Approx(1.0).epsilon(1e-15));
    Matrix twice = t;
    scale(twice, 2.0);
    CHECK(relative_l2(twice, t) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(relative_l2(t, zero), DegenerateTargetError);
}

TEST_CASE("evaluate_modno averages per-function relative errors") {
    ModnoModel m = make_model(1, 4, 3, 1, 181);
    OperatorBatch b = make_batch(m, 0, 3, 5, 182, true);
    std::vector<Matrix> preds = modno_predict_batch(m, 0, b);
    double want = 0.0;
    for (std::size_t p = 0; p < preds.size(); ++p)
        want += relative_l2(preds[p], b.queries[p].targets);
    want /= 3.0;
    CHECK(evaluate_modno(m, 0, b) == doctest::Approx(want).epsilon(1e-15));
}
