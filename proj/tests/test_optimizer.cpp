#include <doctest.h>

#include <cmath>

#include "modno/errors.hpp"
#include "modno/mlp.hpp"
#include "modno/optimizer.hpp"
#include "modno/rng.hpp"

using namespace modno;

namespace {

MlpGrads constant_grads(const MlpParams& p, double value) {
    MlpGrads g = MlpGrads::zeros_like(p);
    for (auto& w : g.weights)
        for (double& v : w.data) v = value;
    for (auto& b : g.biases)
        for (double& v : b.data) v = value;
    return g;
}

}  // namespace

TEST_CASE("optim names round-trip") {
    CHECK(optim_from_string("sgd") == OptimKind::sgd);
    CHECK(optim_from_string("adam") == OptimKind::adam);
    CHECK(optim_name(OptimKind::adam) == "adam");
    CHECK_THROWS_AS(optim_from_string("rmsprop"), ConfigError);
}

TEST_CASE("optimizer_init rejects non-positive learning rate") {
    MlpParams p = mlp_init({1, 2, 1}, Activation::tanh_act, 1);
    CHECK_THROWS_AS(optimizer_init(OptimKind::sgd, 0.0, p), ConfigError);
    CHECK_THROWS_AS(optimizer_init(OptimKind::adam, -1.0, p), ConfigError);
}

TEST_CASE("sgd: zero gradient leaves parameters untouched") {
    MlpParams p = mlp_init({2, 4, 1}, Activation::tanh_act, 5);
    MlpParams before = p;
    OptimState s = optimizer_init(OptimKind::sgd, 0.1, p);
    optimizer_step(s, p, constant_grads(p, 0.0));
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        CHECK(p.weights[l] == before.weights[l]);
        CHECK(p.biases[l] == before.biases[l]);
    }
    CHECK(s.step == 1);
}

TEST_CASE("sgd: theta 1, grad 2, lr 0.1 gives 0.8") {
    MlpParams p = mlp_init({1, 1, 1}, Activation::tanh_act, 1);
    for (auto& w : p.weights)
        for (double& v : w.data) v = 1.0;
    OptimState s = optimizer_init(OptimKind::sgd, 0.1, p);
    optimizer_step(s, p, constant_grads(p, 2.0));
    CHECK(p.weights[0](0, 0) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(p.weights[1](0, 0) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("adam: first-step magnitude is close to lr regardless of gradient scale") {
    for (double g : {5.0, 1e-3, 250.0}) {
        MlpParams p = mlp_init({1, 1, 1}, Activation::tanh_act, 3);
        MlpParams before = p;
        OptimState s = optimizer_init(OptimKind::adam, 1e-3, p);
        optimizer_step(s, p, constant_grads(p, g));
        double delta = before.weights[0](0, 0) - p.weights[0](0, 0);
        CHECK(delta == doctest::Approx(1e-3).epsilon(1e-4));
    }
}

TEST_CASE("adam: negative gradient moves parameters up") {
    MlpParams p = mlp_init({1, 1, 1}, Activation::tanh_act, 3);
    double w0 = p.weights[0](0, 0);
    OptimState s = optimizer_init(OptimKind::adam, 1e-2, p);
    optimizer_step(s, p, constant_grads(p, -4.0));
    CHECK(p.weights[0](0, 0) > w0);
}

TEST_CASE("optimizer trajectories are deterministic") {
    auto run = [] {
        MlpParams p = mlp_init({2, 6, 2}, Activation::tanh_act, 7);
        OptimState s = optimizer_init(OptimKind::adam, 1e-3, p);
        Rng rng(11);
        for (int step = 0; step < 10; ++step) {
            MlpGrads g = MlpGrads::zeros_like(p);
            for (auto& w : g.weights)
                for (double& v : w.data) v = rng.uniform(-1.0, 1.0);
            optimizer_step(s, p, g);
        }
        return p;
    };
    MlpParams a = run();
    MlpParams b = run();
    for (std::size_t l = 0; l < a.weights.size(); ++l) CHECK(a.weights[l] == b.weights[l]);
}

TEST_CASE("optimizer_step rejects mismatched gradient shapes") {
    MlpParams p = mlp_init({2, 4, 1}, Activation::tanh_act, 5);
    MlpParams other = mlp_init({2, 4, 4, 1}, Activation::tanh_act, 5);
    OptimState s = optimizer_init(OptimKind::sgd, 0.1, p);
    CHECK_THROWS_AS(optimizer_step(s, p, MlpGrads::zeros_like(other)), ShapeError);
}

TEST_CASE("grad helpers: add_scaled and max_abs") {
    MlpParams p = mlp_init({1, 2, 1}, Activation::tanh_act, 1);
    MlpGrads a = constant_grads(p, 1.0);
    MlpGrads b = constant_grads(p, 3.0);
    a.add_scaled(b, -0.5);
    CHECK(a.max_abs() == doctest::Approx(0.5).epsilon(1e-15));
}
