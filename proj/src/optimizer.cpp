#include "modno/optimizer.hpp"

#include <cmath>

#include "modno/errors.hpp"

namespace modno {

OptimKind optim_from_string(const std::string& name) {
    if (name == "sgd") return OptimKind::sgd;
    if (name == "adam") return OptimKind::adam;
    throw ConfigError("unknown optimizer: " + name);
}

std::string optim_name(OptimKind k) {
    return k == OptimKind::sgd ? "sgd" : "adam";
}

OptimState optimizer_init(OptimKind kind, double lr, const MlpParams& params) {
    if (!(lr > 0.0)) throw ConfigError("optimizer: learning rate must be positive");
    OptimState s;
    s.kind = kind;
    s.lr = lr;
    if (kind == OptimKind::adam) {
        s.m = MlpGrads::zeros_like(params);
        s.v = MlpGrads::zeros_like(params);
    }
    return s;
}

namespace {

void sgd_update(double lr, Matrix& theta, const Matrix& g) {
    for (std::size_t i = 0; i < theta.data.size(); ++i) theta.data[i] -= lr * g.data[i];
}

void adam_update(const OptimState& s, double bc1, double bc2,
                 Matrix& theta, const Matrix& g, Matrix& m, Matrix& v) {
    for (std::size_t i = 0; i < theta.data.size(); ++i) {
        double gi = g.data[i];
        m.data[i] = s.beta1 * m.data[i] + (1.0 - s.beta1) * gi;
        v.data[i] = s.beta2 * v.data[i] + (1.0 - s.beta2) * gi * gi;
        double mhat = m.data[i] / bc1;
        double vhat = v.data[i] / bc2;
        theta.data[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
    }
}

}  // namespace

void optimizer_step(OptimState& state, MlpParams& params, const MlpGrads& grads) {
    if (grads.weights.size() != params.weights.size())
        throw ShapeError("optimizer_step: gradient layer count mismatch");
    state.step += 1;
    if (state.kind == OptimKind::sgd) {
        for (std::size_t l = 0; l < params.weights.size(); ++l) {
            sgd_update(state.lr, params.weights[l], grads.weights[l]);
            sgd_update(state.lr, params.biases[l], grads.biases[l]);
        }
        return;
    }
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        adam_update(state, bc1, bc2, params.weights[l], grads.weights[l],
                    state.m.weights[l], state.v.weights[l]);
        adam_update(state, bc1, bc2, params.biases[l], grads.biases[l],
                    state.m.biases[l], state.v.biases[l]);
    }
}

}  // namespace modno
