#include "modno/mlp.hpp"

#include <cmath>
#include <string>

#include "modno/errors.hpp"
#include "modno/rng.hpp"

namespace modno {
namespace {

void apply_activation(Matrix& z, Activation act) {
    switch (act) {
        case Activation::tanh_act:
            for (double& v : z.data) v = std::tanh(v);
            break;
        case Activation::relu:
            for (double& v : z.data) v = v > 0.0 ? v : 0.0;
            break;
        case Activation::sine:
            for (double& v : z.data) v = std::sin(v);
            break;
    }
}

// derivative in terms of the pre-activation z
void activation_derivative(const Matrix& z, Activation act, Matrix& out) {
    out = Matrix(z.rows, z.cols);
    switch (act) {
        case Activation::tanh_act:
            for (std::size_t i = 0; i < z.data.size(); ++i) {
                double t = std::tanh(z.data[i]);
                out.data[i] = 1.0 - t * t;
            }
            break;
        case Activation::relu:
            for (std::size_t i = 0; i < z.data.size(); ++i) out.data[i] = z.data[i] > 0.0 ? 1.0 : 0.0;
            break;
        case Activation::sine:
            for (std::size_t i = 0; i < z.data.size(); ++i) out.data[i] = std::cos(z.data[i]);
            break;
    }
}

// z = x · Wᵀ + b (bias row broadcast over rows)
Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
    Matrix z = matmul_nt(x, w);
    for (int i = 0; i < z.rows; ++i)
        for (int j = 0; j < z.cols; ++j) z(i, j) += b(0, j);
    return z;
}

}  // namespace

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::tanh_act;
    if (name == "relu") return Activation::relu;
    if (name == "sine") return Activation::sine;
    throw ConfigError("unknown activation: " + name);
}

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::tanh_act: return "tanh";
        case Activation::relu: return "relu";
        case Activation::sine: return "sine";
    }
    return "tanh";
}

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

void MlpParams::check_consistent() const {
    if (layer_sizes.size() < 3) throw ConfigError("mlp needs at least one hidden layer");
    if (weights.size() + 1 != layer_sizes.size() || biases.size() != weights.size())
        throw ShapeError("mlp: layer count mismatch");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows != layer_sizes[l + 1] || weights[l].cols != layer_sizes[l])
            throw ShapeError("mlp: weight shape inconsistent with layer_sizes");
        if (biases[l].rows != 1 || biases[l].cols != layer_sizes[l + 1])
            throw ShapeError("mlp: bias shape inconsistent with layer_sizes");
    }
}

MlpGrads MlpGrads::zeros_like(const MlpParams& p) {
    MlpGrads g;
    g.weights.reserve(p.weights.size());
    g.biases.reserve(p.biases.size());
    for (const auto& w : p.weights) g.weights.emplace_back(w.rows, w.cols);
    for (const auto& b : p.biases) g.biases.emplace_back(b.rows, b.cols);
    return g;
}

void MlpGrads::add_scaled(const MlpGrads& other, double alpha) {
    if (weights.size() != other.weights.size()) throw ShapeError("grad accumulate: layer count mismatch");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        axpy(alpha, other.weights[l], weights[l]);
        axpy(alpha, other.biases[l], biases[l]);
    }
}

double MlpGrads::max_abs() const {
    double m = 0.0;
    for (const auto& w : weights)
        for (double v : w.data) m = std::max(m, std::fabs(v));
    for (const auto& b : biases)
        for (double v : b.data) m = std::max(m, std::fabs(v));
    return m;
}

MlpParams mlp_init(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed) {
    if (layer_sizes.size() < 3) throw ConfigError("mlp_init: need [d_in, h_1, ..., d_out] with at least one hidden layer");
    for (int s : layer_sizes)
        if (s <= 0) throw ConfigError("mlp_init: layer sizes must be positive");

    MlpParams p;
    p.layer_sizes = layer_sizes;
    p.activation = activation;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        int fan_in = layer_sizes[l];
        int fan_out = layer_sizes[l + 1];
        double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (double& v : w.data) v = rng.uniform(-bound, bound);
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(1, fan_out);
    }
    return p;
}

Matrix mlp_forward(const MlpParams& params, const Matrix& batch) {
    params.check_consistent();
    if (batch.cols != params.input_dim())
        throw ShapeError("mlp_forward: batch width " + std::to_string(batch.cols) +
                         " != input dim " + std::to_string(params.input_dim()));
    Matrix a = batch;
    int n_layers = params.layer_count();
    for (int l = 0; l < n_layers; ++l) {
        Matrix z = affine(a, params.weights[l], params.biases[l]);
        if (l + 1 < n_layers) apply_activation(z, params.activation);
        a = std::move(z);
    }
    return a;
}

BackwardResult mlp_backward(const MlpParams& params, const Matrix& batch, const Matrix& upstream) {
    params.check_consistent();
    if (batch.cols != params.input_dim()) throw ShapeError("mlp_backward: batch width != input dim");
    if (upstream.rows != batch.rows || upstream.cols != params.output_dim())
        throw ShapeError("mlp_backward: upstream gradient shape mismatch");

    int n_layers = params.layer_count();

    // forward pass, caching inputs to every layer and hidden pre-activations
    std::vector<Matrix> layer_inputs;  // a_0 .. a_{L-1}
    layer_inputs.reserve(n_layers);
    std::vector<Matrix> pre_acts;  // z_0 .. z_{L-2} (hidden layers only)
    pre_acts.reserve(n_layers - 1);

    Matrix a = batch;
    for (int l = 0; l < n_layers; ++l) {
        layer_inputs.push_back(a);
        Matrix z = affine(a, params.weights[l], params.biases[l]);
        if (l + 1 < n_layers) {
            pre_acts.push_back(z);
            apply_activation(z, params.activation);
        }
        a = std::move(z);
    }

    BackwardResult res;
    res.grads = MlpGrads::zeros_like(params);

    // delta is d(sum(upstream ⊙ out)) / d(z_l)
    Matrix delta = upstream;
    for (int l = n_layers - 1; l >= 0; --l) {
        res.grads.weights[l] = matmul_tn(delta, layer_inputs[l]);
        Matrix& db = res.grads.biases[l];
        for (int i = 0; i < delta.rows; ++i)
            for (int j = 0; j < delta.cols; ++j) db(0, j) += delta(i, j);

        Matrix da = matmul(delta, params.weights[l]);
        if (l > 0) {
            Matrix dact;
            activation_derivative(pre_acts[l - 1], params.activation, dact);
            for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] *= dact.data[i];
        }
        delta = std::move(da);
    }
    res.input_grad = std::move(delta);
    return res;
}

MlpGrads finite_difference_grad(const std::function<double(const MlpParams&)>& f,
                                const MlpParams& params, double h) {
    if (!(h > 0.0)) throw ConfigError("finite_difference_grad: h must be positive");
    MlpGrads g = MlpGrads::zeros_like(params);
    MlpParams probe = params;
    auto central = [&](double& slot, double& out) {
        double saved = slot;
        slot = saved + h;
        double fp = f(probe);
        slot = saved - h;
        double fm = f(probe);
        slot = saved;
        out = (fp - fm) / (2.0 * h);
    };
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        for (std::size_t i = 0; i < params.weights[l].data.size(); ++i)
            central(probe.weights[l].data[i], g.weights[l].data[i]);
        for (std::size_t i = 0; i < params.biases[l].data.size(); ++i)
            central(probe.biases[l].data[i], g.biases[l].data[i]);
    }
    return g;
}

}  // namespace modno
