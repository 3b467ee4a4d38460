#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "modno/matrix.hpp"

namespace modno {

enum class Activation { tanh_act, relu, sine };

Activation activation_from_string(const std::string& name);
std::string activation_name(Activation a);

// Fully-connected net: affine + activation on hidden layers, linear output.
// weights[l] has shape [layer_sizes[l+1] x layer_sizes[l]], biases[l] is a row.
struct MlpParams {
    std::vector<int> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
    Activation activation = Activation::tanh_act;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int layer_count() const { return static_cast<int>(weights.size()); }
    std::size_t parameter_count() const;
    void check_consistent() const;
};

// Gradient carrier, shape-congruent with its MlpParams.
struct MlpGrads {
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;

    static MlpGrads zeros_like(const MlpParams& p);
    void add_scaled(const MlpGrads& other, double alpha);
    double max_abs() const;
};

// Glorot-uniform weights, zero biases; deterministic in the seed.
MlpParams mlp_init(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed);

// batch is [n x d_in]; returns [n x d_out].
Matrix mlp_forward(const MlpParams& params, const Matrix& batch);

struct BackwardResult {
    MlpGrads grads;
    Matrix input_grad;  // [n x d_in]
};

// Exact reverse-mode gradients of sum(upstream ⊙ output) w.r.t. params and batch.
// Recomputes the forward activations internally.
BackwardResult mlp_backward(const MlpParams& params, const Matrix& batch, const Matrix& upstream);

// Central finite differences (f(θ+h) − f(θ−h)) / 2h per parameter; test oracle.
MlpGrads finite_difference_grad(const std::function<double(const MlpParams&)>& f,
                                const MlpParams& params, double h);

}  // namespace modno
