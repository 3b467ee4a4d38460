#include "modno/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "modno/errors.hpp"
#include "modno/rng.hpp"

namespace modno {
namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
    return m;
}

double mse(const Matrix& pred, const Matrix& target) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        double d = pred.data[i] - target.data[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

// Smallest |pre-activation| across the hidden layers. Relu has a kink at
// zero, so finite differences near it are meaningless; batches that land a
// pre-activation inside the margin get redrawn.
double min_preactivation_magnitude(const MlpParams& p, const Matrix& batch) {
    Matrix h = batch;
    double lo = HUGE_VAL;
    int n_layers = static_cast<int>(p.weights.size());
    for (int l = 0; l + 1 < n_layers; ++l) {
        Matrix z = matmul_nt(h, p.weights[l]);
        for (int i = 0; i < z.rows; ++i)
            for (int j = 0; j < z.cols; ++j) z(i, j) += p.biases[l](0, j);
        for (double v : z.data) lo = std::min(lo, std::fabs(v));
        for (double& v : z.data) v = v > 0.0 ? v : 0.0;
        h = std::move(z);
    }
    return lo;
}

// Relative error with an absolute floor. Central differences on an O(1) loss
// carry roundoff of roughly 1e-12 per parameter, so gradients below the floor
// are compared against the floor itself; anything larger is compared against
// its own magnitude, which is where a real backprop defect would show.
double max_rel_error(const MlpGrads& got, const MlpGrads& want) {
    const double floor = 1e-5;
    double worst = 0.0;
    for (std::size_t l = 0; l < got.weights.size(); ++l) {
        for (std::size_t i = 0; i < got.weights[l].data.size(); ++i) {
            double d = std::fabs(got.weights[l].data[i] - want.weights[l].data[i]);
            worst = std::max(worst, d / std::max(std::fabs(want.weights[l].data[i]), floor));
        }
        for (std::size_t i = 0; i < got.biases[l].data.size(); ++i) {
            double d = std::fabs(got.biases[l].data[i] - want.biases[l].data[i]);
            worst = std::max(worst, d / std::max(std::fabs(want.biases[l].data[i]), floor));
        }
    }
    return worst;
}

}  // namespace

GradCheckReport run_gradient_check(int n_models, std::uint64_t seed, double tolerance) {
    if (n_models < 1) throw ConfigError("run_gradient_check: n_models must be >= 1");
    if (!(tolerance > 0.0)) throw ConfigError("run_gradient_check: tolerance must be positive");

    const Activation kinds[] = {Activation::tanh_act, Activation::sine, Activation::relu};

    GradCheckReport report;
    report.tolerance = tolerance;

    for (int m = 0; m < n_models; ++m) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));

        GradCheckCase c;
        c.activation = kinds[m % 3];
        int d_in = 1 + static_cast<int>(rng.below(6));
        int d_out = 1 + static_cast<int>(rng.below(4));
        int depth = 1 + static_cast<int>(rng.below(3));
        c.layer_sizes.push_back(d_in);
        for (int l = 0; l < depth; ++l) c.layer_sizes.push_back(4 + static_cast<int>(rng.below(9)));
        c.layer_sizes.push_back(d_out);
        c.batch_rows = 3 + static_cast<int>(rng.below(6));

        // With a piecewise-linear activation the loss is piecewise quadratic
        // in any single parameter, so central differences carry no truncation
        // error and the step only has to stay inside the activation region;
        // the smooth activations take a larger step and rely on Richardson.
        double h = c.activation == Activation::relu ? 1e-4 : 1e-3;

        MlpParams p = mlp_init(c.layer_sizes, c.activation, rng.next_u64());
        Matrix x = random_matrix(c.batch_rows, d_in, rng);
        if (c.activation == Activation::relu) {
            // A single-parameter perturbation of size h moves any
            // pre-activation by at most a few h at these weight and input
            // magnitudes, so a 20h margin keeps every unit on its side of
            // the kink throughout the difference stencil.
            for (int tries = 0; tries < 64 && min_preactivation_magnitude(p, x) < 20.0 * h;
                 ++tries)
                x = random_matrix(c.batch_rows, d_in, rng);
        }
        Matrix target = random_matrix(c.batch_rows, d_out, rng);

        Matrix pred = mlp_forward(p, x);
        Matrix upstream(pred.rows, pred.cols);
        for (std::size_t i = 0; i < upstream.data.size(); ++i)
            upstream.data[i] =
                2.0 * (pred.data[i] - target.data[i]) / static_cast<double>(pred.size());
        BackwardResult analytic = mlp_backward(p, x, upstream);

        auto loss = [&](const MlpParams& q) { return mse(mlp_forward(q, x), target); };
        // Richardson step (4 D(h/2) - D(h)) / 3 cancels the h^2 truncation
        // term, pushing the oracle's own error well below the tolerance.
        MlpGrads fd = finite_difference_grad(loss, p, h / 2.0);
        MlpGrads coarse = finite_difference_grad(loss, p, h);
        for (std::size_t l = 0; l < fd.weights.size(); ++l) {
            for (std::size_t i = 0; i < fd.weights[l].data.size(); ++i)
                fd.weights[l].data[i] =
                    (4.0 * fd.weights[l].data[i] - coarse.weights[l].data[i]) / 3.0;
            for (std::size_t i = 0; i < fd.biases[l].data.size(); ++i)
                fd.biases[l].data[i] = (4.0 * fd.biases[l].data[i] - coarse.biases[l].data[i]) / 3.0;
        }

        c.rel_error = max_rel_error(analytic.grads, fd);
        report.worst_rel_error = std::max(report.worst_rel_error, c.rel_error);
        report.cases.push_back(std::move(c));
    }

    report.passed = report.worst_rel_error < tolerance;
    return report;
}

}  // namespace modno
