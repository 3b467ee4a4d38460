#pragma once

#include <cstdint>
#include <vector>

#include "modno/mlp.hpp"

namespace modno {

// One randomly shaped network checked against the finite-difference oracle.
struct GradCheckCase {
    std::vector<int> layer_sizes;
    Activation activation = Activation::tanh_act;
    int batch_rows = 0;
    double rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckCase> cases;
    double worst_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

// Draws n_models random MLPs (random depth, widths, activation, batch) with a
// mean-squared-error loss against random targets, and compares the analytic
// gradient of every parameter to Richardson-extrapolated central finite
// differences. The relative error per parameter is
// |analytic - fd| / max(|fd|, 1e-5); the floor absorbs the oracle's own
// roundoff on near-zero gradients. A case passes when its worst parameter
// stays below the tolerance.
GradCheckReport run_gradient_check(int n_models, std::uint64_t seed, double tolerance = 1e-6);

}  // namespace modno
