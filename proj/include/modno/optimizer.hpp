#pragma once

#include <cstdint>
#include <string>

#include "modno/mlp.hpp"

namespace modno {

enum class OptimKind { sgd, adam };

OptimKind optim_from_string(const std::string& name);
std::string optim_name(OptimKind k);

// Per-network optimizer state. Adam keeps first/second moment estimates and a
// step counter for bias correction; sgd uses none of them.
struct OptimState {
    OptimKind kind = OptimKind::adam;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step = 0;
    MlpGrads m;
    MlpGrads v;
};

OptimState optimizer_init(OptimKind kind, double lr, const MlpParams& params);

// One in-place update of params from grads. Advances the step counter.
void optimizer_step(OptimState& state, MlpParams& params, const MlpGrads& grads);

}  // namespace modno
