#pragma once

#include <cmath>

#include "modno/errors.hpp"
#include "modno/matrix.hpp"

namespace modno {

// ‖pred − target‖₂ / ‖target‖₂ over all entries.
inline double relative_l2(const Matrix& pred, const Matrix& target) {
    if (!pred.same_shape(target)) throw ShapeError("relative_l2: shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        double d = pred.data[i] - target.data[i];
        num += d * d;
        den += target.data[i] * target.data[i];
    }
    if (den == 0.0) throw DegenerateTargetError("relative_l2: target has zero norm");
    return std::sqrt(num) / std::sqrt(den);
}

}  // namespace modno
