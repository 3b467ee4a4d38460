#pragma once

#include <vector>

#include "modno/errors.hpp"

namespace modno {

// Uniform periodic grid on [0, L): x_j = jL/N for j = 0..N-1, endpoint
// excluded. N must be even and at least 8 so FFT-based derivatives and the
// 2/3-rule dealiasing mask are well defined.
struct Grid1D {
    double length = 1.0;
    int n_points = 0;

    void check_consistent() const {
        if (!(length > 0.0)) throw ConfigError("grid: length must be positive");
        if (n_points < 8) throw ConfigError("grid: need at least 8 points");
        if (n_points % 2 != 0) throw ConfigError("grid: point count must be even");
    }

    double spacing() const { return length / n_points; }
    double point(int j) const { return length * j / n_points; }

    std::vector<double> points() const {
        std::vector<double> x(static_cast<std::size_t>(n_points));
        for (int j = 0; j < n_points; ++j) x[static_cast<std::size_t>(j)] = point(j);
        return x;
    }
};

}  // namespace modno
