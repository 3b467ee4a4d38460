#include "modno/initial_conditions.hpp"

#include <array>
#include <cmath>

namespace modno {

std::string ic_family_name(IcFamily family) {
    switch (family) {
        case IcFamily::fourier_a: return "fourier_a";
        case IcFamily::fourier_b: return "fourier_b";
        case IcFamily::gaussian_mix_a: return "gaussian_mix_a";
        case IcFamily::gaussian_mix_b: return "gaussian_mix_b";
    }
    throw ConfigError("ic: unknown family");
}

IcFamily ic_family_from_string(const std::string& name) {
    if (name == "fourier_a") return IcFamily::fourier_a;
    if (name == "fourier_b") return IcFamily::fourier_b;
    if (name == "gaussian_mix_a") return IcFamily::gaussian_mix_a;
    if (name == "gaussian_mix_b") return IcFamily::gaussian_mix_b;
    throw ConfigError("ic: unknown family name: " + name);
}

double ic_reference_length(IcFamily family) {
    switch (family) {
        case IcFamily::fourier_a: return 2.0;
        case IcFamily::fourier_b: return 2.0;
        case IcFamily::gaussian_mix_a: return 2.0 * M_PI;
        case IcFamily::gaussian_mix_b: return 1.0;
    }
    throw ConfigError("ic: unknown family");
}

void InitialConditionSpec::validate() const {
    if (!std::isfinite(offset)) throw ConfigError("ic: offset must be finite");
    if (reference_length < 0.0 || !std::isfinite(reference_length)) {
        throw ConfigError("ic: reference length must be finite and non-negative");
    }
}

double periodized_gaussian(double x, double mu, double sigma, double period) {
    double total = 0.0;
    for (int s = -5; s <= 5; ++s) {
        double z = (x + s * period - mu) / sigma;
        total += std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
    }
    return total;
}

std::vector<double> evaluate_fourier_a(const std::array<double, 9>& w, const Grid1D& grid,
                                       double reference_length) {
    grid.check_consistent();
    const double scale = reference_length / grid.length;
    std::vector<double> u(static_cast<std::size_t>(grid.n_points));
    for (int j = 0; j < grid.n_points; ++j) {
        double x = grid.point(j) * scale;
        u[static_cast<std::size_t>(j)] =
            w[0] * std::sin(M_PI * x) + w[1] * std::sin(2.0 * M_PI * x) +
            w[2] * std::sin(4.0 * M_PI * x) + w[3] * std::sin(6.0 * M_PI * x) +
            w[4] * std::cos(M_PI * x) + w[5] * std::cos(2.0 * M_PI * x) +
            w[6] * std::cos(4.0 * M_PI * x) + w[7] * std::cos(6.0 * M_PI * x) + w[8];
    }
    return u;
}

std::vector<double> evaluate_fourier_b(const std::array<double, 6>& w, const Grid1D& grid,
                                       double reference_length) {
    grid.check_consistent();
    const double scale = reference_length / grid.length;
    std::vector<double> u(static_cast<std::size_t>(grid.n_points));
    for (int j = 0; j < grid.n_points; ++j) {
        double x = grid.point(j) * scale;
        u[static_cast<std::size_t>(j)] =
            0.1 * (w[0] * std::sin(M_PI * x) + w[1] * std::sin(2.0 * M_PI * x) +
                   w[2] * std::sin(3.0 * M_PI * x) + w[3] * std::cos(2.0 * M_PI * x) +
                   w[4] * std::cos(4.0 * M_PI * x) + w[5] * std::cos(6.0 * M_PI * x));
    }
    return u;
}

std::vector<double> evaluate_gaussian_mix(double w1, double w2, double mu1, double mu2,
                                          double sigma1, double sigma2, const Grid1D& grid,
                                          double reference_length) {
    grid.check_consistent();
    const double scale = reference_length / grid.length;
    std::vector<double> u(static_cast<std::size_t>(grid.n_points));
    for (int j = 0; j < grid.n_points; ++j) {
        double x = grid.point(j) * scale;
        u[static_cast<std::size_t>(j)] =
            w1 * periodized_gaussian(x, mu1, sigma1, reference_length) +
            w2 * periodized_gaussian(x, mu2, sigma2, reference_length);
    }
    return u;
}

std::vector<double> sample_ic(const InitialConditionSpec& spec, const Grid1D& grid, Rng& rng) {
    spec.validate();
    grid.check_consistent();
    const double ref_len = spec.effective_reference_length();
    std::vector<double> u;

    switch (spec.family) {
        case IcFamily::fourier_a: {
            std::array<double, 9> w;
            for (int i = 0; i < 8; ++i) w[static_cast<std::size_t>(i)] = rng.uniform(-2.0, 2.0);
            w[8] = rng.uniform(0.1, 2.0);
            u = evaluate_fourier_a(w, grid, ref_len);
            break;
        }
        case IcFamily::fourier_b: {
            std::array<double, 6> w;
            for (double& wi : w) wi = rng.uniform(-1.0, 1.0);
            u = evaluate_fourier_b(w, grid, ref_len);
            break;
        }
        case IcFamily::gaussian_mix_a:
        case IcFamily::gaussian_mix_b: {
            double w1 = rng.uniform(0.0, 0.5);
            double w2 = rng.uniform(0.0, 0.5);
            double mu1, mu2, sig1, sig2;
            if (spec.family == IcFamily::gaussian_mix_a) {
                mu1 = rng.uniform(2.0 * M_PI, 4.0 * M_PI);
                mu2 = rng.uniform(2.0 * M_PI, 4.0 * M_PI);
                sig1 = rng.uniform(0.3, 1.0);
                sig2 = rng.uniform(0.3, 1.0);
            } else {
                mu1 = rng.uniform(0.1, 0.9);
                mu2 = rng.uniform(0.8, 1.5);
                sig1 = rng.uniform(0.1, 0.5);
                sig2 = rng.uniform(0.1, 0.5);
            }
            u = evaluate_gaussian_mix(w1, w2, mu1, mu2, sig1, sig2, grid, ref_len);
            break;
        }
    }

    if (spec.offset != 0.0) {
        for (double& v : u) v += spec.offset;
    }
    return u;
}

}  // namespace modno
