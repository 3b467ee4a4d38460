#pragma once

#include <array>
#include <string>
#include <vector>

#include "modno/grid.hpp"
#include "modno/rng.hpp"

namespace modno {

// Random initial-condition families. Each family is defined on a reference
// domain of fixed length; when a grid has a different length, coordinates are
// rescaled as x_ref = x * reference_length / L so the drawn function stays
// periodic on the target domain.
enum class IcFamily {
    fourier_a,       // 8 trig modes, weights U(-2,2), plus a constant U(0.1,2)
    fourier_b,       // 0.1 * (6 trig modes), weights U(-1,1)
    gaussian_mix_a,  // two periodized Gaussian bumps, means U(2pi,4pi)
    gaussian_mix_b,  // two periodized Gaussian bumps, means near the left edge
};

std::string ic_family_name(IcFamily family);
IcFamily ic_family_from_string(const std::string& name);

// Native domain length of each family: 2, 2, 2*pi, 1.
double ic_reference_length(IcFamily family);

struct InitialConditionSpec {
    IcFamily family = IcFamily::fourier_a;
    double offset = 0.0;            // added pointwise after sampling
    double reference_length = 0.0;  // 0 selects the family default

    double effective_reference_length() const {
        return reference_length > 0.0 ? reference_length : ic_reference_length(family);
    }
    void validate() const;
};

// Draws one random function from the family and evaluates it on the grid.
// Gaussian mixtures are periodized by summing bump images over 5 shifts on
// each side. Weight draw order is fixed, so output is a pure function of the
// rng state.
std::vector<double> sample_ic(const InitialConditionSpec& spec, const Grid1D& grid, Rng& rng);

// Deterministic evaluators behind the random families, exposed so the basis
// forms are testable with chosen weights.
std::vector<double> evaluate_fourier_a(const std::array<double, 9>& w, const Grid1D& grid,
                                       double reference_length);
std::vector<double> evaluate_fourier_b(const std::array<double, 6>& w, const Grid1D& grid,
                                       double reference_length);
std::vector<double> evaluate_gaussian_mix(double w1, double w2, double mu1, double mu2,
                                          double sigma1, double sigma2, const Grid1D& grid,
                                          double reference_length);

// Normal density at x summed over 5 periodic image shifts on each side.
double periodized_gaussian(double x, double mu, double sigma, double period);

}  // namespace modno
