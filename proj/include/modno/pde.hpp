#pragma once

#include <string>
#include <vector>

#include "modno/grid.hpp"
#include "modno/matrix.hpp"

namespace modno {

// The ten periodic 1-D equations the benchmark covers. All are solved
// pseudo-spectrally: FFT derivatives, 2/3-rule dealiasing for quadratic
// terms, ETDRK4 for the stiff semilinear group and classical RK4 for the
// wave-type group and advection. Second-order-in-time equations start from
// zero initial velocity.
enum class Equation {
    wave,             // u_tt = u_xx
    klein_gordon,     // u_tt + m^2 c^4 u = c^2 u_xx
    sine_gordon,      // u_tt + c sin(u) = u_xx
    porous_media,     // u_t = (u^m)_xx, m in {2,3,4}
    parabolic,        // u_t = u_xx + 1
    viscous_burgers,  // u_t + (u^2/2)_x = nu u_xx
    burgers,          // u_t + (u^2/2)_x = 0
    kdv,              // u_t + delta^2 u_xxx + u u_x = 0
    cahn_hilliard,    // u_t = -eps^2 u_xxxx + 6 (u u_x)_x
    advection,        // u_t + u_x = 0
};

std::string equation_name(Equation eq);
Equation equation_from_string(const std::string& name);

struct PdeSpec {
    Equation equation = Equation::wave;
    double terminal_time = 1.0;

    double kg_mass = 0.1;         // m
    double kg_speed = 10.0;       // c
    double sg_coupling = 10.0;    // c
    int pm_degree = 2;            // m in {2,3,4}
    double vb_viscosity = 0.1;    // nu
    double kdv_dispersion = 0.022;  // delta
    double ch_interface = 0.01;   // eps

    // For space-time models: training query times are drawn from
    // [0, train_time_max]; non-positive means the full [0, terminal_time].
    double train_time_max = 0.0;

    double train_time_range() const {
        return train_time_max > 0.0 ? train_time_max : terminal_time;
    }
    // Domain length the equation was benchmarked on: 2, 2*pi, or 1.
    double default_domain_length() const;
    void validate() const;
};

// Integrates the equation from u0 and returns one row per requested save
// time (times must be nondecreasing and inside [0, T]). dt <= 0 picks a
// stability-heuristic step and halves it until two successive refinements
// agree to 1e-6 in relative L2 at the terminal time. Throws
// SolverDivergenceError when the state exceeds 1e6 in magnitude or turns
// non-finite.
Matrix solve_pde(const PdeSpec& spec, const std::vector<double>& u0, const Grid1D& grid,
                 const std::vector<double>& save_times, double dt = 0.0);

// The step size solve_pde's automatic mode would settle on for this input,
// exposed so shard builders can calibrate once and reuse the result.
double calibrate_dt(const PdeSpec& spec, const std::vector<double>& u0, const Grid1D& grid);

}  // namespace modno
