#pragma once

#include <complex>
#include <vector>

#include "modno/grid.hpp"

struct fftw_plan_s;

namespace modno {

// Real-to-complex FFT helper for one grid size. Spectra are stored in
// half-complex form (modes 0..N/2) and normalized so that coefficient 0 is
// the mean of the signal; to_physical inverts to_spectrum exactly up to
// rounding. Plans and scratch buffers are owned by the workspace, so a
// workspace is neither copyable nor thread-safe.
class SpectralWorkspace {
public:
    SpectralWorkspace(int n_points, double length);
    ~SpectralWorkspace();
    SpectralWorkspace(const SpectralWorkspace&) = delete;
    SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

    int n() const { return n_; }
    int modes() const { return n_ / 2 + 1; }
    double length() const { return length_; }

    // Angular wavenumber of mode m: k_m = 2*pi*m / L.
    double wavenumber(int m) const;

    void to_spectrum(const double* u, std::complex<double>* uhat);
    void to_physical(const std::complex<double>* uhat, double* u);

    std::vector<std::complex<double>> spectrum(const std::vector<double>& u);
    std::vector<double> physical(const std::vector<std::complex<double>>& uhat);

    // Zeroes every mode with index above n/3 (the 2/3 rule for quadratic
    // nonlinearities).
    void dealias(std::complex<double>* uhat) const;

    // Values of the trigonometric interpolant at the shifted points
    // x_j + shift, computed by phase rotation in spectral space.
    std::vector<double> sample_shifted(const std::vector<double>& u, double shift);

    // Trigonometric interpolant of a normalized spectrum at one point. The
    // Nyquist mode contributes through its cosine so the value is real and
    // matches grid samples at grid points.
    double eval_interpolant(const std::vector<std::complex<double>>& uhat, double x) const;

private:
    int n_;
    double length_;
    double* rbuf_;
    void* cbuf_;
    fftw_plan_s* fwd_;
    fftw_plan_s* inv_;
};

}  // namespace modno
