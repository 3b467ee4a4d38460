#include "modno/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>

namespace modno {

SpectralWorkspace::SpectralWorkspace(int n_points, double length)
    : n_(n_points), length_(length) {
    if (!(length > 0.0)) throw ConfigError("spectral: length must be positive");
    if (n_points < 8 || n_points % 2 != 0) {
        throw ConfigError("spectral: point count must be even and at least 8");
    }
    rbuf_ = fftw_alloc_real(static_cast<std::size_t>(n_));
    cbuf_ = fftw_alloc_complex(static_cast<std::size_t>(modes()));
    if (rbuf_ == nullptr || cbuf_ == nullptr) {
        throw ConfigError("spectral: allocation failed");
    }
    fwd_ = fftw_plan_dft_r2c_1d(n_, rbuf_, static_cast<fftw_complex*>(cbuf_),
                                FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(n_, static_cast<fftw_complex*>(cbuf_), rbuf_,
                                FFTW_ESTIMATE);
}

SpectralWorkspace::~SpectralWorkspace() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(rbuf_);
    fftw_free(cbuf_);
}

double SpectralWorkspace::wavenumber(int m) const {
    return 2.0 * M_PI * m / length_;
}

void SpectralWorkspace::to_spectrum(const double* u, std::complex<double>* uhat) {
    std::memcpy(rbuf_, u, static_cast<std::size_t>(n_) * sizeof(double));
    fftw_execute(fwd_);
    const auto* c = static_cast<const fftw_complex*>(cbuf_);
    const double scale = 1.0 / n_;
    for (int m = 0; m < modes(); ++m) {
        uhat[m] = std::complex<double>(c[m][0] * scale, c[m][1] * scale);
    }
}

void SpectralWorkspace::to_physical(const std::complex<double>* uhat, double* u) {
    auto* c = static_cast<fftw_complex*>(cbuf_);
    for (int m = 0; m < modes(); ++m) {
        c[m][0] = uhat[m].real();
        c[m][1] = uhat[m].imag();
    }
    fftw_execute(inv_);
    std::memcpy(u, rbuf_, static_cast<std::size_t>(n_) * sizeof(double));
}

std::vector<std::complex<double>> SpectralWorkspace::spectrum(const std::vector<double>& u) {
    if (static_cast<int>(u.size()) != n_) throw ShapeError("spectral: size mismatch");
    std::vector<std::complex<double>> uhat(static_cast<std::size_t>(modes()));
    to_spectrum(u.data(), uhat.data());
    return uhat;
}

std::vector<double> SpectralWorkspace::physical(const std::vector<std::complex<double>>& uhat) {
    if (static_cast<int>(uhat.size()) != modes()) throw ShapeError("spectral: size mismatch");
    std::vector<double> u(static_cast<std::size_t>(n_));
    to_physical(uhat.data(), u.data());
    return u;
}

void SpectralWorkspace::dealias(std::complex<double>* uhat) const {
    for (int m = n_ / 3 + 1; m < modes(); ++m) uhat[m] = 0.0;
}

std::vector<double> SpectralWorkspace::sample_shifted(const std::vector<double>& u,
                                                      double shift) {
    std::vector<std::complex<double>> uhat = spectrum(u);
    for (int m = 0; m + 1 < modes(); ++m) {
        double phase = wavenumber(m) * shift;
        uhat[static_cast<std::size_t>(m)] *=
            std::complex<double>(std::cos(phase), std::sin(phase));
    }
    // The Nyquist coefficient must stay real for a real inverse transform;
    // its shifted contribution is a_{N/2} cos(k_{N/2} shift) at every point.
    int ny = modes() - 1;
    double phase = wavenumber(ny) * shift;
    uhat[static_cast<std::size_t>(ny)] =
        uhat[static_cast<std::size_t>(ny)].real() * std::cos(phase);
    return physical(uhat);
}

double SpectralWorkspace::eval_interpolant(const std::vector<std::complex<double>>& uhat,
                                           double x) const {
    if (static_cast<int>(uhat.size()) != modes()) throw ShapeError("spectral: size mismatch");
    double value = uhat[0].real();
    for (int m = 1; m + 1 < modes(); ++m) {
        double phase = wavenumber(m) * x;
        const std::complex<double>& c = uhat[static_cast<std::size_t>(m)];
        value += 2.0 * (c.real() * std::cos(phase) - c.imag() * std::sin(phase));
    }
    int ny = modes() - 1;
    value += uhat[static_cast<std::size_t>(ny)].real() * std::cos(wavenumber(ny) * x);
    return value;
}

}  // namespace modno
