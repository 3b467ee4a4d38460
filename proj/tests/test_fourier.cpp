#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "modno/errors.hpp"
#include "modno/fourier.hpp"
#include "modno/grid.hpp"
#include "modno/rng.hpp"

using namespace modno;

TEST_CASE("grid: invariants and point layout") {
    Grid1D g{2.0, 8};
    g.check_consistent();
    CHECK(g.point(0) == 0.0);
    CHECK(g.point(4) == doctest::Approx(1.0));
    CHECK(g.spacing() == doctest::Approx(0.25));
    std::vector<double> x = g.points();
    REQUIRE(x.size() == 8);
    for (std::size_t j = 1; j < x.size(); ++j) CHECK(x[j] > x[j - 1]);
    CHECK(x.back() < g.length);

    CHECK_THROWS_AS((Grid1D{2.0, 6}.check_consistent()), ConfigError);
    CHECK_THROWS_AS((Grid1D{2.0, 9}.check_consistent()), ConfigError);
    CHECK_THROWS_AS((Grid1D{-1.0, 16}.check_consistent()), ConfigError);
}

TEST_CASE("spectral: round trip reproduces the signal") {
    Grid1D g{3.0, 64};
    SpectralWorkspace ws(g.n_points, g.length);
    Rng rng(7);
    std::vector<double> u(64);
    for (double& v : u) v = rng.uniform(-2.0, 2.0);
    std::vector<double> back = ws.physical(ws.spectrum(u));
    for (int j = 0; j < 64; ++j) CHECK(back[j] == doctest::Approx(u[j]).epsilon(1e-12));
}

TEST_CASE("spectral: mode zero is the mean and pure modes land in one bin") {
    Grid1D g{2.0, 32};
    SpectralWorkspace ws(g.n_points, g.length);
    std::vector<double> u(32);
    for (int j = 0; j < 32; ++j) u[j] = 1.5 + std::cos(2.0 * M_PI * 3.0 * g.point(j) / g.length);
    auto uhat = ws.spectrum(u);
    CHECK(uhat[0].real() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(uhat[3].real() == doctest::Approx(0.5).epsilon(1e-12));
    for (int m = 1; m < ws.modes(); ++m) {
        if (m != 3) CHECK(std::abs(uhat[static_cast<std::size_t>(m)]) < 1e-12);
    }
    CHECK(ws.wavenumber(1) == doctest::Approx(M_PI));
}

TEST_CASE("spectral: dealias zeroes everything above a third of the grid") {
    SpectralWorkspace ws(24, 1.0);
    std::vector<std::complex<double>> uhat(static_cast<std::size_t>(ws.modes()),
                                           std::complex<double>(1.0, 1.0));
    ws.dealias(uhat.data());
    for (int m = 0; m <= 8; ++m) CHECK(uhat[static_cast<std::size_t>(m)] != 0.0);
    for (int m = 9; m < ws.modes(); ++m) CHECK(uhat[static_cast<std::size_t>(m)] == 0.0);
}

TEST_CASE("spectral: interpolant reproduces grid values at grid points") {
    Grid1D g{2.0 * M_PI, 48};
    SpectralWorkspace ws(g.n_points, g.length);
    Rng rng(19);
    std::vector<double> u(48);
    for (double& v : u) v = rng.uniform(-1.0, 1.0);
    auto uhat = ws.spectrum(u);
    for (int j = 0; j < 48; ++j) {
        CHECK(std::abs(ws.eval_interpolant(uhat, g.point(j)) - u[j]) < 1e-10);
    }
}

TEST_CASE("spectral: half-cell shift matches analytic translation of a sine") {
    Grid1D g{1.0, 64};
    SpectralWorkspace ws(g.n_points, g.length);
    std::vector<double> u(64);
    for (int j = 0; j < 64; ++j) u[j] = std::sin(2.0 * M_PI * 2.0 * g.point(j));
    double shift = 0.5 * g.spacing();
    std::vector<double> shifted = ws.sample_shifted(u, shift);
    for (int j = 0; j < 64; ++j) {
        double expect = std::sin(2.0 * M_PI * 2.0 * (g.point(j) + shift));
        CHECK(std::abs(shifted[j] - expect) < 1e-12);
    }
}

TEST_CASE("spectral: shift by a full cell equals index rotation") {
    Grid1D g{2.0, 32};
    SpectralWorkspace ws(g.n_points, g.length);
    Rng rng(5);
    std::vector<double> u(32);
    for (double& v : u) v = rng.uniform(-1.0, 1.0);
    std::vector<double> shifted = ws.sample_shifted(u, g.spacing());
    for (int j = 0; j < 32; ++j) {
        CHECK(shifted[j] == doctest::Approx(u[static_cast<std::size_t>((j + 1) % 32)])
                                .epsilon(1e-10));
    }
}

TEST_CASE("spectral: size mismatches and bad construction are rejected") {
    SpectralWorkspace ws(16, 1.0);
    CHECK_THROWS_AS(ws.spectrum(std::vector<double>(15)), ShapeError);
    CHECK_THROWS_AS(ws.physical(std::vector<std::complex<double>>(4)), ShapeError);
    CHECK_THROWS_AS(SpectralWorkspace(7, 1.0), ConfigError);
    CHECK_THROWS_AS(SpectralWorkspace(16, 0.0), ConfigError);
}
