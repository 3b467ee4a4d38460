#include "modno/pde.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>

#include "modno/errors.hpp"
#include "modno/fourier.hpp"

namespace modno {

std::string equation_name(Equation eq) {
    switch (eq) {
        case Equation::wave: return "wave";
        case Equation::klein_gordon: return "klein_gordon";
        case Equation::sine_gordon: return "sine_gordon";
        case Equation::porous_media: return "porous_media";
        case Equation::parabolic: return "parabolic";
        case Equation::viscous_burgers: return "viscous_burgers";
        case Equation::burgers: return "burgers";
        case Equation::kdv: return "kdv";
        case Equation::cahn_hilliard: return "cahn_hilliard";
        case Equation::advection: return "advection";
    }
    throw ConfigError("pde: unknown equation");
}

Equation equation_from_string(const std::string& name) {
    if (name == "wave") return Equation::wave;
    if (name == "klein_gordon") return Equation::klein_gordon;
    if (name == "sine_gordon") return Equation::sine_gordon;
    if (name == "porous_media") return Equation::porous_media;
    if (name == "parabolic") return Equation::parabolic;
    if (name == "viscous_burgers") return Equation::viscous_burgers;
    if (name == "burgers") return Equation::burgers;
    if (name == "kdv") return Equation::kdv;
    if (name == "cahn_hilliard") return Equation::cahn_hilliard;
    if (name == "advection") return Equation::advection;
    throw ConfigError("pde: unknown equation name: " + name);
}

double PdeSpec::default_domain_length() const {
    switch (equation) {
        case Equation::wave:
        case Equation::klein_gordon:
        case Equation::sine_gordon:
        case Equation::porous_media:
            return 2.0;
        case Equation::parabolic:
        case Equation::viscous_burgers:
        case Equation::burgers:
            return 2.0 * M_PI;
        case Equation::kdv:
        case Equation::cahn_hilliard:
        case Equation::advection:
            return 1.0;
    }
    throw ConfigError("pde: unknown equation");
}

void PdeSpec::validate() const {
    if (!(terminal_time > 0.0) || !std::isfinite(terminal_time)) {
        throw ConfigError("pde: terminal time must be positive");
    }
    if (!(kg_mass > 0.0) || !(kg_speed > 0.0)) {
        throw ConfigError("pde: Klein-Gordon parameters must be positive");
    }
    if (!(sg_coupling > 0.0)) throw ConfigError("pde: sine-Gordon coupling must be positive");
    if (pm_degree < 2 || pm_degree > 4) {
        throw ConfigError("pde: porous-media degree must be 2, 3, or 4");
    }
    if (!(vb_viscosity > 0.0)) throw ConfigError("pde: viscosity must be positive");
    if (!(kdv_dispersion > 0.0)) throw ConfigError("pde: dispersion must be positive");
    if (!(ch_interface > 0.0)) throw ConfigError("pde: interface width must be positive");
    if (train_time_max < 0.0 || !std::isfinite(train_time_max)) {
        throw ConfigError("pde: training time range must be finite and non-negative");
    }
}

namespace {

using Cvec = std::vector<std::complex<double>>;

constexpr double kBlowupLimit = 1e6;
constexpr double kSelfConvergenceTol = 1e-6;

void check_physical(const std::vector<double>& u, const PdeSpec& spec, double t) {
    for (double v : u) {
        if (!std::isfinite(v) || std::abs(v) > kBlowupLimit) {
            throw SolverDivergenceError(equation_name(spec.equation), t,
                                        "solver diverged: " + equation_name(spec.equation) +
                                            " at t=" + std::to_string(t));
        }
    }
}

class IntegratorBase {
public:
    virtual ~IntegratorBase() = default;
    virtual void reset(const std::vector<double>& u0) = 0;
    virtual void advance(double t0, double t1, double dt) = 0;
    virtual std::vector<double> snapshot() = 0;
};

int step_count(double t0, double t1, double dt) {
    double span = t1 - t0;
    return std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12)));
}

// Advection: each mode evolves as uhat' = -ik uhat; one RK4 step multiplies
// the coefficient by the degree-4 Taylor polynomial of exp at z = -ik dt.
class AdvectionIntegrator final : public IntegratorBase {
public:
    AdvectionIntegrator(const PdeSpec& spec, const Grid1D& grid)
        : spec_(spec), ws_(grid.n_points, grid.length) {}

    void reset(const std::vector<double>& u0) override { state_ = ws_.spectrum(u0); }

    void advance(double t0, double t1, double dt) override {
        if (t1 - t0 <= 0.0) return;
        int steps = step_count(t0, t1, dt);
        double h = (t1 - t0) / steps;
        Cvec growth(state_.size());
        for (int m = 0; m < ws_.modes(); ++m) {
            std::complex<double> z(0.0, -ws_.wavenumber(m) * h);
            growth[static_cast<std::size_t>(m)] =
                1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
        }
        for (int s = 0; s < steps; ++s) {
            for (std::size_t m = 0; m < state_.size(); ++m) state_[m] *= growth[m];
        }
    }

    std::vector<double> snapshot() override { return ws_.physical(state_); }

private:
    PdeSpec spec_;
    SpectralWorkspace ws_;
    Cvec state_;
};

// Wave and Klein-Gordon: per mode the pair (uhat, vhat) obeys u' = v,
// v' = -omega^2 u, and the RK4 step is the closed-form 2x2 polynomial map
// derived from N^2 = -omega^2 I.
class OscillatorIntegrator final : public IntegratorBase {
public:
    OscillatorIntegrator(const PdeSpec& spec, const Grid1D& grid)
        : spec_(spec), ws_(grid.n_points, grid.length) {
        omega2_.resize(static_cast<std::size_t>(ws_.modes()));
        for (int m = 0; m < ws_.modes(); ++m) {
            double k = ws_.wavenumber(m);
            double w2 = k * k;
            if (spec.equation == Equation::klein_gordon) {
                double c2 = spec.kg_speed * spec.kg_speed;
                w2 = spec.kg_mass * spec.kg_mass * c2 * c2 + c2 * k * k;
            }
            omega2_[static_cast<std::size_t>(m)] = w2;
        }
    }

    void reset(const std::vector<double>& u0) override {
        u_ = ws_.spectrum(u0);
        v_.assign(u_.size(), 0.0);
    }

    void advance(double t0, double t1, double dt) override {
        if (t1 - t0 <= 0.0) return;
        int steps = step_count(t0, t1, dt);
        double h = (t1 - t0) / steps;
        std::vector<double> a(u_.size()), b(u_.size());
        for (std::size_t m = 0; m < u_.size(); ++m) {
            double s2 = omega2_[m] * h * h;
            a[m] = 1.0 - s2 / 2.0 + s2 * s2 / 24.0;
            b[m] = h * (1.0 - s2 / 6.0);
        }
        for (int s = 0; s < steps; ++s) {
            for (std::size_t m = 0; m < u_.size(); ++m) {
                std::complex<double> un = a[m] * u_[m] + b[m] * v_[m];
                std::complex<double> vn = -omega2_[m] * b[m] * u_[m] + a[m] * v_[m];
                u_[m] = un;
                v_[m] = vn;
            }
        }
    }

    std::vector<double> snapshot() override { return ws_.physical(u_); }

private:
    PdeSpec spec_;
    SpectralWorkspace ws_;
    std::vector<double> omega2_;
    Cvec u_, v_;
};

// Sine-Gordon: classical RK4 on (u, u_t) in physical space with the
// second derivative computed spectrally each stage.
class SineGordonIntegrator final : public IntegratorBase {
public:
    SineGordonIntegrator(const PdeSpec& spec, const Grid1D& grid)
        : spec_(spec), ws_(grid.n_points, grid.length) {}

    void reset(const std::vector<double>& u0) override {
        u_ = u0;
        v_.assign(u0.size(), 0.0);
    }

    void advance(double t0, double t1, double dt) override {
        if (t1 - t0 <= 0.0) return;
        int steps = step_count(t0, t1, dt);
        double h = (t1 - t0) / steps;
        std::size_t n = u_.size();
        std::vector<double> k1u(n), k1v(n), k2u(n), k2v(n), k3u(n), k3v(n), k4u(n), k4v(n);
        std::vector<double> tu(n), tv(n);
        for (int s = 0; s < steps; ++s) {
            rhs(u_, v_, k1u, k1v);
            stage(u_, v_, k1u, k1v, 0.5 * h, tu, tv);
            rhs(tu, tv, k2u, k2v);
            stage(u_, v_, k2u, k2v, 0.5 * h, tu, tv);
            rhs(tu, tv, k3u, k3v);
            stage(u_, v_, k3u, k3v, h, tu, tv);
            rhs(tu, tv, k4u, k4v);
            for (std::size_t j = 0; j < n; ++j) {
                u_[j] += h / 6.0 * (k1u[j] + 2.0 * k2u[j] + 2.0 * k3u[j] + k4u[j]);
                v_[j] += h / 6.0 * (k1v[j] + 2.0 * k2v[j] + 2.0 * k3v[j] + k4v[j]);
            }
            if ((s & 31) == 31) check_physical(u_, spec_, t0 + (s + 1) * h);
        }
    }

    std::vector<double> snapshot() override { return u_; }

private:
    void rhs(const std::vector<double>& u, const std::vector<double>& v,
             std::vector<double>& du, std::vector<double>& dv) {
        Cvec uhat = ws_.spectrum(u);
        for (int m = 0; m < ws_.modes(); ++m) {
            double k = ws_.wavenumber(m);
            uhat[static_cast<std::size_t>(m)] *= -k * k;
        }
        std::vector<double> uxx = ws_.physical(uhat);
        for (std::size_t j = 0; j < u.size(); ++j) {
            du[j] = v[j];
            dv[j] = uxx[j] - spec_.sg_coupling * std::sin(u[j]);
        }
    }

    static void stage(const std::vector<double>& u, const std::vector<double>& v,
                      const std::vector<double>& ku, const std::vector<double>& kv,
                      double w, std::vector<double>& tu, std::vector<double>& tv) {
        for (std::size_t j = 0; j < u.size(); ++j) {
            tu[j] = u[j] + w * ku[j];
            tv[j] = v[j] + w * kv[j];
        }
    }

    PdeSpec spec_;
    SpectralWorkspace ws_;
    std::vector<double> u_, v_;
};

// Stiff semilinear group: uhat' = L uhat + N(uhat) advanced with the
// fourth-order exponential time-differencing scheme of Cox and Matthews,
// with the phi-function coefficients evaluated by the Kassam-Trefethen
// contour average over 64 points so they stay accurate for L near zero.
class Etdrk4Integrator final : public IntegratorBase {
public:
    Etdrk4Integrator(const PdeSpec& spec, const Grid1D& grid)
        : spec_(spec), ws_(grid.n_points, grid.length) {}

    void reset(const std::vector<double>& u0) override {
        state_ = ws_.spectrum(u0);
        std::size_t n = state_.size();
        if (spec_.equation == Equation::porous_media ||
            spec_.equation == Equation::cahn_hilliard) {
            double lo = *std::min_element(u0.begin(), u0.end());
            double hi = *std::max_element(u0.begin(), u0.end());
            lo = std::max(lo, 0.0);
            // Midpoint of the initial nonlinear diffusivity range (m u^{m-1}
            // for porous media, 6u for the quadratic flux) moves into the
            // exactly-integrated linear part, leaving only the deviation to
            // the explicit stages.
            if (spec_.equation == Equation::porous_media) {
                int p = spec_.pm_degree;
                split_diffusivity_ = 0.5 * p * (std::pow(hi, p - 1) + std::pow(lo, p - 1));
            } else {
                split_diffusivity_ = 3.0 * (hi + lo);
            }
            if (!(split_diffusivity_ > 0.0)) {
                throw ConfigError("pde: " + equation_name(spec_.equation) +
                                  " initial data must be positive somewhere");
            }
        }
        linear_.assign(n, 0.0);
        for (int m = 0; m < ws_.modes(); ++m) {
            double k = ws_.wavenumber(m);
            std::size_t mi = static_cast<std::size_t>(m);
            switch (spec_.equation) {
                case Equation::parabolic: linear_[mi] = -k * k; break;
                case Equation::viscous_burgers: linear_[mi] = -spec_.vb_viscosity * k * k; break;
                case Equation::burgers: linear_[mi] = 0.0; break;
                case Equation::kdv:
                    linear_[mi] = std::complex<double>(
                        0.0, spec_.kdv_dispersion * spec_.kdv_dispersion * k * k * k);
                    break;
                case Equation::cahn_hilliard:
                    linear_[mi] = -spec_.ch_interface * spec_.ch_interface * k * k * k * k -
                                  split_diffusivity_ * k * k;
                    break;
                case Equation::porous_media: linear_[mi] = -split_diffusivity_ * k * k; break;
                default: throw ConfigError("pde: equation not handled by the ETD integrator");
            }
        }
        h_cached_ = -1.0;
        nv_.resize(n); na_.resize(n); nb_.resize(n); nc_.resize(n);
        sa_.resize(n); sb_.resize(n); sc_.resize(n);
    }

    void advance(double t0, double t1, double dt) override {
        if (t1 - t0 <= 0.0) return;
        int steps = step_count(t0, t1, dt);
        double h = (t1 - t0) / steps;
        if (h != h_cached_) compute_coefficients(h);
        std::size_t n = state_.size();
        for (int s = 0; s < steps; ++s) {
            nonlinear(state_, nv_);
            for (std::size_t m = 0; m < n; ++m) sa_[m] = e2_[m] * state_[m] + q_[m] * nv_[m];
            nonlinear(sa_, na_);
            for (std::size_t m = 0; m < n; ++m) sb_[m] = e2_[m] * state_[m] + q_[m] * na_[m];
            nonlinear(sb_, nb_);
            for (std::size_t m = 0; m < n; ++m) {
                sc_[m] = e2_[m] * sa_[m] + q_[m] * (2.0 * nb_[m] - nv_[m]);
            }
            nonlinear(sc_, nc_);
            for (std::size_t m = 0; m < n; ++m) {
                state_[m] = e_[m] * state_[m] + f1_[m] * nv_[m] +
                            2.0 * f2_[m] * (na_[m] + nb_[m]) + f3_[m] * nc_[m];
            }
            if ((s & 31) == 31) check_bound(t0 + (s + 1) * h);
        }
    }

    std::vector<double> snapshot() override { return ws_.physical(state_); }

private:
    void check_bound(double t) {
        double amp = 0.0;
        for (const auto& c : state_) {
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
                throw SolverDivergenceError(equation_name(spec_.equation), t,
                                            "solver diverged: " + equation_name(spec_.equation) +
                                                " at t=" + std::to_string(t));
            }
            amp += std::abs(c);
        }
        // 2*sum|uhat_m| bounds max|u|; only materialize when it trips.
        if (2.0 * amp > kBlowupLimit) check_physical(ws_.physical(state_), spec_, t);
    }

    void nonlinear(const Cvec& v, Cvec& out) {
        std::size_t n = v.size();
        if (spec_.equation == Equation::parabolic) {
            std::fill(out.begin(), out.end(), std::complex<double>(0.0));
            out[0] = 1.0;
            return;
        }
        work_ = v;
        ws_.dealias(work_.data());
        std::vector<double> w = ws_.physical(work_);
        if (spec_.equation == Equation::porous_media) {
            for (double& x : w) x = std::pow(x, spec_.pm_degree);
        } else {
            for (double& x : w) x = x * x;
        }
        ws_.to_spectrum(w.data(), out.data());
        for (int m = 0; m < ws_.modes(); ++m) {
            double k = ws_.wavenumber(m);
            std::size_t mi = static_cast<std::size_t>(m);
            switch (spec_.equation) {
                case Equation::viscous_burgers:
                case Equation::burgers:
                case Equation::kdv:
                    out[mi] *= std::complex<double>(0.0, -0.5 * k);
                    break;
                case Equation::cahn_hilliard:
                    out[mi] = -3.0 * k * k * out[mi] + split_diffusivity_ * k * k * v[mi];
                    break;
                case Equation::porous_media:
                    out[mi] = -k * k * out[mi] + split_diffusivity_ * k * k * v[mi];
                    break;
                default: break;
            }
        }
        ws_.dealias(out.data());
        (void)n;
    }

    void compute_coefficients(double h) {
        constexpr int kContourPoints = 64;
        std::size_t n = linear_.size();
        e_.resize(n); e2_.resize(n); q_.resize(n); f1_.resize(n); f2_.resize(n); f3_.resize(n);
        for (std::size_t m = 0; m < n; ++m) {
            std::complex<double> z = h * linear_[m];
            e_[m] = std::exp(z);
            e2_[m] = std::exp(0.5 * z);
            std::complex<double> q = 0.0, a = 0.0, b = 0.0, c = 0.0;
            for (int s = 0; s < kContourPoints; ++s) {
                double angle = 2.0 * M_PI * (s + 0.5) / kContourPoints;
                std::complex<double> zeta = z + std::polar(1.0, angle);
                std::complex<double> ez = std::exp(zeta);
                std::complex<double> z2 = zeta * zeta;
                std::complex<double> z3 = z2 * zeta;
                q += (std::exp(0.5 * zeta) - 1.0) / zeta;
                a += (-4.0 - zeta + ez * (4.0 - 3.0 * zeta + z2)) / z3;
                b += (2.0 + zeta + ez * (-2.0 + zeta)) / z3;
                c += (-4.0 - 3.0 * zeta - z2 + ez * (4.0 - zeta)) / z3;
            }
            double inv = h / kContourPoints;
            q_[m] = q * inv;
            f1_[m] = a * inv;
            f2_[m] = b * inv;
            f3_[m] = c * inv;
        }
        h_cached_ = h;
    }

    PdeSpec spec_;
    SpectralWorkspace ws_;
    double split_diffusivity_ = 0.0;
    Cvec linear_, state_;
    Cvec e_, e2_, q_, f1_, f2_, f3_;
    Cvec nv_, na_, nb_, nc_, sa_, sb_, sc_, work_;
    double h_cached_ = -1.0;
};

std::unique_ptr<IntegratorBase> make_integrator(const PdeSpec& spec, const Grid1D& grid) {
    switch (spec.equation) {
        case Equation::advection:
            return std::make_unique<AdvectionIntegrator>(spec, grid);
        case Equation::wave:
        case Equation::klein_gordon:
            return std::make_unique<OscillatorIntegrator>(spec, grid);
        case Equation::sine_gordon:
            return std::make_unique<SineGordonIntegrator>(spec, grid);
        default:
            return std::make_unique<Etdrk4Integrator>(spec, grid);
    }
}

double occupied_max_wavenumber(SpectralWorkspace& ws, const std::vector<double>& u0) {
    Cvec uhat = ws.spectrum(u0);
    double peak = 0.0;
    for (const auto& c : uhat) peak = std::max(peak, std::abs(c));
    double k_occ = 0.0;
    for (int m = 0; m < ws.modes(); ++m) {
        if (std::abs(uhat[static_cast<std::size_t>(m)]) > 1e-12 * peak) {
            k_occ = std::max(k_occ, ws.wavenumber(m));
        }
    }
    return std::max(k_occ, ws.wavenumber(1));
}

double heuristic_dt(const PdeSpec& spec, const std::vector<double>& u0, const Grid1D& grid) {
    double T = spec.terminal_time;
    double dx = grid.spacing();
    double umax = 0.0;
    for (double v : u0) umax = std::max(umax, std::abs(v));
    double dt = T / 16.0;
    switch (spec.equation) {
        case Equation::advection:
        case Equation::wave: {
            SpectralWorkspace ws(grid.n_points, grid.length);
            dt = 0.25 / occupied_max_wavenumber(ws, u0);
            break;
        }
        case Equation::klein_gordon: {
            SpectralWorkspace ws(grid.n_points, grid.length);
            double k = occupied_max_wavenumber(ws, u0);
            double c2 = spec.kg_speed * spec.kg_speed;
            double omega = std::sqrt(spec.kg_mass * spec.kg_mass * c2 * c2 + c2 * k * k);
            dt = 0.25 / omega;
            break;
        }
        case Equation::sine_gordon:
            dt = std::min(0.5 * dx, 0.1 / std::sqrt(spec.sg_coupling));
            break;
        case Equation::parabolic:
            dt = T / 16.0;
            break;
        case Equation::viscous_burgers:
        case Equation::burgers:
            dt = std::min(T / 64.0, 0.25 * dx / std::max(1.0, umax));
            break;
        case Equation::kdv:
            dt = std::min(T / 1024.0, 0.25 * dx / std::max(1.0, umax));
            break;
        case Equation::cahn_hilliard:
            dt = T / 256.0;
            break;
        case Equation::porous_media:
            dt = T / 64.0;
            break;
    }
    return std::min(dt, T);
}

std::vector<double> terminal_state(IntegratorBase& integ, const PdeSpec& spec,
                                   const std::vector<double>& u0, double dt) {
    integ.reset(u0);
    integ.advance(0.0, spec.terminal_time, dt);
    std::vector<double> u = integ.snapshot();
    check_physical(u, spec, spec.terminal_time);
    return u;
}

double relative_change(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double d = a[j] - b[j];
        num += d * d;
        den += b[j] * b[j];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

void validate_inputs(const PdeSpec& spec, const std::vector<double>& u0, const Grid1D& grid) {
    spec.validate();
    grid.check_consistent();
    if (static_cast<int>(u0.size()) != grid.n_points) {
        throw ShapeError("pde: initial data size does not match the grid");
    }
    for (double v : u0) {
        if (!std::isfinite(v)) throw ConfigError("pde: initial data must be finite");
    }
}

}  // namespace

double calibrate_dt(const PdeSpec& spec, const std::vector<double>& u0, const Grid1D& grid) {
    validate_inputs(spec, u0, grid);
    std::unique_ptr<IntegratorBase> integ = make_integrator(spec, grid);
    double dt = heuristic_dt(spec, u0, grid);
    // A coarse trial step can blow up on its own even when the equation is
    // fine; treat that the same as disagreement and keep halving.
    bool have_prev = false;
    std::vector<double> prev;
    for (int iter = 0; iter < 24; ++iter) {
        std::vector<double> cur;
        try {
            cur = terminal_state(*integ, spec, u0, dt);
        } catch (const SolverDivergenceError&) {
            have_prev = false;
            dt *= 0.5;
            continue;
        }
        if (have_prev && relative_change(prev, cur) < kSelfConvergenceTol) return dt;
        prev = std::move(cur);
        have_prev = true;
        dt *= 0.5;
    }
    throw Error("pde: time step failed to self-converge for " + equation_name(spec.equation));
}

Matrix solve_pde(const PdeSpec& spec, const std::vector<double>& u0, const Grid1D& grid,
                 const std::vector<double>& save_times, double dt) {
    validate_inputs(spec, u0, grid);
    if (save_times.empty()) throw ConfigError("pde: need at least one save time");
    for (std::size_t i = 0; i < save_times.size(); ++i) {
        double s = save_times[i];
        if (!(s >= -1e-12) || !(s <= spec.terminal_time + 1e-9)) {
            throw ConfigError("pde: save time outside [0, T]");
        }
        if (i > 0 && s < save_times[i - 1]) {
            throw ConfigError("pde: save times must be nondecreasing");
        }
    }
    if (dt <= 0.0) dt = calibrate_dt(spec, u0, grid);

    std::unique_ptr<IntegratorBase> integ = make_integrator(spec, grid);
    integ->reset(u0);
    Matrix out(static_cast<int>(save_times.size()), grid.n_points);
    double t = 0.0;
    for (std::size_t i = 0; i < save_times.size(); ++i) {
        integ->advance(t, save_times[i], dt);
        t = save_times[i];
        std::vector<double> u = integ->snapshot();
        check_physical(u, spec, t);
        for (int j = 0; j < grid.n_points; ++j) {
            out(static_cast<int>(i), j) = u[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

}  // namespace modno
