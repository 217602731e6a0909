#pragma once

// State simulation: shifted two-factor Gaussian short rate fitted to the
// initial curve, square-root default intensity, and Cox default times.

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccsa/curve.hpp"
#include "ccsa/parallel.hpp"
#include "ccsa/rng.hpp"

namespace ccsa {

/// Rows are time steps, columns are paths: a row is one cross-section.
using StepPathMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct TimeGrid {
    int n_steps = 0;
    double dt = 0.0;

    double time(int step) const noexcept { return step * dt; }
    double horizon() const noexcept { return n_steps * dt; }

    /// Uniform grid over [0, maturity] with steps_per_year steps per year.
    static TimeGrid uniform(double maturity, int steps_per_year) {
        if (!(maturity > 0.0) || steps_per_year <= 0) throw ModelError("grid needs positive maturity and step count");
        const long n = std::lround(maturity * steps_per_year);
        if (n <= 0) throw ModelError("grid has no steps");
        return {static_cast<int>(n), maturity / static_cast<double>(n)};
    }

    /// Grid index of time t; throws when t is not on the grid.
    int step_of(double t) const {
        const double x = t / dt;
        const long i = std::lround(x);
        if (std::abs(x - static_cast<double>(i)) > 1e-6 || i < 0 || i > n_steps)
            throw ModelError("time " + std::to_string(t) + " is not a grid point");
        return static_cast<int>(i);
    }
};

struct G2Params {
    double mu = 0.0;     // mean reversion of y
    double nu = 0.0;     // mean reversion of z
    double sigma = 0.0;  // vol of y
    double eta = 0.0;    // vol of z
    double rho = 0.0;    // correlation of the y and z shocks

    void validate() const {
        if (!(mu >= 0.0 && nu >= 0.0 && sigma >= 0.0 && eta >= 0.0))
            throw ModelError("G2++ speeds and vols must be non-negative");
        if (!(std::abs(rho) <= 1.0)) throw ModelError("G2++ correlation must lie in [-1, 1]");
    }
};

/// Cap-calibrated G2++ parameters at 2012-06-15.
inline G2Params reference_g2_params() { return {0.00013, 0.06730, 0.12924, 0.14014, -0.99948}; }

/// Historical daily EURIBOR6m volatility; optional replacement for sigma.
inline constexpr double kHistoricalEuriborVol = 0.12654;

struct CIRParams {
    double kappa = 0.0;
    double gamma = 0.0;
    double upsilon = 0.0;
    double lambda0 = 0.0;

    void validate() const {
        if (!(kappa >= 0.0 && gamma >= 0.0 && upsilon >= 0.0)) throw ModelError("CIR parameters must be non-negative");
        if (!(lambda0 >= 0.0)) throw ModelError("CIR initial intensity must be non-negative");
    }
    bool feller() const noexcept { return 2.0 * kappa * gamma >= upsilon * upsilon; }
    /// E[lambda(t)].
    double mean(double t) const noexcept { return gamma + (lambda0 - gamma) * std::exp(-kappa * t); }
};

/// Intensity calibrated to Deutsche Bank senior CDS.
inline CIRParams cir_low() { return {1.03921, 0.02120, 0.20122, 0.04031}; }
/// Intensity calibrated to Dexia subordinated CDS.
inline CIRParams cir_high() { return {0.30821, 0.11220, 0.44214, 0.20316}; }

namespace detail {

// (1 - e^{-a tau}) / a, with the a -> 0 limit.
inline double b_factor(double a, double tau) noexcept { return a == 0.0 ? tau : -std::expm1(-a * tau) / a; }

// Integral over [0, tau] of B_a(s) B_b(s) ds.
inline double int_bb(double a, double b, double tau) noexcept {
    if (a == 0.0 && b == 0.0) return tau * tau * tau / 3.0;
    if (a == 0.0 || b == 0.0) {
        const double c = a == 0.0 ? b : a;
        const double int_s_exp = (1.0 - std::exp(-c * tau) * (1.0 + c * tau)) / (c * c);
        return (0.5 * tau * tau - int_s_exp) / c;
    }
    return ((tau - b_factor(a, tau)) - (b_factor(b, tau) - b_factor(a + b, tau))) / (a * b);
}

}  // namespace detail

/// G2++ closed forms over an initial curve.
class G2Model {
public:
    G2Model(G2Params params, YieldCurve curve) : p_(params), curve_(std::move(curve)) { p_.validate(); }

    const G2Params& params() const noexcept { return p_; }
    const YieldCurve& curve() const noexcept { return curve_; }

    /// Variance of the integral of (y + z) over an interval of length tau.
    double integrated_variance(double tau) const noexcept {
        using detail::int_bb;
        return p_.sigma * p_.sigma * int_bb(p_.mu, p_.mu, tau) + p_.eta * p_.eta * int_bb(p_.nu, p_.nu, tau) +
               2.0 * p_.rho * p_.sigma * p_.eta * int_bb(p_.mu, p_.nu, tau);
    }

    /// Deterministic shift fitting the initial curve.
    double phi(double t) const {
        const double bm = detail::b_factor(p_.mu, t);
        const double bn = detail::b_factor(p_.nu, t);
        return curve_.instantaneous_forward(t) + 0.5 * p_.sigma * p_.sigma * bm * bm +
               0.5 * p_.eta * p_.eta * bn * bn + p_.rho * p_.sigma * p_.eta * bm * bn;
    }

    /// Integral of phi over [0, t], in closed form.
    double integrated_phi(double t) const { return -std::log(curve_.discount_factor(t)) + 0.5 * integrated_variance(t); }

    /// Zero-coupon bond P(t, T) given the factor values at t.
    double bond_price(double t, double maturity, double y, double z) const {
        if (maturity < t) throw ModelError("bond maturity before valuation time");
        const double tau = maturity - t;
        const double a = 0.5 * (integrated_variance(tau) - integrated_variance(maturity) + integrated_variance(t));
        return curve_.discount_factor(maturity) / curve_.discount_factor(t) *
               std::exp(a - detail::b_factor(p_.mu, tau) * y - detail::b_factor(p_.nu, tau) * z);
    }

private:
    G2Params p_;
    YieldCurve curve_;
};

/// Shift phi sampled at every grid time.
inline std::vector<double> fit_phi(const G2Params& params, const YieldCurve& curve, const TimeGrid& grid) {
    if (grid.horizon() > curve.max_time() * (1.0 + 1e-12)) throw ModelError("curve does not cover the grid horizon");
    const G2Model model(params, curve);
    std::vector<double> phi(static_cast<std::size_t>(grid.n_steps) + 1);
    for (int i = 0; i <= grid.n_steps; ++i) phi[static_cast<std::size_t>(i)] = model.phi(grid.time(i));
    return phi;
}

struct SimulationOptions {
    double rho_rate_intensity = 0.0;  // correlation of the intensity shock with the y shock
    bool literal_z_drift = false;     // dz = -nu * y dt + eta dW (Euler) instead of -nu * z
    unsigned threads = 0;             // 0: hardware concurrency
};

struct G2Factors {
    StepPathMatrix y;
    StepPathMatrix z;
    StepPathMatrix short_rate;
    StepPathMatrix integrated_rate;  // integral of r over [0, t_i]
};

namespace detail {

struct OuStep {
    double decay_y, decay_z;
    double l00, l10, l11;  // Cholesky factor of the exact shock covariance
};

inline OuStep ou_step(const G2Params& p, double dt) {
    const double vy = p.sigma * p.sigma * b_factor(2.0 * p.mu, dt);
    const double vz = p.eta * p.eta * b_factor(2.0 * p.nu, dt);
    const double cyz = p.rho * p.sigma * p.eta * b_factor(p.mu + p.nu, dt);
    OuStep s{std::exp(-p.mu * dt), std::exp(-p.nu * dt), std::sqrt(vy), 0.0, 0.0};
    s.l10 = s.l00 > 0.0 ? cyz / s.l00 : 0.0;
    s.l11 = std::sqrt(std::max(0.0, vz - s.l10 * s.l10));
    return s;
}

}  // namespace detail

/// Exact OU transitions for (y, z) with correlated shocks; y0 = z0 = 0.
inline G2Factors simulate_g2pp(const G2Model& model, const std::vector<double>& phi, const TimeGrid& grid,
                               std::size_t n_paths, std::uint64_t seed, const SimulationOptions& opts = {}) {
    if (n_paths == 0) throw ModelError("need at least one path");
    if (phi.size() != static_cast<std::size_t>(grid.n_steps) + 1) throw ModelError("phi does not match the grid");
    const auto& p = model.params();
    const auto rows = static_cast<Eigen::Index>(grid.n_steps) + 1;
    const auto cols = static_cast<Eigen::Index>(n_paths);
    G2Factors f{StepPathMatrix(rows, cols), StepPathMatrix(rows, cols), StepPathMatrix(rows, cols),
                StepPathMatrix(rows, cols)};
    std::vector<double> int_phi(phi.size());
    for (int i = 0; i <= grid.n_steps; ++i) int_phi[static_cast<std::size_t>(i)] = model.integrated_phi(grid.time(i));
    const detail::OuStep step = detail::ou_step(p, grid.dt);
    const double sqdt = std::sqrt(grid.dt);
    const double rho_perp = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));

    parallel_for(n_paths, opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            PathStream rng(seed, static_cast<std::uint32_t>(j), Stream::rates);
            const auto c = static_cast<Eigen::Index>(j);
            double y = 0.0, z = 0.0, int_xz = 0.0;
            f.y(0, c) = 0.0;
            f.z(0, c) = 0.0;
            f.short_rate(0, c) = phi[0];
            f.integrated_rate(0, c) = 0.0;
            for (Eigen::Index i = 1; i < rows; ++i) {
                const double n1 = rng.normal();
                const double n2 = rng.normal();
                const double y_prev = y, z_prev = z;
                y = step.decay_y * y_prev + step.l00 * n1;
                if (opts.literal_z_drift)
                    z = z_prev - p.nu * y_prev * grid.dt + p.eta * sqdt * (p.rho * n1 + rho_perp * n2);
                else
                    z = step.decay_z * z_prev + step.l10 * n1 + step.l11 * n2;
                int_xz += 0.5 * (y_prev + z_prev + y + z) * grid.dt;
                f.y(i, c) = y;
                f.z(i, c) = z;
                f.short_rate(i, c) = y + z + phi[static_cast<std::size_t>(i)];
                f.integrated_rate(i, c) = int_phi[static_cast<std::size_t>(i)] + int_xz;
            }
        }
    });
    return f;
}

struct IntensityPaths {
    StepPathMatrix intensity;
    StepPathMatrix cum_hazard;
};

/// Full-truncation Euler for the CIR intensity; cumulated hazard by the
/// trapezoidal rule. With a non-zero rho_rate_intensity the intensity shock
/// is correlated with the y-factor shock of the same seed.
inline IntensityPaths simulate_cir(const CIRParams& params, const TimeGrid& grid, std::size_t n_paths,
                                   std::uint64_t seed, const SimulationOptions& opts = {}) {
    params.validate();
    if (n_paths == 0) throw ModelError("need at least one path");
    if (!(std::abs(opts.rho_rate_intensity) <= 1.0)) throw ModelError("rate/intensity correlation must lie in [-1, 1]");
    const auto rows = static_cast<Eigen::Index>(grid.n_steps) + 1;
    const auto cols = static_cast<Eigen::Index>(n_paths);
    IntensityPaths out{StepPathMatrix(rows, cols), StepPathMatrix(rows, cols)};
    const double sqdt = std::sqrt(grid.dt);
    const double rho = opts.rho_rate_intensity;
    const double rho_perp = std::sqrt(1.0 - rho * rho);

    parallel_for(n_paths, opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            PathStream own(seed, static_cast<std::uint32_t>(j), Stream::intensity);
            PathStream rates(seed, static_cast<std::uint32_t>(j), Stream::rates);
            const auto c = static_cast<Eigen::Index>(j);
            double lam = params.lambda0;
            out.intensity(0, c) = lam;
            out.cum_hazard(0, c) = 0.0;
            for (Eigen::Index i = 1; i < rows; ++i) {
                double shock = own.normal();
                if (rho != 0.0) {
                    const double n1 = rates.normal();
                    (void)rates.normal();
                    shock = rho * n1 + rho_perp * shock;
                }
                const double lp = std::max(lam, 0.0);
                lam = lam + params.kappa * (params.gamma - lp) * grid.dt + params.upsilon * std::sqrt(lp) * sqdt * shock;
                out.intensity(i, c) = std::max(lam, 0.0);
                out.cum_hazard(i, c) = out.cum_hazard(i - 1, c) + 0.5 * (out.intensity(i - 1, c) + out.intensity(i, c)) * grid.dt;
            }
        }
    });
    return out;
}

/// Sentinel default step for paths surviving the whole grid.
inline constexpr int kNoDefault = std::numeric_limits<int>::max();

/// First grid index whose cumulated hazard reaches an independent unit
/// exponential draw, or kNoDefault.
inline std::vector<int> sample_default_times(const StepPathMatrix& cum_hazard, std::uint64_t seed) {
    std::vector<int> out(static_cast<std::size_t>(cum_hazard.cols()), kNoDefault);
    for (Eigen::Index j = 0; j < cum_hazard.cols(); ++j) {
        PathStream rng(seed, static_cast<std::uint32_t>(j), Stream::default_time);
        const double xi = rng.exponential();
        for (Eigen::Index i = 0; i < cum_hazard.rows(); ++i) {
            if (cum_hazard(i, j) >= xi) {
                out[static_cast<std::size_t>(j)] = static_cast<int>(i);
                break;
            }
        }
    }
    return out;
}

/// Simulated state on a grid. Immutable once built.
struct PathSet {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    StepPathMatrix y_factor;
    StepPathMatrix z_factor;
    StepPathMatrix short_rate;
    StepPathMatrix integrated_rate;
    StepPathMatrix intensity;
    StepPathMatrix cum_hazard;
    std::vector<int> default_step;

    /// True while the counterparty has not defaulted at or before step.
    bool alive(int step, std::size_t path) const noexcept { return step < default_step[path]; }
};

/// Curve -> shift -> factors -> intensity -> default times.
inline PathSet simulate_paths(const G2Model& model, const CIRParams& cir, const TimeGrid& grid, std::size_t n_paths,
                              std::uint64_t seed, const SimulationOptions& opts = {}) {
    const auto phi = fit_phi(model.params(), model.curve(), grid);
    auto factors = simulate_g2pp(model, phi, grid, n_paths, seed, opts);
    auto hazard = simulate_cir(cir, grid, n_paths, seed, opts);
    auto defaults = sample_default_times(hazard.cum_hazard, seed);
    return PathSet{grid,
                   n_paths,
                   seed,
                   std::move(factors.y),
                   std::move(factors.z),
                   std::move(factors.short_rate),
                   std::move(factors.integrated_rate),
                   std::move(hazard.intensity),
                   std::move(hazard.cum_hazard),
                   std::move(defaults)};
}

/// Columnar dump: step,path,y,z,r,lambda,Lambda,defaulted.
inline void write_paths_csv(std::ostream& os, const PathSet& paths) {
    os << "step,path,y,z,r,lambda,Lambda,defaulted\n";
    os.precision(17);
    for (int i = 0; i <= paths.grid.n_steps; ++i)
        for (std::size_t j = 0; j < paths.n_paths; ++j) {
            const auto c = static_cast<Eigen::Index>(j);
            os << i << ',' << j << ',' << paths.y_factor(i, c) << ',' << paths.z_factor(i, c) << ','
               << paths.short_rate(i, c) << ',' << paths.intensity(i, c) << ',' << paths.cum_hazard(i, c) << ','
               << (paths.alive(i, j) ? 0 : 1) << '\n';
        }
}

}  // namespace ccsa
