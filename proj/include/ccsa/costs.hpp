#pragma once

// Cost processes of the two collateral regimes and the running, terminal and
// switching cost functions built on them.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccsa/dynamics.hpp"
#include "ccsa/regression.hpp"

namespace ccsa {

/// z: no collateral, exposed to counterparty default (BCVA cost).
/// zeta: full collateral, exposed to funding and opportunity costs.
enum class Regime : int { zero_collateral = 0, full_collateral = 1 };

inline constexpr Regime other(Regime r) noexcept {
    return r == Regime::zero_collateral ? Regime::full_collateral : Regime::zero_collateral;
}
inline constexpr int index(Regime r) noexcept { return static_cast<int>(r); }
inline std::string to_string(Regime r) { return r == Regime::zero_collateral ? "z" : "zeta"; }

struct CostConfig {
    double r_free = 0.0;
    double r_borr = 0.01;
    double r_opp = 0.03;
    double recovery = 0.4;
    double c_z = 0.0;     // paid when switching z -> zeta (currency)
    double c_zeta = 0.0;  // paid when switching zeta -> z (currency)
    double delta = 0.0;   // target level of the running costs
    double notional = 1000.0;
    bool split_epe_ene = false;  // BCVA on separately regressed NPV+ and NPV-

    /// Throws on hard violations; returns soft warnings.
    std::vector<std::string> validate() const {
        if (!(recovery >= 0.0 && recovery <= 1.0)) throw std::invalid_argument("recovery must lie in [0, 1]");
        if (!(c_z >= 0.0 && c_zeta >= 0.0)) throw std::invalid_argument("switching costs must be non-negative");
        if (!(r_borr >= r_free && r_opp >= r_free)) throw std::invalid_argument("borrowing and opportunity rates must not be below the risk-free rate");
        if (!(notional > 0.0)) throw std::invalid_argument("notional must be positive");
        std::vector<std::string> warnings;
        if (c_z > 0.02 * notional || c_zeta > 0.02 * notional)
            warnings.emplace_back("switching cost above 2% of notional");
        return warnings;
    }
};

struct CostRegression {
    RegressionBasis bcva_basis = RegressionBasis::rate_and_intensity();
    RegressionBasis coll_basis = RegressionBasis::rate_only();
    RegressionOptions options{};
};

struct RegimeCostPaths {
    StepPathMatrix bcva;       // regime z cost process
    StepPathMatrix coll_cost;  // regime zeta cost process; -NPV(T) at maturity
    std::uint64_t seed = 0;    // seed of the paths these were built from

    const StepPathMatrix& of(Regime r) const noexcept { return r == Regime::zero_collateral ? bcva : coll_cost; }
};

namespace detail {

inline void check_grid(const PathSet& paths, const StepPathMatrix& m) {
    if (m.rows() != paths.grid.n_steps + 1 || m.cols() != static_cast<Eigen::Index>(paths.n_paths))
        throw std::invalid_argument("matrix does not match the path grid");
}

/// Regressed E[g(NPV(t_{i+1})) | F_{t_i}] over the paths alive at t_i; zero
/// for dead paths and on the last row.
template <class Transform>
StepPathMatrix expected_next(const PathSet& paths, const StepPathMatrix& npv, const RegressionBasis& basis,
                             const RegressionOptions& opts, Transform g) {
    const int n = paths.grid.n_steps;
    StepPathMatrix out = StepPathMatrix::Zero(n + 1, static_cast<Eigen::Index>(paths.n_paths));
    std::vector<std::size_t> rows;
    std::vector<double> r, lam, target;
    for (int i = 0; i < n; ++i) {
        rows.clear();
        r.clear();
        lam.clear();
        target.clear();
        for (std::size_t j = 0; j < paths.n_paths; ++j) {
            if (!paths.alive(i, j)) continue;
            const auto c = static_cast<Eigen::Index>(j);
            rows.push_back(j);
            r.push_back(paths.short_rate(i, c));
            lam.push_back(paths.intensity(i, c));
            target.push_back(g(npv(i + 1, c)));
        }
        if (rows.empty()) continue;
        const auto fit = regress_continuation(r, lam, target, basis, opts);
        for (std::size_t k = 0; k < rows.size(); ++k) out(i, static_cast<Eigen::Index>(rows[k])) = fit.fitted[k];
    }
    return out;
}

}  // namespace detail

/// Backward BCVA accumulation per path:
///   bcva(t_i) = (1 - R) E[NPV(t_{i+1}) | F_{t_i}] lambda(t_i) dt + bcva(t_{i+1}),
/// with bcva(T) = 0 and bcva = 0 from the default step on.
inline StepPathMatrix bcva_paths(const PathSet& paths, const StepPathMatrix& npv, const CostConfig& cfg,
                                 const CostRegression& reg = {}) {
    detail::check_grid(paths, npv);
    const int n = paths.grid.n_steps;
    const double dt = paths.grid.dt;
    const double lgd = 1.0 - cfg.recovery;
    StepPathMatrix expected;
    if (cfg.split_epe_ene) {
        expected = detail::expected_next(paths, npv, reg.bcva_basis, reg.options, [](double v) { return std::max(v, 0.0); });
        expected -= detail::expected_next(paths, npv, reg.bcva_basis, reg.options, [](double v) { return std::max(-v, 0.0); });
    } else {
        expected = detail::expected_next(paths, npv, reg.bcva_basis, reg.options, [](double v) { return v; });
    }
    StepPathMatrix bcva = StepPathMatrix::Zero(n + 1, static_cast<Eigen::Index>(paths.n_paths));
    for (std::size_t j = 0; j < paths.n_paths; ++j) {
        const auto c = static_cast<Eigen::Index>(j);
        for (int i = n - 1; i >= 0; --i) {
            if (!paths.alive(i, j)) continue;
            bcva(i, c) = lgd * expected(i, c) * paths.intensity(i, c) * dt + bcva(i + 1, c);
        }
    }
    return bcva;
}

/// Collateral cost per path: backward-accumulated funding on the expected
/// exposure, (r_opp - r_free) on its positive part and (r_borr - r_free) on
/// its negative part, both as positive costs, minus the spot collateral NPV.
inline StepPathMatrix coll_cost_paths(const PathSet& paths, const StepPathMatrix& npv, const CostConfig& cfg,
                                      const CostRegression& reg = {}) {
    detail::check_grid(paths, npv);
    const int n = paths.grid.n_steps;
    const double dt = paths.grid.dt;
    const double opp = cfg.r_opp - cfg.r_free;
    const double borr = cfg.r_borr - cfg.r_free;
    const StepPathMatrix expected =
        detail::expected_next(paths, npv, reg.coll_basis, reg.options, [](double v) { return v; });
    StepPathMatrix coll = StepPathMatrix::Zero(n + 1, static_cast<Eigen::Index>(paths.n_paths));
    for (std::size_t j = 0; j < paths.n_paths; ++j) {
        const auto c = static_cast<Eigen::Index>(j);
        double funding = 0.0;
        if (paths.alive(n, j)) coll(n, c) = -npv(n, c);
        for (int i = n - 1; i >= 0; --i) {
            if (!paths.alive(i, j)) continue;
            const double e = expected(i, c);
            funding += (opp * std::max(e, 0.0) + borr * std::max(-e, 0.0)) * dt;
            coll(i, c) = funding - npv(i, c);
        }
    }
    return coll;
}

inline RegimeCostPaths regime_cost_paths(const PathSet& paths, const StepPathMatrix& npv, const CostConfig& cfg,
                                         const CostRegression& reg = {}) {
    return {bcva_paths(paths, npv, cfg, reg), coll_cost_paths(paths, npv, cfg, reg), paths.seed};
}

/// Squared deviation of the regime's cost process from delta, per unit time.
inline double running_cost(Regime regime, const RegimeCostPaths& costs, int step, std::size_t path,
                           const CostConfig& cfg) {
    const double x = costs.of(regime)(step, static_cast<Eigen::Index>(path)) - cfg.delta;
    return x * x;
}

/// Reward at maturity: (-NPV(T) - delta)^2 with collateral posted, delta^2 without.
inline double terminal_reward(Regime regime_at_maturity, double npv_at_maturity, const CostConfig& cfg) noexcept {
    const double x = regime_at_maturity == Regime::full_collateral ? -npv_at_maturity - cfg.delta : -cfg.delta;
    return x * x;
}

/// Discounted fixed cost of leaving `from` at time t.
inline double switch_cost(Regime from, double t, const CostConfig& cfg) noexcept {
    const double c = from == Regime::zero_collateral ? cfg.c_z : cfg.c_zeta;
    return std::exp(-cfg.r_free * t) * c;
}

/// step,path,bcva,coll_cost
inline void write_costs_csv(std::ostream& os, const RegimeCostPaths& costs) {
    os << "step,path,bcva,coll_cost\n";
    os.precision(17);
    for (Eigen::Index i = 0; i < costs.bcva.rows(); ++i)
        for (Eigen::Index j = 0; j < costs.bcva.cols(); ++j)
            os << i << ',' << j << ',' << costs.bcva(i, j) << ',' << costs.coll_cost(i, j) << '\n';
}

}  // namespace ccsa
