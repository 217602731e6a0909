#pragma once

// Two-regime switching control solved by backward induction.
//
// At each decision step, in regime Z with other regime O:
//   stay   = F_Z dt + E[V_Z(next) | state]
//   switch = F_O dt + E[V_O(next) | state] + c_Z
//   V_Z    = min(stay, switch)
// Monte Carlo mode estimates E[. | state] by least squares and propagates
// realized path values (Longstaff-Schwartz); lattice mode uses exact
// expectations on a ToyProblem.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccsa/costs.hpp"
#include "ccsa/regression.hpp"
#include "ccsa/toy_problem.hpp"

namespace ccsa {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense step-by-path table.
template <class T>
class StepPathTable {
public:
    StepPathTable() = default;
    StepPathTable(int rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    T& operator()(int step, std::size_t path) { return data_[static_cast<std::size_t>(step) * cols_ + path]; }
    const T& operator()(int step, std::size_t path) const { return data_[static_cast<std::size_t>(step) * cols_ + path]; }
    int rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

private:
    int rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// Shared decision rule: switch only when strictly cheaper.
struct Choice {
    double value;
    bool switched;
};
inline Choice choose(double stay, double move) noexcept { return move < stay ? Choice{move, true} : Choice{stay, false}; }

struct SwitchEvent {
    int step;
    Regime to;
};

struct SolverOptions {
    /// Cap on the number of switches (explicit ladder of value functions).
    /// Unset: unlimited, solved in a single two-surface sweep.
    std::optional<int> max_switches;
    /// Continuation bases per regime. Both default to the full basis so that the
    /// stay/move comparison does not pick up differences between two fits of
    /// nearly identical targets.
    RegressionBasis basis_z = RegressionBasis::rate_and_intensity();
    RegressionBasis basis_zeta = RegressionBasis::rate_and_intensity();
    RegressionOptions regression{};
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

inline Estimate mean_estimate(const std::vector<double>& x) {
    if (x.empty()) return {};
    const double n = static_cast<double>(x.size());
    double m = 0.0;
    for (double v : x) m += v;
    m /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    const double var = x.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {m, std::sqrt(var / n)};
}

struct SwitchingSolution {
    int n_steps = 0;
    std::size_t n_paths = 0;
    Regime initial_regime = Regime::zero_collateral;

    std::array<Estimate, 2> v_star{};                  // switchable value by initial regime
    std::array<std::vector<double>, 2> pathwise_star;  // realized path values at t = 0
    Estimate v_cva;                                     // locked in z
    Estimate v_coll;                                    // locked in zeta

    StepPathTable<std::int8_t> indicators;              // regime held during each step (initial_regime run)
    std::array<StepPathTable<std::uint8_t>, 2> switch_now;  // optimal to leave regime at (step, path)
    std::array<StepPathTable<int>, 2> min_switch_time;  // smallest optimal switching step; n_steps = never
    std::vector<std::vector<SwitchEvent>> strategy_trace;

    /// Value from the configured initial regime; the trace follows this run.
    const Estimate& star() const { return v_star[static_cast<std::size_t>(index(initial_regime))]; }
    /// Contract value when the initial regime is also chosen optimally.
    Estimate best() const { return v_star[0].value <= v_star[1].value ? v_star[0] : v_star[1]; }
    Regime best_initial_regime() const {
        return v_star[0].value <= v_star[1].value ? Regime::zero_collateral : Regime::full_collateral;
    }
    std::size_t total_switches() const {
        std::size_t n = 0;
        for (const auto& t : strategy_trace) n += t.size();
        return n;
    }
};

namespace detail {

inline void check_inputs(const PathSet& paths, const RegimeCostPaths& costs) {
    for (const auto* m : {&costs.bcva, &costs.coll_cost})
        if (m->rows() != paths.grid.n_steps + 1 || m->cols() != static_cast<Eigen::Index>(paths.n_paths))
            throw SolverError("cost paths do not match the path grid");
    if (costs.seed != paths.seed) throw SolverError("cost paths were built from a different seed");
}

// Discounted running cost F dt at (step, path), zero once defaulted.
inline double running_increment(Regime z, const PathSet& paths, const RegimeCostPaths& costs, int step, std::size_t path,
                                 const CostConfig& cfg) {
    if (!paths.alive(step, path)) return 0.0;
    return std::exp(-cfg.r_free * paths.grid.time(step)) * running_cost(z, costs, step, path, cfg) * paths.grid.dt;
}

// Terminal reward; coll_cost at maturity holds -NPV(T).
inline double terminal_value(Regime z, const PathSet& paths, const RegimeCostPaths& costs, std::size_t path,
                             const CostConfig& cfg) {
    const int n = paths.grid.n_steps;
    if (!paths.alive(n, path)) return 0.0;
    const double npv_t = -costs.coll_cost(n, static_cast<Eigen::Index>(path));
    return std::exp(-cfg.r_free * paths.grid.time(n)) * terminal_reward(z, npv_t, cfg);
}

}  // namespace detail

/// Value of staying in one regime for the whole life of the contract.
inline Estimate value_no_switch(const PathSet& paths, const RegimeCostPaths& costs, const CostConfig& cfg, Regime regime,
                                std::vector<double>* pathwise = nullptr) {
    detail::check_inputs(paths, costs);
    std::vector<double> v(paths.n_paths, 0.0);
    for (std::size_t j = 0; j < paths.n_paths; ++j) {
        double acc = detail::terminal_value(regime, paths, costs, j, cfg);
        for (int i = paths.grid.n_steps - 1; i >= 0; --i) acc += detail::running_increment(regime, paths, costs, i, j, cfg);
        v[j] = acc;
    }
    if (pathwise) *pathwise = v;
    return mean_estimate(v);
}

/// Forward re-pricing of a per-path strategy along the simulated paths.
inline std::vector<double> reprice_strategy(const PathSet& paths, const RegimeCostPaths& costs, const CostConfig& cfg,
                                            Regime initial, const std::vector<std::vector<SwitchEvent>>& trace) {
    if (trace.size() != paths.n_paths) throw SolverError("strategy trace does not match the path count");
    std::vector<double> v(paths.n_paths, 0.0);
    for (std::size_t j = 0; j < paths.n_paths; ++j) {
        Regime cur = initial;
        auto ev = trace[j].begin();
        double acc = 0.0;
        for (int i = 0; i < paths.grid.n_steps; ++i) {
            if (ev != trace[j].end() && ev->step == i) {
                acc += switch_cost(cur, paths.grid.time(i), cfg);
                cur = ev->to;
                ++ev;
            }
            acc += detail::running_increment(cur, paths, costs, i, j, cfg);
        }
        v[j] = acc + detail::terminal_value(cur, paths, costs, j, cfg);
    }
    return v;
}

/// Monte Carlo backward induction over both regimes.
inline SwitchingSolution solve_switching(const PathSet& paths, const RegimeCostPaths& costs, const CostConfig& cfg,
                                         Regime initial_regime, const SolverOptions& opts = {}) {
    detail::check_inputs(paths, costs);
    (void)cfg.validate();
    const int n = paths.grid.n_steps;
    const std::size_t np = paths.n_paths;
    const bool ladder = opts.max_switches.has_value();
    if (ladder && *opts.max_switches < 0) throw SolverError("max_switches must be non-negative");
    const int levels = ladder ? *opts.max_switches + 1 : 1;
    const int top = levels - 1;
    // Level l may switch into level prev(l); the unlimited sweep switches into itself.
    const auto prev = [&](int l) { return ladder ? l - 1 : l; };

    SwitchingSolution sol;
    sol.n_steps = n;
    sol.n_paths = np;
    sol.initial_regime = initial_regime;
    for (int z = 0; z < 2; ++z) {
        sol.switch_now[z] = StepPathTable<std::uint8_t>(n, np, 0);
        sol.min_switch_time[z] = StepPathTable<int>(n + 1, np, n);
    }
    // Every level's decisions are kept so the trace can walk down the ladder.
    std::vector<std::vector<bool>> decisions(static_cast<std::size_t>(levels) * 2,
                                             std::vector<bool>(static_cast<std::size_t>(n) * np, false));
    const auto decision = [&](int l, int z) -> std::vector<bool>& { return decisions[static_cast<std::size_t>(l * 2 + z)]; };

    // value[l][z][path] at the step after the current one.
    std::vector<std::array<std::vector<double>, 2>> next(static_cast<std::size_t>(levels));
    for (auto& lv : next)
        for (int z = 0; z < 2; ++z) {
            lv[z].resize(np);
            for (std::size_t j = 0; j < np; ++j) lv[z][j] = detail::terminal_value(static_cast<Regime>(z), paths, costs, j, cfg);
        }
    auto cur = next;

    std::vector<std::size_t> alive;
    std::vector<double> r, lam, target;
    std::vector<std::array<double, 2>> run(np);
    std::vector<std::array<std::vector<double>, 2>> est(static_cast<std::size_t>(levels));

    for (int i = n - 1; i >= 0; --i) {
        alive.clear();
        r.clear();
        lam.clear();
        for (std::size_t j = 0; j < np; ++j) {
            for (int z = 0; z < 2; ++z) run[j][z] = detail::running_increment(static_cast<Regime>(z), paths, costs, i, j, cfg);
            if (!paths.alive(i, j)) continue;
            alive.push_back(j);
            r.push_back(paths.short_rate(i, static_cast<Eigen::Index>(j)));
            lam.push_back(paths.intensity(i, static_cast<Eigen::Index>(j)));
        }
        // Estimated continuation, indexed like `alive`.
        for (int l = 0; l < levels; ++l)
            for (int z = 0; z < 2; ++z) {
                auto& e = est[static_cast<std::size_t>(l)][z];
                e.assign(alive.size(), 0.0);
                if (alive.empty()) continue;
                target.resize(alive.size());
                for (std::size_t k = 0; k < alive.size(); ++k) target[k] = next[static_cast<std::size_t>(l)][z][alive[k]];
                const auto& basis = z == 0 ? opts.basis_z : opts.basis_zeta;
                e = regress_continuation(r, lam, target, basis, opts.regression).fitted;
            }

        const double t = paths.grid.time(i);
        for (int l = 0; l < levels; ++l) {
            for (int z = 0; z < 2; ++z) {
                auto& out = cur[static_cast<std::size_t>(l)][z];
                std::fill(out.begin(), out.end(), 0.0);
                const int o = 1 - z;
                const double c = switch_cost(static_cast<Regime>(z), t, cfg);
                for (std::size_t k = 0; k < alive.size(); ++k) {
                    const std::size_t j = alive[k];
                    const double stay_est = run[j][z] + est[static_cast<std::size_t>(l)][z][k];
                    bool sw = false;
                    if (prev(l) >= 0) {
                        const double move_est = run[j][o] + est[static_cast<std::size_t>(prev(l))][o][k] + c;
                        sw = choose(stay_est, move_est).switched;
                    }
                    out[j] = sw ? run[j][o] + next[static_cast<std::size_t>(prev(l))][o][j] + c
                                : run[j][z] + next[static_cast<std::size_t>(l)][z][j];
                    if (!std::isfinite(out[j]))
                        throw SolverError("non-finite value at step " + std::to_string(i) + ", path " + std::to_string(j));
                    decision(l, z)[static_cast<std::size_t>(i) * np + j] = sw;
                }
            }
        }
        for (int z = 0; z < 2; ++z)
            for (std::size_t j = 0; j < np; ++j) {
                const bool sw = decision(top, z)[static_cast<std::size_t>(i) * np + j];
                sol.switch_now[z](i, j) = sw ? 1 : 0;
                sol.min_switch_time[z](i, j) = sw ? i : sol.min_switch_time[z](i + 1, j);
            }
        std::swap(cur, next);
    }

    for (int z = 0; z < 2; ++z) {
        sol.pathwise_star[z] = next[static_cast<std::size_t>(top)][z];
        sol.v_star[z] = mean_estimate(sol.pathwise_star[z]);
    }
    sol.v_cva = value_no_switch(paths, costs, cfg, Regime::zero_collateral);
    sol.v_coll = value_no_switch(paths, costs, cfg, Regime::full_collateral);

    // Forward walk of the optimal strategy from the initial regime.
    sol.indicators = StepPathTable<std::int8_t>(n + 1, np, 0);
    sol.strategy_trace.assign(np, {});
    for (std::size_t j = 0; j < np; ++j) {
        int z = index(initial_regime);
        int l = top;
        for (int i = 0; i < n; ++i) {
            if (paths.alive(i, j) && l >= 0 && decision(l, z)[static_cast<std::size_t>(i) * np + j]) {
                z = 1 - z;
                l = prev(l);
                sol.strategy_trace[j].push_back({i, static_cast<Regime>(z)});
            }
            sol.indicators(i, j) = static_cast<std::int8_t>(z);
        }
        sol.indicators(n, j) = static_cast<std::int8_t>(z);
    }
    return sol;
}

enum class BoundaryVariable { cost_state, short_rate, intensity };

struct BoundaryEntry {
    int step = 0;
    Regime regime = Regime::zero_collateral;
    std::size_t count = 0;
    double min = std::numeric_limits<double>::quiet_NaN();
    double q05 = std::numeric_limits<double>::quiet_NaN();
    double q50 = std::numeric_limits<double>::quiet_NaN();
    double q95 = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
};

/// Linear-interpolation quantile of sorted data.
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Empirical switching region per step and regime: the states of alive paths
/// whose smallest optimal switching time is the current step.
inline std::vector<BoundaryEntry> extract_boundary(const SwitchingSolution& sol, const PathSet& paths,
                                                   const RegimeCostPaths& costs,
                                                   BoundaryVariable variable = BoundaryVariable::cost_state) {
    std::vector<BoundaryEntry> out;
    std::vector<double> xs;
    for (int i = 0; i < sol.n_steps; ++i) {
        for (Regime z : {Regime::zero_collateral, Regime::full_collateral}) {
            xs.clear();
            for (std::size_t j = 0; j < sol.n_paths; ++j) {
                if (!paths.alive(i, j) || sol.min_switch_time[index(z)](i, j) != i) continue;
                const auto c = static_cast<Eigen::Index>(j);
                switch (variable) {
                    case BoundaryVariable::cost_state: xs.push_back(costs.of(z)(i, c)); break;
                    case BoundaryVariable::short_rate: xs.push_back(paths.short_rate(i, c)); break;
                    case BoundaryVariable::intensity: xs.push_back(paths.intensity(i, c)); break;
                }
            }
            BoundaryEntry e{i, z, xs.size()};
            if (!xs.empty()) {
                std::sort(xs.begin(), xs.end());
                e.min = xs.front();
                e.max = xs.back();
                e.q05 = sorted_quantile(xs, 0.05);
                e.q50 = sorted_quantile(xs, 0.50);
                e.q95 = sorted_quantile(xs, 0.95);
            }
            out.push_back(e);
        }
    }
    return out;
}

struct RemainingSwitches {
    std::vector<int> min;      // per step, minimum over paths
    std::vector<double> mean;  // per step, average over paths
};

/// Optimal switches still ahead at each step along the traced strategy.
inline RemainingSwitches min_remaining_switches(const SwitchingSolution& sol) {
    RemainingSwitches out{std::vector<int>(static_cast<std::size_t>(sol.n_steps) + 1, 0),
                          std::vector<double>(static_cast<std::size_t>(sol.n_steps) + 1, 0.0)};
    if (sol.strategy_trace.empty()) return out;
    std::fill(out.min.begin(), out.min.end(), std::numeric_limits<int>::max());
    for (const auto& trace : sol.strategy_trace) {
        std::size_t ahead = trace.size();
        auto ev = trace.begin();
        for (int i = 0; i <= sol.n_steps; ++i) {
            while (ev != trace.end() && ev->step < i) {
                ++ev;
                --ahead;
            }
            auto& m = out.min[static_cast<std::size_t>(i)];
            m = std::min(m, static_cast<int>(ahead));
            out.mean[static_cast<std::size_t>(i)] += static_cast<double>(ahead);
        }
    }
    for (double& m : out.mean) m /= static_cast<double>(sol.strategy_trace.size());
    return out;
}

// ---------------------------------------------------------------------------
// Lattice mode: exact conditional expectations on a ToyProblem.

struct LatticeSolution {
    double value = 0.0;  // at (initial state, initial regime)
    /// values[n][s][regime] with the switch allowance of the top ladder level.
    std::vector<std::vector<std::array<double, 2>>> values;
    /// switches[n][s][regime] at the top ladder level.
    std::vector<std::vector<std::array<bool, 2>>> switches;
};

inline LatticeSolution solve_switching_exact(const ToyProblem& p, Regime initial, std::optional<int> max_switches = {}) {
    p.validate();
    const bool ladder = max_switches.has_value();
    if (ladder && *max_switches < 0) throw SolverError("max_switches must be non-negative");
    const int levels = ladder ? *max_switches + 1 : 1;
    const auto prev = [&](int l) { return ladder ? l - 1 : l; };
    const auto ns = static_cast<std::size_t>(p.n_states);

    using Surface = std::vector<std::array<double, 2>>;  // [state][regime]
    std::vector<Surface> next(static_cast<std::size_t>(levels), Surface(ns));
    for (auto& lv : next)
        for (std::size_t s = 0; s < ns; ++s) lv[s] = p.terminal[s];

    LatticeSolution sol;
    sol.values.assign(static_cast<std::size_t>(p.n_steps) + 1, Surface(ns));
    sol.switches.assign(static_cast<std::size_t>(p.n_steps), std::vector<std::array<bool, 2>>(ns, {false, false}));
    sol.values.back() = next.back();

    for (int n = p.n_steps - 1; n >= 0; --n) {
        std::vector<Surface> cont(static_cast<std::size_t>(levels), Surface(ns));
        for (int l = 0; l < levels; ++l)
            for (int s = 0; s < p.n_states; ++s)
                for (Regime z : {Regime::zero_collateral, Regime::full_collateral}) {
                    double e = 0.0;
                    for (int s2 = 0; s2 < p.n_states; ++s2)
                        e += p.transitions[n][s][s2] * next[static_cast<std::size_t>(l)][static_cast<std::size_t>(s2)][index(z)];
                    cont[static_cast<std::size_t>(l)][static_cast<std::size_t>(s)][index(z)] = p.run(n, s, z) + e;
                }
        std::vector<Surface> cur(static_cast<std::size_t>(levels), Surface(ns));
        for (int l = 0; l < levels; ++l)
            for (int s = 0; s < p.n_states; ++s)
                for (Regime z : {Regime::zero_collateral, Regime::full_collateral}) {
                    const auto si = static_cast<std::size_t>(s);
                    const double stay = cont[static_cast<std::size_t>(l)][si][index(z)];
                    Choice ch{stay, false};
                    if (prev(l) >= 0) ch = choose(stay, cont[static_cast<std::size_t>(prev(l))][si][index(other(z))] + p.leave(z));
                    cur[static_cast<std::size_t>(l)][si][index(z)] = ch.value;
                    if (l == levels - 1) sol.switches[static_cast<std::size_t>(n)][si][index(z)] = ch.switched;
                }
        next.swap(cur);
        sol.values[static_cast<std::size_t>(n)] = next.back();
    }
    sol.value = sol.values[0][static_cast<std::size_t>(p.initial_state)][index(initial)];
    return sol;
}

// ---------------------------------------------------------------------------
// CSV emitters.

/// step,path,regime  (regime: 0 = z, 1 = zeta)
inline void write_indicators_csv(std::ostream& os, const SwitchingSolution& sol) {
    os << "step,path,regime\n";
    for (int i = 0; i <= sol.n_steps; ++i)
        for (std::size_t j = 0; j < sol.n_paths; ++j) os << i << ',' << j << ',' << int{sol.indicators(i, j)} << '\n';
}

/// step,regime,count,min,q05,q50,q95,max
inline void write_boundary_csv(std::ostream& os, const std::vector<BoundaryEntry>& entries) {
    os << "step,regime,count,min,q05,q50,q95,max\n";
    os.precision(12);
    for (const auto& e : entries)
        os << e.step << ',' << to_string(e.regime) << ',' << e.count << ',' << e.min << ',' << e.q05 << ',' << e.q50 << ','
           << e.q95 << ',' << e.max << '\n';
}

/// step,min_remaining,mean_remaining
inline void write_switches_csv(std::ostream& os, const RemainingSwitches& rs) {
    os << "step,min_remaining,mean_remaining\n";
    os.precision(12);
    for (std::size_t i = 0; i < rs.min.size(); ++i) os << i << ',' << rs.min[i] << ',' << rs.mean[i] << '\n';
}

}  // namespace ccsa
