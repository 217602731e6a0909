#pragma once

// Defaultable EURIBOR-vs-fixed swap: model NPV along paths and the
// EPE / ENE exposure profile.

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccsa/dynamics.hpp"

namespace ccsa {

enum class SwapDirection { pay_fixed, receive_fixed };
enum class Fixing {
    in_arrears,  // period rate known at the period end (compounded short rate)
    in_advance,  // period rate fixed at the period start
};

struct SwapSpec {
    double notional = 1000.0;
    double maturity = 1.0;
    double float_tenor = 0.5;
    double fixed_rate = 0.0;
    SwapDirection direction = SwapDirection::pay_fixed;
    Fixing fixing = Fixing::in_arrears;

    int periods() const {
        const double n = maturity / float_tenor;
        const long k = std::lround(n);
        if (!(float_tenor > 0.0) || k <= 0 || std::abs(n - static_cast<double>(k)) > 1e-9)
            throw std::invalid_argument("swap maturity must be a positive multiple of the floating tenor");
        return static_cast<int>(k);
    }
    double sign() const noexcept { return direction == SwapDirection::pay_fixed ? 1.0 : -1.0; }
    void validate() const {
        if (!(notional > 0.0)) throw std::invalid_argument("swap notional must be positive");
        (void)periods();
    }
};

/// Fixed rate that prices the swap at par on the initial curve, with fixed
/// payments on the floating schedule.
inline double par_fixed_rate(const YieldCurve& curve, double maturity, double float_tenor) {
    return par_swap_rate(curve, maturity, static_cast<int>(std::lround(1.0 / float_tenor)));
}

/// What a path already knows about the accrual period straddling t.
struct CurrentPeriod {
    double growth = 1.0;       // in arrears: exp(integral of r from period start to t)
    double fixed_libor = 0.0;  // in advance: rate set at the period start
};

/// Per-path NPV at time t from the G2++ factors (y, z). Periods whose end is
/// at or before t are treated as paid.
inline double swap_npv(const G2Model& model, const SwapSpec& spec, double t, double y, double z,
                       const CurrentPeriod& current = {}) {
    if (t > spec.maturity * (1.0 + 1e-12)) throw std::invalid_argument("valuation time past swap maturity");
    const int n = spec.periods();
    const double tau = spec.float_tenor;
    double value = 0.0;
    for (int k = 0; k < n; ++k) {
        const double start = k * tau;
        const double end = (k + 1) * tau;
        if (end <= t + 1e-12) continue;
        const double p_end = model.bond_price(t, end, y, z);
        double floating = 0.0;
        if (start >= t - 1e-12) {
            floating = model.bond_price(t, start, y, z) - p_end;
        } else if (spec.fixing == Fixing::in_arrears) {
            floating = current.growth - p_end;
        } else {
            floating = p_end * tau * current.fixed_libor;
        }
        value += floating - spec.fixed_rate * tau * p_end;
    }
    return spec.sign() * spec.notional * value;
}

/// NPV for every step and path of a path set.
inline StepPathMatrix npv_matrix(const PathSet& paths, const SwapSpec& spec, const G2Model& model,
                                 unsigned threads = 0) {
    spec.validate();
    const auto& grid = paths.grid;
    if (std::abs(grid.horizon() - spec.maturity) > 1e-9) throw std::invalid_argument("path grid does not end at swap maturity");
    const int n = spec.periods();
    std::vector<int> start_step(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) start_step[static_cast<std::size_t>(k)] = grid.step_of(k * spec.float_tenor);

    StepPathMatrix npv(grid.n_steps + 1, static_cast<Eigen::Index>(paths.n_paths));
    parallel_for(paths.n_paths, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const auto c = static_cast<Eigen::Index>(j);
            for (int i = 0; i <= grid.n_steps; ++i) {
                const double t = grid.time(i);
                CurrentPeriod current;
                const int k = std::min(n - 1, static_cast<int>(std::floor(t / spec.float_tenor + 1e-9)));
                const int s = start_step[static_cast<std::size_t>(k)];
                if (i > s) {
                    current.growth = std::exp(paths.integrated_rate(i, c) - paths.integrated_rate(s, c));
                    const double p = model.bond_price(grid.time(s), (k + 1) * spec.float_tenor, paths.y_factor(s, c),
                                                      paths.z_factor(s, c));
                    current.fixed_libor = (1.0 / p - 1.0) / spec.float_tenor;
                }
                npv(i, c) = swap_npv(model, spec, t, paths.y_factor(i, c), paths.z_factor(i, c), current);
            }
        }
    });
    return npv;
}

struct ExposureProfile {
    std::vector<double> times;
    std::vector<double> epe;
    std::vector<double> ene;
    std::vector<double> mean_npv;
    std::vector<std::size_t> survivors;
};

/// EPE / ENE over paths still alive at each step.
inline ExposureProfile exposure_profile(const PathSet& paths, const StepPathMatrix& npv) {
    if (paths.n_paths == 0) throw std::invalid_argument("empty path set");
    if (npv.rows() != paths.grid.n_steps + 1 || npv.cols() != static_cast<Eigen::Index>(paths.n_paths))
        throw std::invalid_argument("NPV matrix does not match the path set");
    ExposureProfile out;
    for (int i = 0; i <= paths.grid.n_steps; ++i) {
        double pos = 0.0, neg = 0.0;
        std::size_t alive = 0;
        for (std::size_t j = 0; j < paths.n_paths; ++j) {
            if (!paths.alive(i, j)) continue;
            const double v = npv(i, static_cast<Eigen::Index>(j));
            pos += std::max(v, 0.0);
            neg += std::max(-v, 0.0);
            ++alive;
        }
        const double w = alive ? 1.0 / static_cast<double>(alive) : 0.0;
        out.times.push_back(paths.grid.time(i));
        out.epe.push_back(pos * w);
        out.ene.push_back(neg * w);
        out.mean_npv.push_back((pos - neg) * w);
        out.survivors.push_back(alive);
    }
    return out;
}

/// t,EPE,ENE,meanNPV
inline void write_exposure_csv(std::ostream& os, const ExposureProfile& e) {
    os << "t,EPE,ENE,meanNPV\n";
    os.precision(12);
    for (std::size_t i = 0; i < e.times.size(); ++i)
        os << e.times[i] << ',' << e.epe[i] << ',' << e.ene[i] << ',' << e.mean_npv[i] << '\n';
}

}  // namespace ccsa
