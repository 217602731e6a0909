#pragma once

// Random small switching problems for oracle comparisons.

#include <cstdint>

#include "ccsa/rng.hpp"
#include "ccsa/toy_problem.hpp"

namespace ccsa::testing {

inline ToyProblem random_toy_problem(std::uint64_t seed, int n_steps, int n_states) {
    PathStream g(seed, 0, Stream::rates);
    ToyProblem p;
    p.n_steps = n_steps;
    p.n_states = n_states;
    p.initial_state = static_cast<int>(g() % static_cast<std::uint64_t>(n_states));
    p.transitions.assign(static_cast<std::size_t>(n_steps), {});
    p.running_cost.assign(static_cast<std::size_t>(n_steps), {});
    for (int n = 0; n < n_steps; ++n) {
        for (int s = 0; s < n_states; ++s) {
            std::vector<double> row(static_cast<std::size_t>(n_states));
            double total = 0.0;
            for (auto& w : row) {
                // Some zero entries so that not every node is reachable.
                w = g.uniform_open0() < 0.25 ? 0.0 : g.uniform_open0();
                total += w;
            }
            if (total == 0.0) row[static_cast<std::size_t>(s)] = total = 1.0;
            for (auto& w : row) w /= total;
            // Absorb rounding so rows sum to one.
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < row.size(); ++k) acc += row[k];
            row.back() = 1.0 - acc;
            if (row.back() < 0.0) row.back() = 0.0;
            p.transitions[static_cast<std::size_t>(n)].push_back(row);
            p.running_cost[static_cast<std::size_t>(n)].push_back({g.uniform_open0() * 2.0, g.uniform_open0() * 2.0});
        }
    }
    for (int s = 0; s < n_states; ++s) p.terminal.push_back({g.uniform_open0() * 3.0, g.uniform_open0() * 3.0});
    p.switch_cost = {g.uniform_open0() * 0.5, g.uniform_open0() * 0.5};
    if (g.uniform_open0() < 0.2) p.switch_cost = {0.0, 0.0};
    return p;
}

}  // namespace ccsa::testing
