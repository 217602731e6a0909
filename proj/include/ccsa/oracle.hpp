#pragma once

// Exhaustive search over deterministic Markov switching policies of a toy
// problem. Each policy is priced exactly by propagating the joint
// (state, regime) distribution forward, with no backward induction.

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ccsa/parallel.hpp"
#include "ccsa/toy_problem.hpp"

namespace ccsa {

struct PolicyNode {
    int step;
    int state;
    Regime regime;
};

/// Decision rule: true means "switch out of regime at (step, state)".
using Policy = std::function<bool(int step, int state, Regime regime)>;

/// Expected total cost of following `policy` from the initial state.
inline double evaluate_policy(const ToyProblem& p, Regime initial, const Policy& policy) {
    const auto ns = static_cast<std::size_t>(p.n_states);
    std::vector<std::array<double, 2>> mass(ns, {0.0, 0.0}), next(ns);
    mass[static_cast<std::size_t>(p.initial_state)][index(initial)] = 1.0;
    double total = 0.0;
    for (int n = 0; n < p.n_steps; ++n) {
        std::fill(next.begin(), next.end(), std::array<double, 2>{0.0, 0.0});
        for (int s = 0; s < p.n_states; ++s) {
            for (Regime r : {Regime::zero_collateral, Regime::full_collateral}) {
                const double m = mass[static_cast<std::size_t>(s)][index(r)];
                if (m == 0.0) continue;
                Regime held = r;
                if (policy(n, s, r)) {
                    total += m * p.leave(r);
                    held = other(r);
                }
                total += m * p.run(n, s, held);
                for (int s2 = 0; s2 < p.n_states; ++s2)
                    next[static_cast<std::size_t>(s2)][index(held)] += m * p.transitions[n][s][s2];
            }
        }
        mass.swap(next);
    }
    for (int s = 0; s < p.n_states; ++s)
        for (Regime r : {Regime::zero_collateral, Regime::full_collateral})
            total += mass[static_cast<std::size_t>(s)][index(r)] * p.terminal[s][index(r)];
    return total;
}

/// Decision nodes that can be reached from the initial (state, regime).
inline std::vector<PolicyNode> reachable_nodes(const ToyProblem& p, Regime initial) {
    std::vector<PolicyNode> nodes{{0, p.initial_state, initial}};
    std::vector<bool> reach(static_cast<std::size_t>(p.n_states), false);
    reach[static_cast<std::size_t>(p.initial_state)] = true;
    for (int n = 1; n < p.n_steps; ++n) {
        std::vector<bool> next(reach.size(), false);
        for (int s = 0; s < p.n_states; ++s)
            if (reach[static_cast<std::size_t>(s)])
                for (int s2 = 0; s2 < p.n_states; ++s2)
                    if (p.transitions[n - 1][s][s2] > 0.0) next[static_cast<std::size_t>(s2)] = true;
        reach.swap(next);
        for (int s = 0; s < p.n_states; ++s)
            if (reach[static_cast<std::size_t>(s)])
                for (Regime r : {Regime::zero_collateral, Regime::full_collateral}) nodes.push_back({n, s, r});
    }
    return nodes;
}

struct OracleResult {
    double value = std::numeric_limits<double>::infinity();
    std::vector<PolicyNode> nodes;
    std::vector<bool> switches;  // optimal decision per node
    std::uint64_t policies_evaluated = 0;
};

/// Minimum expected cost over every deterministic Markov policy. Ties go to
/// the policy with the lowest enumeration index.
inline OracleResult enumerate_policies(const ToyProblem& p, Regime initial, int max_nodes = 24, unsigned threads = 0) {
    p.validate();
    OracleResult out;
    out.nodes = reachable_nodes(p, initial);
    const int bits = static_cast<int>(out.nodes.size());
    if (bits > max_nodes) throw std::length_error("too many decision nodes to enumerate (" + std::to_string(bits) + ")");
    const std::uint64_t count = std::uint64_t{1} << bits;

    // Node lookup table: (step, state, regime) -> bit.
    std::vector<int> bit_of(static_cast<std::size_t>(p.n_steps * p.n_states * 2), -1);
    const auto key = [&](int n, int s, Regime r) { return static_cast<std::size_t>((n * p.n_states + s) * 2 + index(r)); };
    for (int b = 0; b < bits; ++b) bit_of[key(out.nodes[b].step, out.nodes[b].state, out.nodes[b].regime)] = b;

    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(threads), count));
    std::vector<std::pair<double, std::uint64_t>> best(workers, {std::numeric_limits<double>::infinity(), 0});
    parallel_for(workers, workers, [&](std::size_t wb, std::size_t we) {
        for (std::size_t w = wb; w < we; ++w) {
            const std::uint64_t lo = count * w / workers, hi = count * (w + 1) / workers;
            for (std::uint64_t mask = lo; mask < hi; ++mask) {
                const double v = evaluate_policy(p, initial, [&](int n, int s, Regime r) {
                    const int b = bit_of[key(n, s, r)];
                    return b >= 0 && ((mask >> b) & 1u);
                });
                if (v < best[w].first) best[w] = {v, mask};
            }
        }
    });
    std::uint64_t arg = 0;
    for (const auto& [v, mask] : best)
        if (v < out.value) {
            out.value = v;
            arg = mask;
        }
    out.switches.resize(static_cast<std::size_t>(bits));
    for (int b = 0; b < bits; ++b) out.switches[static_cast<std::size_t>(b)] = (arg >> b) & 1u;
    out.policies_evaluated = count;
    return out;
}

}  // namespace ccsa
