#pragma once

// Small discrete switching problems: a Markov chain on a state lattice with
// per-state, per-regime costs. Used to validate the backward recursion.

#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccsa/costs.hpp"

namespace ccsa {

struct ToyProblem {
    static constexpr int kMaxSteps = 6;
    static constexpr int kMaxStates = 8;

    int n_steps = 0;
    int n_states = 0;
    int initial_state = 0;
    /// transitions[n][s][s']: probability of s -> s' between steps n and n + 1.
    std::vector<std::vector<std::vector<double>>> transitions;
    /// running_cost[n][s][regime], charged at decision steps 0 .. n_steps - 1.
    std::vector<std::vector<std::array<double, 2>>> running_cost;
    /// terminal[s][regime], charged at step n_steps.
    std::vector<std::array<double, 2>> terminal;
    /// switch_cost[regime]: cost of leaving that regime.
    std::array<double, 2> switch_cost{0.0, 0.0};

    double run(int step, int state, Regime r) const { return running_cost[step][state][index(r)]; }
    double leave(Regime r) const { return switch_cost[index(r)]; }

    void validate() const {
        if (n_steps < 1 || n_steps > kMaxSteps) throw std::invalid_argument("toy problem needs 1.." + std::to_string(kMaxSteps) + " steps");
        if (n_states < 1 || n_states > kMaxStates) throw std::invalid_argument("toy problem needs 1.." + std::to_string(kMaxStates) + " states");
        if (initial_state < 0 || initial_state >= n_states) throw std::invalid_argument("initial state out of range");
        const auto ns = static_cast<std::size_t>(n_states);
        if (transitions.size() != static_cast<std::size_t>(n_steps) || running_cost.size() != static_cast<std::size_t>(n_steps) ||
            terminal.size() != ns)
            throw std::invalid_argument("toy problem tables have the wrong shape");
        for (int n = 0; n < n_steps; ++n) {
            if (transitions[n].size() != ns || running_cost[n].size() != ns) throw std::invalid_argument("toy problem tables have the wrong shape");
            for (std::size_t s = 0; s < ns; ++s) {
                if (transitions[n][s].size() != ns) throw std::invalid_argument("transition row has the wrong length");
                double total = 0.0;
                for (double p : transitions[n][s]) {
                    if (!(p >= 0.0)) throw std::invalid_argument("negative transition probability");
                    total += p;
                }
                if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("transition row does not sum to 1");
                for (double c : running_cost[n][s])
                    if (!std::isfinite(c)) throw std::invalid_argument("non-finite running cost");
            }
        }
        for (const auto& t : terminal)
            for (double c : t)
                if (!std::isfinite(c)) throw std::invalid_argument("non-finite terminal cost");
        for (double c : switch_cost)
            if (!std::isfinite(c)) throw std::invalid_argument("non-finite switch cost");
    }
};

inline void to_json(nlohmann::json& j, const ToyProblem& p) {
    j = nlohmann::json{{"n_steps", p.n_steps},         {"n_states", p.n_states},         {"initial_state", p.initial_state},
                       {"transitions", p.transitions}, {"running_cost", p.running_cost}, {"terminal", p.terminal},
                       {"switch_cost", p.switch_cost}};
}

inline void from_json(const nlohmann::json& j, ToyProblem& p) {
    j.at("n_steps").get_to(p.n_steps);
    j.at("n_states").get_to(p.n_states);
    p.initial_state = j.value("initial_state", 0);
    j.at("transitions").get_to(p.transitions);
    j.at("running_cost").get_to(p.running_cost);
    j.at("terminal").get_to(p.terminal);
    j.at("switch_cost").get_to(p.switch_cost);
}

inline ToyProblem load_toy_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open toy problem '" + path + "'");
    ToyProblem p = nlohmann::json::parse(in).get<ToyProblem>();
    p.validate();
    return p;
}

}  // namespace ccsa
