#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ocgfn/adapt/conversion.hpp"
#include "ocgfn/cond/cond_model.hpp"
#include "ocgfn/oracle/dag.hpp"

namespace ocgfn::oracle {

// forward-policy probabilities per state, aligned with dag.out_edges order
using PolicyTable = std::vector<std::vector<double>>;

// capture a model's forward policy onto the enumerated DAG;
// `log_pf_of` is (state) -> dense log P_F over the action space
template <class Env, class LogPfFn>
PolicyTable capture_policy(const Dag<Env>& dag, LogPfFn&& log_pf_of) {
    PolicyTable table(dag.states.size());
    for (size_t sid = 0; sid < dag.states.size(); ++sid) {
        if (dag.is_terminal(static_cast<int>(sid))) continue;
        const auto log_pf = log_pf_of(dag.states[sid]);
        auto& row = table[sid];
        row.reserve(dag.out_edges[sid].size());
        for (int e : dag.out_edges[sid]) {
            const double lp = log_pf[dag.edges[e].action];
            row.push_back(lp == kNegInf ? 0.0 : std::exp(lp));
        }
    }
    return table;
}

// P_F^T(x) by dynamic programming over the topological order:
// unit mass at s_0, propagated along edge probabilities, normalized over terminals
template <class Env>
std::vector<double> exact_terminal_distribution(const Dag<Env>& dag, const PolicyTable& policy) {
    std::vector<double> mass(dag.states.size(), 0.0);
    mass[0] = 1.0;
    for (size_t sid = 0; sid < dag.states.size(); ++sid) {
        if (mass[sid] == 0.0 || dag.is_terminal(static_cast<int>(sid))) continue;
        const auto& row = policy[sid];
        const auto& outs = dag.out_edges[sid];
        for (size_t k = 0; k < outs.size(); ++k)
            mass[dag.edges[outs[k]].to] += mass[sid] * row[k];
    }
    std::vector<double> dist;
    dist.reserve(dag.terminals.size());
    double total = 0.0;
    for (int t : dag.terminals) total += mass[t];
    for (int t : dag.terminals) dist.push_back(mass[t] / total);
    return dist;
}

struct ConversionTable {
    PolicyTable policy;                        // converted forward policy per out-edge
    std::vector<std::vector<double>> numerator; // sum_y r(y) F(s|y) P_F(s'|s,y) per out-edge
};

// exact Monte-Carlo-free conversion: full sums over the enumerated outcome space
template <class Env, class CondM, class RewardFn>
ConversionTable exact_conversion_policy(const Dag<Env>& dag, const CondM& cond,
                                        RewardFn&& reward) {
    const auto outcomes = dag.env->enumerate_terminals();
    ConversionTable table;
    table.policy.resize(dag.states.size());
    table.numerator.resize(dag.states.size());
    cond::CondView v;
    for (size_t sid = 0; sid < dag.states.size(); ++sid) {
        if (dag.is_terminal(static_cast<int>(sid))) continue;
        const auto& outs = dag.out_edges[sid];
        auto& nums = table.numerator[sid];
        nums.assign(outs.size(), 0.0);
        for (const auto& y : outcomes) {
            const double r = reward(y);
            cond.view(dag.states[sid], y, v);
            const double f = v.log_flow == kNegInf ? 0.0 : std::exp(v.log_flow);
            if (f == 0.0) continue;
            for (size_t k = 0; k < outs.size(); ++k) {
                const double lp = v.log_pf[dag.edges[outs[k]].action];
                if (lp != kNegInf) nums[k] += r * f * std::exp(lp);
            }
        }
        double z = 0.0;
        for (double nv : nums) z += nv;
        auto& row = table.policy[sid];
        row.assign(outs.size(), 0.0);
        if (z > 0.0)
            for (size_t k = 0; k < outs.size(); ++k) row[k] = nums[k] / z;
    }
    return table;
}

inline double l1_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw std::invalid_argument("l1_distance: distributions have different support");
    double d = 0.0;
    for (size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
    return d;
}

// histogram of terminal samples over cell indices, normalized
template <class Env>
std::vector<double> empirical_terminal_distribution(
    const Env& env, std::span<const typename Env::State> samples) {
    std::vector<double> hist(env.num_cells(), 0.0);
    for (const auto& s : samples) hist[env.cell_index(s)] += 1.0;
    for (double& h : hist) h /= static_cast<double>(samples.size());
    return hist;
}

} // namespace ocgfn::oracle
