#pragma once

#include <cmath>
#include <vector>

#include "ocgfn/cond/cond_model.hpp"
#include "ocgfn/oracle/dag.hpp"
#include "ocgfn/oracle/exact.hpp"

namespace ocgfn::oracle {

// Analytic outcome-conditioned flows with indicator rewards, built by backward
// DP against the uniform backward policy:
//   F(z|y) = 1{z == y} at terminals,
//   F(s|y) = sum_{s' in children(s)} F(s'|y) P_B(s|s'),
//   P_F(s'|s,y) = F(s'|y) P_B(s|s') / F(s|y).
// The resulting conditional policy walks only inside the set of states from
// which y is reachable, so it reaches y with probability one.
template <class Env>
cond::TabularCondModel<Env> build_indicator_cond_model(const Dag<Env>& dag) {
    cond::TabularCondModel<Env> model(*dag.env, dag.states, dag.index);
    const int n = static_cast<int>(dag.states.size());
    const int A = dag.env->num_actions();
    for (int t : dag.terminals) {
        std::vector<double> flow(n, 0.0);
        flow[t] = 1.0;
        std::vector<std::vector<double>> pf(n);
        for (int sid = n - 1; sid >= 0; --sid) {
            if (dag.is_terminal(sid)) continue;
            double f = 0.0;
            for (int e : dag.out_edges[sid]) {
                const int to = dag.edges[e].to;
                f += flow[to] / static_cast<double>(dag.in_edges[to].size());
            }
            flow[sid] = f;
            auto& row = pf[sid];
            row.assign(A, 0.0);
            if (f > 0.0)
                for (int e : dag.out_edges[sid]) {
                    const int to = dag.edges[e].to;
                    row[dag.edges[e].action] =
                        flow[to] / static_cast<double>(dag.in_edges[to].size()) / f;
                }
        }
        model.set_outcome_table(static_cast<int>(dag.env->cell_index(dag.states[t])),
                                std::move(flow), std::move(pf));
    }
    return model;
}

template <class Env>
struct Prop41Report {
    cond::TabularCondModel<Env> model;
    double max_deviation = 0.0;                 // max over y of |1 - P(x = y | y)|
    std::vector<double> reach_probability;       // per terminal, dag.terminals order
};

// Proposition-4.1 oracle: construct exact conditional flows, then verify by
// forward DP that each outcome is reached with probability one.
template <class Env>
Prop41Report<Env> check_prop41(const Dag<Env>& dag) {
    Prop41Report<Env> rep{build_indicator_cond_model(dag), 0.0, {}};
    cond::CondView v;
    for (size_t yi = 0; yi < dag.terminals.size(); ++yi) {
        const auto& y = dag.states[dag.terminals[yi]];
        auto policy = capture_policy(dag, [&](const typename Env::State& s) {
            rep.model.view(s, y, v);
            return std::span<const double>(v.log_pf);
        });
        // restrict the DP to the positive-flow cone: unreachable states keep
        // empty policy rows (zero probability everywhere), which is fine
        // because no mass ever enters them
        auto dist = exact_terminal_distribution(dag, policy);
        const double reach = dist[yi];
        rep.reach_probability.push_back(reach);
        rep.max_deviation = std::max(rep.max_deviation, std::abs(1.0 - reach));
    }
    return rep;
}

struct Prop42Report {
    double max_relative_error = 0.0;
    size_t edges_checked = 0;
};

// Proposition-4.2 oracle: compare a numerator predictor against the exact
// conversion sums, edge by edge. `n_of` is (state, action) -> N(s'|s).
template <class Env, class NFn>
Prop42Report check_prop42(const Dag<Env>& dag, const ConversionTable& exact, NFn&& n_of) {
    Prop42Report rep;
    for (size_t sid = 0; sid < dag.states.size(); ++sid) {
        if (dag.is_terminal(static_cast<int>(sid))) continue;
        const auto& outs = dag.out_edges[sid];
        for (size_t k = 0; k < outs.size(); ++k) {
            const double truth = exact.numerator[sid][k];
            if (truth <= 0.0) continue;
            const double n = n_of(dag.states[sid], dag.edges[outs[k]].action);
            rep.max_relative_error =
                std::max(rep.max_relative_error, std::abs(n - truth) / truth);
            rep.edges_checked += 1;
        }
    }
    return rep;
}

// Exactly detailed-balanced unconditional flows for a given terminal reward:
// F(x) = R(x), F(s) = sum_{s'} F(s') P_B(s|s') with uniform P_B, and
// P_F(s'|s) = F(s') P_B(s|s') / F(s). Terminal sampling under this policy is
// exactly R/Z.
template <class Env>
struct BalancedFlows {
    std::vector<double> flow;  // per state id
    PolicyTable policy;        // per out-edge
};

template <class Env, class RewardFn>
BalancedFlows<Env> build_balanced_flows(const Dag<Env>& dag, RewardFn&& reward) {
    BalancedFlows<Env> b;
    const int n = static_cast<int>(dag.states.size());
    b.flow.assign(n, 0.0);
    b.policy.resize(n);
    for (int t : dag.terminals) b.flow[t] = reward(dag.states[t]);
    for (int sid = n - 1; sid >= 0; --sid) {
        if (dag.is_terminal(sid)) continue;
        double f = 0.0;
        for (int e : dag.out_edges[sid])
            f += b.flow[dag.edges[e].to] / static_cast<double>(dag.in_edges[dag.edges[e].to].size());
        b.flow[sid] = f;
        auto& row = b.policy[sid];
        row.reserve(dag.out_edges[sid].size());
        for (int e : dag.out_edges[sid]) {
            const int to = dag.edges[e].to;
            row.push_back(b.flow[to] / static_cast<double>(dag.in_edges[to].size()) / f);
        }
    }
    return b;
}

} // namespace ocgfn::oracle
