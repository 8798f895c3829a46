#pragma once

#include <cmath>
#include <vector>

#include "ocgfn/common.hpp"
#include "ocgfn/gfn/flow_model.hpp"

namespace ocgfn::gfn {

struct ExplorationConfig {
    double epsilon = 0.0;     // probability of a uniform legal action
    double temperature = 1.0; // logits divided by this before softmax

    void validate() const {
        if (epsilon < 0.0 || epsilon > 1.0)
            throw std::invalid_argument("ExplorationConfig: epsilon must be in [0,1]");
        if (!(temperature > 0.0))
            throw std::invalid_argument("ExplorationConfig: temperature must be positive");
    }
};

template <class State>
struct TrajectoryRecord {
    std::vector<State> states; // s_0 .. s_n, s_n terminal
    std::vector<int> actions;
    std::vector<double> behavior_log_prob; // log of the mixed sampling policy
    std::vector<double> intrinsic;         // per-edge intrinsic reward (GAFN)

    const State& terminal() const { return states.back(); }
    size_t num_edges() const { return actions.size(); }
};

// One step of the mixed behavior policy: p = (1-eps)*softmax(logits/T) + eps*uniform
// over legal actions. Returns the chosen action and its mixed log-probability.
inline std::pair<int, double> sample_action(std::span<const double> logits,
                                            const std::vector<int>& legal,
                                            const ExplorationConfig& ex, Rng& rng,
                                            std::vector<double>& scratch) {
    scratch.clear();
    double m = kNegInf;
    for (int a : legal) m = std::max(m, logits[a] / ex.temperature);
    double z = 0.0;
    for (int a : legal) {
        double e = std::exp(logits[a] / ex.temperature - m);
        scratch.push_back(e);
        z += e;
    }
    const double u = ex.epsilon / static_cast<double>(legal.size());
    for (double& p : scratch) p = (1.0 - ex.epsilon) * (p / z) + u;
    int k = rng.categorical(scratch);
    return {legal[k], std::log(scratch[k])};
}

// Roll a trajectory from s_0 to a terminal state. `logits` is any callable
// (state) -> dense logits over the action space; masking to legal actions
// happens here. Termination is guaranteed by the DAG grading.
template <class Env, class LogitsFn>
TrajectoryRecord<typename Env::State> rollout(const Env& env, LogitsFn&& logits,
                                              const ExplorationConfig& ex, Rng& rng) {
    ex.validate();
    TrajectoryRecord<typename Env::State> traj;
    traj.states.push_back(env.initial_state());
    std::vector<int> legal;
    std::vector<double> scratch;
    while (!env.is_terminal(traj.states.back())) {
        const auto& s = traj.states.back();
        env.legal_actions(s, legal);
        auto [a, lp] = sample_action(logits(s), legal, ex, rng, scratch);
        traj.actions.push_back(a);
        traj.behavior_log_prob.push_back(lp);
        traj.states.push_back(env.apply(s, a));
    }
    traj.intrinsic.assign(traj.num_edges(), 0.0);
    return traj;
}

// trajectory sampled from the model's forward policy
template <class Env>
TrajectoryRecord<typename Env::State> sample_trajectory(const FlowModel<Env>& model,
                                                        const ExplorationConfig& ex, Rng& rng) {
    StateEval ev;
    auto logits = [&](const typename Env::State& s) -> std::span<const double> {
        model.evaluate(s, ev);
        return ev.log_pf;
    };
    return rollout(model.env(), logits, ex, rng);
}

// rebuild the full state sequence from an action list
template <class Env>
TrajectoryRecord<typename Env::State> replay_actions(const Env& env,
                                                     std::span<const int> actions) {
    TrajectoryRecord<typename Env::State> traj;
    traj.states.push_back(env.initial_state());
    for (int a : actions) {
        traj.actions.push_back(a);
        traj.states.push_back(env.apply(traj.states.back(), a));
    }
    traj.behavior_log_prob.assign(traj.num_edges(), 0.0);
    traj.intrinsic.assign(traj.num_edges(), 0.0);
    return traj;
}

} // namespace ocgfn::gfn
