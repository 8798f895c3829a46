#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "ocgfn/common.hpp"
#include "ocgfn/env/grid.hpp"
#include "ocgfn/env/sequence.hpp"

namespace ocgfn::mcmc {

inline double acceptance_probability(double reward_proposed, double reward_current) {
    if (!(reward_proposed > 0.0) || !(reward_current > 0.0))
        throw std::invalid_argument("mh_step: rewards must be strictly positive");
    return std::min(1.0, reward_proposed / reward_current);
}

// single-site symmetric proposal: pick a position/dimension, redraw its symbol
inline env::SeqState propose(const env::SeqEnv& env, const env::SeqState& x, Rng& rng) {
    env::SeqState p = x;
    const int pos = rng.uniform_index(env.spec().length);
    p.symbols[pos] = static_cast<uint8_t>(rng.uniform_index(env.spec().vocab_size));
    return p;
}

inline env::GridState propose(const env::GridEnv& env, const env::GridState& x, Rng& rng) {
    env::GridState p = x;
    const int d = rng.uniform_index(env.spec().ndim);
    p.coords[d] = static_cast<uint8_t>(rng.uniform_index(env.spec().side));
    return p;
}

// Metropolis-Hastings chain over terminal states.
template <class Env>
class Chain {
public:
    using State = typename Env::State;
    using RewardFn = std::function<double(const State&)>;

    Chain(const Env& env, RewardFn reward, Rng& rng)
        : env_(&env), reward_(std::move(reward)) {
        state_ = env_->random_terminal(rng);
        reward_value_ = reward_(state_);
    }

    const State& state() const { return state_; }
    long steps() const { return steps_; }
    long accepted() const { return accepted_; }

    void step(Rng& rng) {
        State prop = propose(*env_, state_, rng);
        const double r = reward_(prop);
        const double accept = acceptance_probability(r, reward_value_);
        if (rng.uniform() < accept) {
            state_ = std::move(prop);
            reward_value_ = r;
            accepted_ += 1;
        }
        steps_ += 1;
    }

private:
    const Env* env_;
    RewardFn reward_;
    State state_;
    double reward_value_ = 0.0;
    long steps_ = 0;
    long accepted_ = 0;
};

template <class Env>
struct ChainRunResult {
    std::vector<typename Env::State> samples; // post-burn-in chain states
    double acceptance_rate = 0.0;
};

// run one chain for `steps` moves, logging states after `burn_in`
// (steps == burn_in legitimately yields an empty log)
template <class Env, class RewardFn>
ChainRunResult<Env> run_chain(const Env& env, RewardFn&& reward, long steps, long burn_in,
                              Rng& rng) {
    if (burn_in < 0 || steps < burn_in)
        throw std::invalid_argument("run_chain: need steps >= burn_in >= 0");
    Chain<Env> chain(env, reward, rng);
    ChainRunResult<Env> res;
    res.samples.reserve(steps - burn_in);
    for (long t = 0; t < steps; ++t) {
        chain.step(rng);
        if (t >= burn_in) res.samples.push_back(chain.state());
    }
    res.acceptance_rate =
        chain.steps() == 0
            ? 0.0
            : static_cast<double>(chain.accepted()) / static_cast<double>(chain.steps());
    return res;
}

} // namespace ocgfn::mcmc
