#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ocgfn/cond/cond_model.hpp"
#include "ocgfn/common.hpp"

namespace ocgfn::adapt {

// Monte-Carlo conversion policy:
//   P_F^r(s'|s) = sum_y r(y) F(s|y) P_F(s'|s,y) / sum_y r(y) F(s|y).
// `outcomes` is either the full outcome enumeration (exact) or a sampled
// batch (self-normalized estimate). Accumulation is done in log domain.
// Returns a dense distribution over the action space (0 on illegal actions).
template <class Env, class CondM, class RewardFn>
std::vector<double> mc_policy(const typename Env::State& s, const Env& env, const CondM& cond,
                              RewardFn&& reward, std::span<const typename Env::State> outcomes) {
    if (outcomes.empty()) throw std::invalid_argument("mc_policy: no outcomes supplied");
    const int A = env.num_actions();
    std::vector<double> log_num(A, kNegInf);
    cond::CondView v;
    for (const auto& y : outcomes) {
        const double r = reward(y);
        if (!(r > 0.0)) throw std::invalid_argument("mc_policy: reward must be positive");
        cond.view(s, y, v);
        const double base = std::log(r) + v.log_flow;
        if (base == kNegInf) continue;
        for (int a = 0; a < A; ++a)
            if (v.log_pf[a] != kNegInf) log_num[a] = log_add_exp(log_num[a], base + v.log_pf[a]);
    }
    const double log_z = log_sum_exp(log_num);
    if (log_z == kNegInf)
        throw std::runtime_error("mc_policy: all sampled outcomes give zero numerator");
    std::vector<double> p(A, 0.0);
    for (int a = 0; a < A; ++a)
        if (log_num[a] != kNegInf) p[a] = std::exp(log_num[a] - log_z);
    return p;
}

// normalize per-child numerators into a policy; illegal children stay at 0
inline std::vector<double> extract_policy(std::span<const double> numerators) {
    double z = 0.0;
    for (double n : numerators) {
        if (n < 0.0) throw std::invalid_argument("extract_policy: negative numerator");
        z += n;
    }
    if (!(z > 0.0)) throw std::runtime_error("extract_policy: all numerators are zero");
    std::vector<double> p(numerators.begin(), numerators.end());
    for (double& x : p) x /= z;
    return p;
}

} // namespace ocgfn::adapt
