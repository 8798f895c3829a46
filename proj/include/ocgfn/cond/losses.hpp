#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ocgfn/cond/cond_model.hpp"
#include "ocgfn/gfn/trajectory.hpp"

namespace ocgfn::cond {

// Ablation switches: `full` teleports the terminal indicator reward into every
// edge residual; `no_ot` applies it at the terminal edge only; `no_ot_ct`
// additionally drops the relabeled positive phase during pre-training.
enum class Variant { full, no_ot, no_ot_ct };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_ot: return "no-ot";
        default: return "no-ot-ct";
    }
}

inline Variant variant_from_name(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "no-ot") return Variant::no_ot;
    if (s == "no-ot-ct") return Variant::no_ot_ct;
    throw std::invalid_argument("unknown variant: " + s);
}

// Outcome-conditioned loss over a complete trajectory, conditioned on y:
// sum over edges of
//   (log F(s|y) + log P_F(s'|s,y) - log F(s'|y) - log P_B(s|s',y) - log R(x|y))^2
// with log F = 0 at the terminal. Under `full` the reward term appears in
// every edge; under the other variants only in the terminal edge.
template <class Env>
double oc_loss(const CondFlowModel<Env>& model,
               const gfn::TrajectoryRecord<typename Env::State>& traj,
               std::span<const double> y_enc, double reward, Variant variant,
               std::span<double> grad, double weight, std::vector<gfn::StateEval>& evals) {
    if (!(reward > 0.0)) throw std::invalid_argument("oc_loss: reward must be positive");
    const size_t n = traj.num_edges();
    const double log_r = std::log(reward);
    evals.resize(traj.states.size());
    for (size_t i = 0; i < traj.states.size(); ++i)
        model.evaluate(traj.states[i], y_enc, evals[i]);

    std::vector<gfn::EvalGrad> egrads(grad.empty() ? 0 : traj.states.size());
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const int a = traj.actions[i];
        const bool last = (i + 1 == n);
        const bool teleport = variant == Variant::full || last;
        const double r = evals[i].log_flow + evals[i].log_pf[a] - evals[i + 1].log_flow -
                         evals[i + 1].log_pb[a] - (teleport ? log_r : 0.0);
        loss += r * r;
        if (!grad.empty()) {
            const double c = 2.0 * r * weight;
            egrads[i].d_log_flow += c;
            egrads[i].d_log_pf.emplace_back(a, c);
            if (!last) egrads[i + 1].d_log_flow -= c; // terminal flow is the constant 1
            egrads[i + 1].d_log_pb.emplace_back(a, -c);
        }
    }
    if (!grad.empty())
        for (size_t i = 0; i < traj.states.size(); ++i)
            model.accumulate_grads(evals[i], egrads[i], grad);
    return loss;
}

} // namespace ocgfn::cond
