#pragma once

#include <cmath>
#include <vector>

#include "ocgfn/common.hpp"
#include "ocgfn/gfn/flow_model.hpp"
#include "ocgfn/gfn/trajectory.hpp"

namespace ocgfn::gfn {

// detailed-balance residual in log domain:
// log F(s) + log P_F(s'|s) - log F(s') - log P_B(s|s')
// For an edge into a terminal x, pass log R(x) as log_flow_next.
inline double db_residual(double log_flow_s, double log_pf, double log_flow_next,
                          double log_pb) {
    if (log_pf == kNegInf || log_pb == kNegInf)
        throw std::invalid_argument("db_residual: zero-probability edge under the masks");
    return log_flow_s + log_pf - log_flow_next - log_pb;
}

// augmented-flow residual: log(F(s) P_F) - log(F(s') P_B + r_i)
inline double gafn_residual(double log_flow_s, double log_pf, double log_flow_next,
                            double log_pb, double intrinsic) {
    if (log_pf == kNegInf)
        throw std::invalid_argument("gafn_residual: zero-probability edge under the masks");
    if (intrinsic < 0.0) throw std::invalid_argument("gafn_residual: intrinsic reward < 0");
    if (log_flow_next + log_pb == kNegInf && !(intrinsic > 0.0))
        throw std::invalid_argument("gafn_residual: right-hand side is zero");
    if (intrinsic == 0.0) return db_residual(log_flow_s, log_pf, log_flow_next, log_pb);
    return log_flow_s + log_pf - log_add_exp(log_flow_next + log_pb, std::log(intrinsic));
}

// trajectory-balance loss: (log Z + sum log P_F - log R - sum log P_B)^2
inline double tb_residual(double log_z, double sum_log_pf, double reward, double sum_log_pb) {
    if (!(reward > 0.0)) throw std::invalid_argument("tb_loss: reward must be positive");
    return log_z + sum_log_pf - std::log(reward) - sum_log_pb;
}

// Mean squared DB residual over a trajectory with terminal boundary
// F(x) = R(x). When `grad` is nonempty, parameter gradients (scaled by
// `weight`) are accumulated; the evals vector is reused scratch.
template <class Env, class LogRewardFn>
double db_loss(const FlowModel<Env>& model, const TrajectoryRecord<typename Env::State>& traj,
               LogRewardFn&& log_reward, std::span<double> grad, double weight,
               std::vector<StateEval>& evals) {
    const size_t n = traj.num_edges();
    evals.resize(traj.states.size());
    for (size_t i = 0; i < traj.states.size(); ++i) model.evaluate(traj.states[i], evals[i]);

    std::vector<EvalGrad> egrads(grad.empty() ? 0 : traj.states.size());
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const int a = traj.actions[i];
        const bool last = (i + 1 == n);
        const double log_next = last ? log_reward(traj.terminal()) : evals[i + 1].log_flow;
        const double r =
            db_residual(evals[i].log_flow, evals[i].log_pf[a], log_next, evals[i + 1].log_pb[a]);
        loss += r * r;
        if (!grad.empty()) {
            const double c = 2.0 * r / static_cast<double>(n);
            egrads[i].d_log_flow += c;
            egrads[i].d_log_pf.emplace_back(a, c);
            if (!last) egrads[i + 1].d_log_flow -= c;
            egrads[i + 1].d_log_pb.emplace_back(a, -c);
        }
    }
    loss /= static_cast<double>(n);
    if (!grad.empty()) {
        for (size_t i = 0; i < traj.states.size(); ++i) {
            egrads[i].d_log_flow *= weight;
            for (auto& t : egrads[i].d_log_pf) t.second *= weight;
            for (auto& t : egrads[i].d_log_pb) t.second *= weight;
            model.accumulate_grads(evals[i], egrads[i], grad);
        }
    }
    return loss;
}

// Mean squared augmented-DB residual over a trajectory; the terminal flow is
// the reward floor (reward-free pre-training) and intrinsic rewards are
// treated as constants.
template <class Env>
double gafn_loss(const FlowModel<Env>& model, const TrajectoryRecord<typename Env::State>& traj,
                 double log_terminal_floor, std::span<double> grad, double weight,
                 std::vector<StateEval>& evals) {
    const size_t n = traj.num_edges();
    evals.resize(traj.states.size());
    for (size_t i = 0; i < traj.states.size(); ++i) model.evaluate(traj.states[i], evals[i]);

    std::vector<EvalGrad> egrads(grad.empty() ? 0 : traj.states.size());
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const int a = traj.actions[i];
        const bool last = (i + 1 == n);
        const double log_next = last ? log_terminal_floor : evals[i + 1].log_flow;
        const double log_pb = evals[i + 1].log_pb[a];
        const double ri = traj.intrinsic[i];
        const double rhs_log = log_add_exp(log_next + log_pb,
                                           ri > 0.0 ? std::log(ri) : kNegInf);
        const double r = evals[i].log_flow + evals[i].log_pf[a] - rhs_log;
        loss += r * r;
        if (!grad.empty()) {
            const double c = 2.0 * r / static_cast<double>(n);
            // share of the right-hand side held by the flow term
            const double flow_share = std::exp(log_next + log_pb - rhs_log);
            egrads[i].d_log_flow += c;
            egrads[i].d_log_pf.emplace_back(a, c);
            if (!last) egrads[i + 1].d_log_flow -= c * flow_share;
            egrads[i + 1].d_log_pb.emplace_back(a, -c * flow_share);
        }
    }
    loss /= static_cast<double>(n);
    if (!grad.empty()) {
        for (size_t i = 0; i < traj.states.size(); ++i) {
            egrads[i].d_log_flow *= weight;
            for (auto& t : egrads[i].d_log_pf) t.second *= weight;
            for (auto& t : egrads[i].d_log_pb) t.second *= weight;
            model.accumulate_grads(evals[i], egrads[i], grad);
        }
    }
    return loss;
}

// Squared trajectory-balance residual. Gradients are accumulated into the
// policy net gradient and d(loss)/d(log Z) is returned via grad_log_z.
template <class Env>
double tb_loss(const FlowModel<Env>& model, const TBHead& tb,
               const TrajectoryRecord<typename Env::State>& traj, double reward,
               std::span<double> grad, double* grad_log_z, double weight,
               std::vector<StateEval>& evals) {
    const size_t n = traj.num_edges();
    evals.resize(traj.states.size());
    for (size_t i = 0; i < traj.states.size(); ++i) model.evaluate(traj.states[i], evals[i]);

    double sum_pf = 0.0, sum_pb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sum_pf += evals[i].log_pf[traj.actions[i]];
        sum_pb += evals[i + 1].log_pb[traj.actions[i]];
    }
    const double r = tb_residual(tb.value(), sum_pf, reward, sum_pb);
    if (!grad.empty()) {
        const double c = 2.0 * r * weight;
        if (grad_log_z) *grad_log_z += c;
        for (size_t i = 0; i < traj.states.size(); ++i) {
            EvalGrad eg;
            if (i < n) eg.d_log_pf.emplace_back(traj.actions[i], c);
            if (i > 0) eg.d_log_pb.emplace_back(traj.actions[i - 1], -c);
            model.accumulate_grads(evals[i], eg, grad);
        }
    }
    return r * r;
}

} // namespace ocgfn::gfn
