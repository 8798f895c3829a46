#pragma once

#include <vector>

#include "ocgfn/cond/cond_model.hpp"
#include "ocgfn/cond/losses.hpp"
#include "ocgfn/cond/replay.hpp"
#include "ocgfn/gfn/losses.hpp"
#include "ocgfn/gfn/rnd.hpp"
#include "ocgfn/gfn/trajectory.hpp"

namespace ocgfn::cond {

// rollout of the conditional forward policy, conditioned on outcome y
template <class Env, class Model>
gfn::TrajectoryRecord<typename Env::State> conditioned_rollout(
    const Model& model, const Env& env, const typename Env::State& y,
    const gfn::ExplorationConfig& ex, Rng& rng) {
    CondView v;
    auto logits = [&](const typename Env::State& s) -> std::span<const double> {
        model.view(s, y, v);
        return v.log_pf;
    };
    return rollout(env, logits, ex, rng);
}

// fraction of exploration-free conditioned rollouts that hit their target exactly
template <class Env, class Model>
double success_rate(const Model& model, const Env& env,
                    std::span<const typename Env::State> outcomes, int trials, Rng& rng) {
    if (outcomes.empty()) throw std::invalid_argument("success_rate: empty outcome batch");
    gfn::ExplorationConfig off;
    size_t hits = 0, total = 0;
    for (const auto& y : outcomes) {
        const std::string target = env.state_key(y);
        for (int t = 0; t < trials; ++t) {
            auto traj = conditioned_rollout(model, env, y, off, rng);
            hits += env.state_key(traj.terminal()) == target;
            total += 1;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

struct PretrainSettings {
    int batch = 16;
    gfn::ExplorationConfig explore;
    Variant variant = Variant::full;
    double failure_reward = 1e-8;    // conditional reward when f(x) != y
    double gafn_terminal_reward = 1e-6;
    double cond_lr = 1e-3;
    double gafn_lr = 1e-3;
    double rnd_lr = 1e-3;
};

struct PretrainMetrics {
    double positive_loss = 0.0;
    double negative_loss = 0.0;
    double gafn_loss = 0.0;
    double rnd_loss = 0.0;
    double negative_success = 0.0; // fraction of tau- that reached y+
};

// One reward-free pre-training step: relabeled positive phase, on-policy
// negative phase, augmented-flow update of the explorer, predictor update,
// and replay push.
template <class Env>
class PretrainRun {
public:
    PretrainRun(const Env& env, CondFlowModel<Env> cond, gfn::FlowModel<Env> gafn,
                gfn::RndPair<Env> rnd, PretrainSettings settings, size_t replay_capacity)
        : env_(&env), cond_(std::move(cond)), gafn_(std::move(gafn)), rnd_(std::move(rnd)),
          cfg_(settings), cond_opt_(settings.cond_lr), gafn_opt_(settings.gafn_lr),
          replay_(replay_capacity) {}

    CondFlowModel<Env>& cond() { return cond_; }
    const CondFlowModel<Env>& cond() const { return cond_; }
    gfn::FlowModel<Env>& gafn() { return gafn_; }
    gfn::RndPair<Env>& rnd() { return rnd_; }
    ReplayDataset<Env>& replay() { return replay_; }
    const PretrainSettings& settings() const { return cfg_; }

    void set_cond_lr(double lr) { cond_opt_.lr = lr; }
    void set_gafn_lr(double lr) { gafn_opt_.lr = lr; }

    PretrainMetrics step(Rng& rng) {
        PretrainMetrics m;
        const int B = cfg_.batch;
        const double w = 1.0 / static_cast<double>(B);

        // explorer rollouts tau+
        positives_.clear();
        for (int b = 0; b < B; ++b)
            positives_.push_back(gfn::sample_trajectory(gafn_, cfg_.explore, rng));

        // positive phase: relabel y+ = f(terminal), reward identically 1
        if (cfg_.variant != Variant::no_ot_ct) {
            grad_.assign(cond_.net().params().size(), 0.0);
            for (const auto& traj : positives_) {
                auto y_enc = cond_.encode_outcome(traj.terminal());
                m.positive_loss +=
                    w * oc_loss(cond_, traj, y_enc, 1.0, cfg_.variant, grad_, w, evals_);
            }
            nn::adam_step(cond_.net().params(), grad_, cond_opt_, "cond");
        }

        // negative phase: on-policy conditioned rollouts against y+, indicator reward
        grad_.assign(cond_.net().params().size(), 0.0);
        for (const auto& pos : positives_) {
            const auto& y = pos.terminal();
            auto traj = conditioned_rollout(cond_, *env_, y, cfg_.explore, rng);
            const bool hit = env_->state_key(traj.terminal()) == env_->state_key(y);
            m.negative_success += w * (hit ? 1.0 : 0.0);
            auto y_enc = cond_.encode_outcome(y);
            m.negative_loss += w * oc_loss(cond_, traj, y_enc, hit ? 1.0 : cfg_.failure_reward,
                                           cfg_.variant, grad_, w, evals_);
        }
        nn::adam_step(cond_.net().params(), grad_, cond_opt_, "cond");

        // explorer update on tau+ with intrinsic rewards of destination states
        grad_.assign(gafn_.net().params().size(), 0.0);
        rnd_states_.clear();
        for (auto& traj : positives_) {
            for (size_t i = 0; i < traj.num_edges(); ++i) {
                traj.intrinsic[i] = rnd_.intrinsic(traj.states[i + 1]);
                rnd_states_.push_back(traj.states[i + 1]);
            }
            m.gafn_loss += w * gfn::gafn_loss(gafn_, traj, std::log(cfg_.gafn_terminal_reward),
                                              grad_, w, evals_);
        }
        nn::adam_step(gafn_.net().params(), grad_, gafn_opt_, "gafn");

        m.rnd_loss = rnd_.update(rnd_states_);

        for (const auto& traj : positives_) replay_.push(*env_, traj);
        return m;
    }

private:
    const Env* env_;
    CondFlowModel<Env> cond_;
    gfn::FlowModel<Env> gafn_;
    gfn::RndPair<Env> rnd_;
    PretrainSettings cfg_;
    nn::AdamState cond_opt_, gafn_opt_;
    ReplayDataset<Env> replay_;

    std::vector<gfn::TrajectoryRecord<typename Env::State>> positives_;
    std::vector<typename Env::State> rnd_states_;
    std::vector<gfn::StateEval> evals_;
    std::vector<double> grad_;
};

} // namespace ocgfn::cond
