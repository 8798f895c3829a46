#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "ocgfn/adapt/conversion.hpp"
#include "ocgfn/cond/cond_model.hpp"
#include "ocgfn/cond/replay.hpp"
#include "ocgfn/env/grid.hpp"
#include "ocgfn/env/sequence.hpp"
#include "ocgfn/gfn/trajectory.hpp"
#include "ocgfn/nn/adam.hpp"
#include "ocgfn/nn/mlp.hpp"

namespace ocgfn::adapt {

// squared log-domain residual of N(s'|s) Q(y|s',s) = r(y) F(s|y) P_F(s'|s,y)
inline double amortized_residual(double log_n, double log_q, double log_r, double log_flow,
                                 double log_pf) {
    if (!std::isfinite(log_r) || !std::isfinite(log_flow) || !std::isfinite(log_pf))
        throw std::invalid_argument("amortized_residual: right-hand factor is zero");
    return log_n + log_q - log_r - log_flow - log_pf;
}

// Numerator network: log N(s'|s) per forward action, emitted directly by the
// output head (so N is positive by construction; illegal children are masked
// out by callers).
template <class Env>
class NumeratorNet {
public:
    NumeratorNet() = default;

    NumeratorNet(const Env& env, const std::vector<int>& hidden, nn::Activation act,
                 uint64_t seed)
        : env_(&env) {
        std::vector<int> sizes;
        sizes.push_back(env.encoding_dim());
        for (int h : hidden) sizes.push_back(h);
        sizes.push_back(env.num_actions());
        net_ = nn::Mlp(sizes, act, seed);
    }

    const Env& env() const { return *env_; }
    nn::Mlp& net() { return net_; }
    const nn::Mlp& net() const { return net_; }

    // dense log N over the action space; illegal actions get -inf
    void view(const typename Env::State& s, std::vector<double>& log_n) const {
        enc_.resize(env_->encoding_dim());
        env_->encode(s, enc_.data());
        net_.forward(enc_, out_);
        log_n.assign(env_->num_actions(), kNegInf);
        env_->legal_actions(s, legal_);
        for (int a : legal_) log_n[a] = out_[a];
    }

    void evaluate(const typename Env::State& s, nn::Mlp::Cache& cache,
                  std::vector<double>& out) const {
        enc_.resize(env_->encoding_dim());
        env_->encode(s, enc_.data());
        net_.forward_cached(enc_, cache, out);
    }

    // policy induced by the numerators, as dense sampling logits
    std::vector<double> policy_logits(const typename Env::State& s) const {
        std::vector<double> log_n;
        view(s, log_n);
        return log_n;
    }

private:
    const Env* env_ = nullptr;
    nn::Mlp net_;
    mutable std::vector<double> enc_, out_;
    mutable std::vector<int> legal_;
};

// Outcome sampler Q(y|s',s). The grid version is a flat categorical over
// cells; the sequence version factorizes autoregressively over symbols, which
// is what keeps huge outcome spaces tractable.
template <class Env>
class OutcomeSampler;

template <>
class OutcomeSampler<env::GridEnv> {
public:
    using Env = env::GridEnv;
    using State = Env::State;

    struct LogProb {
        nn::Mlp::Cache cache;
        std::vector<double> out;
        std::vector<double> log_p, p;
        int cell = 0;
    };

    OutcomeSampler() = default;

    OutcomeSampler(const Env& env, const std::vector<int>& hidden, nn::Activation act,
                   uint64_t seed)
        : env_(&env) {
        std::vector<int> sizes;
        sizes.push_back(2 * env.encoding_dim());
        for (int h : hidden) sizes.push_back(h);
        sizes.push_back(static_cast<int>(env.num_cells()));
        net_ = nn::Mlp(sizes, act, seed);
        all_cells_.resize(env.num_cells());
        for (size_t i = 0; i < all_cells_.size(); ++i) all_cells_[i] = static_cast<int>(i);
    }

    nn::Mlp& net() { return net_; }
    const nn::Mlp& net() const { return net_; }

    double log_prob(const State& s, const State& sp, const State& y, LogProb& lp) const {
        encode_pair(s, sp);
        net_.forward_cached(enc_, lp.cache, lp.out);
        nn::masked_log_softmax(lp.out, all_cells_, lp.log_p, lp.p);
        lp.cell = static_cast<int>(env_->cell_index(y));
        return lp.log_p[lp.cell];
    }

    void accumulate_grads(const LogProb& lp, double coeff, std::span<double> grad) const {
        dout_.resize(lp.out.size());
        for (size_t j = 0; j < lp.out.size(); ++j) dout_[j] = -coeff * lp.p[j];
        dout_[lp.cell] += coeff;
        net_.backward(lp.cache, dout_, grad);
    }

    State sample(const State& s, const State& sp, double temperature, double epsilon,
                 Rng& rng) const {
        encode_pair(s, sp);
        net_.forward(enc_, out_);
        weights_.resize(out_.size());
        double m = kNegInf;
        for (double x : out_) m = std::max(m, x / temperature);
        double z = 0.0;
        for (size_t j = 0; j < out_.size(); ++j) {
            weights_[j] = std::exp(out_[j] / temperature - m);
            z += weights_[j];
        }
        const double u = epsilon / static_cast<double>(out_.size());
        for (double& wv : weights_) wv = (1.0 - epsilon) * (wv / z) + u;
        return env_->terminal_from_cell(static_cast<size_t>(rng.categorical(weights_)));
    }

private:
    void encode_pair(const State& s, const State& sp) const {
        const int d = env_->encoding_dim();
        enc_.resize(2 * d);
        env_->encode(s, enc_.data());
        env_->encode(sp, enc_.data() + d);
    }

    const Env* env_ = nullptr;
    nn::Mlp net_;
    std::vector<int> all_cells_;
    mutable std::vector<double> enc_, out_, weights_, dout_;
};

// Sequence outcomes are generated left to right, so an outcome has positive
// flow from s' only when it extends s'. The sampler therefore pins the
// y-prefix to s' and factorizes autoregressively over the remaining symbols;
// prefix-inconsistent outcomes get log-probability -inf.
template <>
class OutcomeSampler<env::SeqEnv> {
public:
    using Env = env::SeqEnv;
    using State = Env::State;

    struct LogProb {
        std::vector<nn::Mlp::Cache> caches;
        std::vector<std::vector<double>> outs, log_ps, ps;
        std::vector<int> picks;
    };

    OutcomeSampler() = default;

    OutcomeSampler(const Env& env, const std::vector<int>& hidden, nn::Activation act,
                   uint64_t seed)
        : env_(&env) {
        std::vector<int> sizes;
        sizes.push_back(3 * env.encoding_dim());
        for (int h : hidden) sizes.push_back(h);
        sizes.push_back(env.spec().vocab_size);
        net_ = nn::Mlp(sizes, act, seed);
        vocab_.resize(env.spec().vocab_size);
        for (size_t v = 0; v < vocab_.size(); ++v) vocab_[v] = static_cast<int>(v);
    }

    nn::Mlp& net() { return net_; }
    const nn::Mlp& net() const { return net_; }

    double log_prob(const State& s, const State& sp, const State& y, LogProb& lp) const {
        const int L = env_->spec().length;
        const int start = static_cast<int>(sp.symbols.size());
        for (int t = 0; t < start; ++t)
            if (y.symbols[t] != sp.symbols[t]) {
                lp.caches.clear();
                return kNegInf;
            }
        const int steps = L - start;
        lp.caches.resize(steps);
        lp.outs.resize(steps);
        lp.log_ps.resize(steps);
        lp.ps.resize(steps);
        lp.picks.resize(steps);
        State prefix = sp;
        double total = 0.0;
        for (int k = 0; k < steps; ++k) {
            const int t = start + k;
            encode_triple(s, sp, prefix);
            net_.forward_cached(enc_, lp.caches[k], lp.outs[k]);
            nn::masked_log_softmax(lp.outs[k], vocab_, lp.log_ps[k], lp.ps[k]);
            lp.picks[k] = y.symbols[t];
            total += lp.log_ps[k][y.symbols[t]];
            prefix.symbols.push_back(y.symbols[t]);
        }
        return total;
    }

    void accumulate_grads(const LogProb& lp, double coeff, std::span<double> grad) const {
        for (size_t t = 0; t < lp.caches.size(); ++t) {
            dout_.resize(lp.outs[t].size());
            for (size_t j = 0; j < dout_.size(); ++j) dout_[j] = -coeff * lp.ps[t][j];
            dout_[lp.picks[t]] += coeff;
            net_.backward(lp.caches[t], dout_, grad);
        }
    }

    State sample(const State& s, const State& sp, double temperature, double epsilon,
                 Rng& rng) const {
        const int L = env_->spec().length;
        State y = sp;
        for (int t = static_cast<int>(sp.symbols.size()); t < L; ++t) {
            encode_triple(s, sp, y);
            net_.forward(enc_, out_);
            weights_.resize(out_.size());
            double m = kNegInf;
            for (double x : out_) m = std::max(m, x / temperature);
            double z = 0.0;
            for (size_t j = 0; j < out_.size(); ++j) {
                weights_[j] = std::exp(out_[j] / temperature - m);
                z += weights_[j];
            }
            const double u = epsilon / static_cast<double>(out_.size());
            for (double& wv : weights_) wv = (1.0 - epsilon) * (wv / z) + u;
            y.symbols.push_back(static_cast<uint8_t>(rng.categorical(weights_)));
        }
        return y;
    }

private:
    void encode_triple(const State& s, const State& sp, const State& prefix) const {
        const int d = env_->encoding_dim();
        enc_.resize(3 * d);
        env_->encode(s, enc_.data());
        env_->encode(sp, enc_.data() + d);
        env_->encode(prefix, enc_.data() + 2 * d);
    }

    const Env* env_ = nullptr;
    nn::Mlp net_;
    std::vector<int> vocab_;
    mutable std::vector<double> enc_, out_, weights_, dout_;
};

struct FinetuneSettings {
    int batch = 16;
    gfn::ExplorationConfig explore;   // for N-policy rollouts
    double q_temperature = 2.0;
    double q_epsilon = 0.05;
    bool replay_mix = true;           // also train on transitions drawn from D
    double n_lr = 1e-3;
    double q_lr = 1e-3;
};

struct FinetuneMetrics {
    double loss = 0.0;
    size_t triples = 0;
};

// Supervised fine-tuning: the conditional model is frozen; only the numerator
// net N and outcome sampler Q train, on the squared residual of
// N(s'|s) Q(y|s',s) = r(y) F(s|y) P_F(s'|s,y).
template <class Env, class CondM>
class FinetuneRun {
public:
    using State = typename Env::State;
    using RewardFn = std::function<double(const State&)>;

    FinetuneRun(const Env& env, const CondM& cond, RewardFn reward, NumeratorNet<Env> n,
                OutcomeSampler<Env> q, FinetuneSettings settings,
                const cond::ReplayDataset<Env>* replay = nullptr)
        : env_(&env), cond_(&cond), reward_(std::move(reward)), n_(std::move(n)),
          q_(std::move(q)), cfg_(settings), n_opt_(settings.n_lr), q_opt_(settings.q_lr),
          replay_(replay) {}

    NumeratorNet<Env>& numerator() { return n_; }
    const NumeratorNet<Env>& numerator() const { return n_; }
    OutcomeSampler<Env>& sampler() { return q_; }
    const OutcomeSampler<Env>& sampler() const { return q_; }

    void set_lr(double lr) {
        n_opt_.lr = lr;
        q_opt_.lr = lr;
    }

    // terminal states visited by the most recent step's rollouts
    const std::vector<State>& last_terminals() const { return terminals_; }

    FinetuneMetrics step(Rng& rng) {
        FinetuneMetrics m;
        terminals_.clear();
        transitions_.clear();

        auto logits = [&](const State& s) -> std::span<const double> {
            n_.view(s, logn_scratch_);
            return logn_scratch_;
        };
        for (int b = 0; b < cfg_.batch; ++b) {
            auto traj = gfn::rollout(*env_, logits, cfg_.explore, rng);
            for (size_t i = 0; i < traj.num_edges(); ++i)
                transitions_.emplace_back(traj.states[i], traj.actions[i]);
            terminals_.push_back(traj.terminal());
        }
        if (cfg_.replay_mix && replay_ && !replay_->empty()) {
            const size_t extra = transitions_.size();
            for (size_t i = 0; i < extra; ++i)
                transitions_.push_back(replay_->sample_transition(*env_, rng));
        }

        n_grad_.assign(n_.net().params().size(), 0.0);
        q_grad_.assign(q_.net().params().size(), 0.0);
        const double w = 1.0 / static_cast<double>(transitions_.size());
        for (const auto& [s, a] : transitions_) {
            const State sp = env_->apply(s, a);
            const State y = q_.sample(s, sp, cfg_.q_temperature, cfg_.q_epsilon, rng);
            const double r = reward_(y);
            cond_->view(s, y, cv_);
            // zero-support pairs can only come from exact/tabular conditional
            // models (a neural model is strictly positive); they contribute
            // nothing to the marginal and carry no gradient
            if (cv_.log_flow == kNegInf || cv_.log_pf[a] == kNegInf) continue;
            nn::Mlp::Cache n_cache;
            n_.evaluate(s, n_cache, n_out_);
            const double log_q = q_.log_prob(s, sp, y, q_lp_);
            if (log_q == kNegInf) continue;
            const double rd = amortized_residual(n_out_[a], log_q, std::log(r), cv_.log_flow,
                                                 cv_.log_pf[a]);
            m.loss += w * rd * rd;
            m.triples += 1;
            const double c = 2.0 * rd * w;
            n_dout_.assign(n_out_.size(), 0.0);
            n_dout_[a] = c;
            n_.net().backward(n_cache, n_dout_, n_grad_);
            q_.accumulate_grads(q_lp_, c, q_grad_);
        }
        nn::adam_step(n_.net().params(), n_grad_, n_opt_, "numerator");
        nn::adam_step(q_.net().params(), q_grad_, q_opt_, "sampler");
        return m;
    }

private:
    const Env* env_;
    const CondM* cond_;
    RewardFn reward_;
    NumeratorNet<Env> n_;
    OutcomeSampler<Env> q_;
    FinetuneSettings cfg_;
    nn::AdamState n_opt_, q_opt_;
    const cond::ReplayDataset<Env>* replay_;

    std::vector<State> terminals_;
    std::vector<std::pair<State, int>> transitions_;
    std::vector<double> logn_scratch_, n_out_, n_dout_, n_grad_, q_grad_;
    cond::CondView cv_;
    typename OutcomeSampler<Env>::LogProb q_lp_;
};

} // namespace ocgfn::adapt
