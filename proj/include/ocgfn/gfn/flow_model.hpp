#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ocgfn/common.hpp"
#include "ocgfn/nn/adam.hpp"
#include "ocgfn/nn/mlp.hpp"

namespace ocgfn::gfn {

// Per-state model view: log state flow plus masked log-policies. log_pf[a] is
// the probability of taking forward action a at this state; log_pb[a] is the
// probability of undoing back-action a at this state (a indexes the forward
// action that produced this state from the corresponding parent).
struct StateEval {
    nn::Mlp::Cache cache;
    std::vector<double> out;
    double log_flow = 0.0;
    std::vector<int> legal_f, legal_b;
    std::vector<double> log_pf, pf;
    std::vector<double> log_pb, pb;
};

// gradient coefficients for one evaluated state: d(loss)/d(log F) plus sparse
// d(loss)/d(log P) terms per action
struct EvalGrad {
    double d_log_flow = 0.0;
    std::vector<std::pair<int, double>> d_log_pf;
    std::vector<std::pair<int, double>> d_log_pb;

    void clear() {
        d_log_flow = 0.0;
        d_log_pf.clear();
        d_log_pb.clear();
    }
};

// Unconditional flow model: one net with heads [log F | P_F logits | P_B logits].
template <class Env>
class FlowModel {
public:
    FlowModel() = default;

    FlowModel(const Env& env, const std::vector<int>& hidden, nn::Activation act, uint64_t seed)
        : env_(&env) {
        std::vector<int> sizes;
        sizes.push_back(env.encoding_dim());
        for (int h : hidden) sizes.push_back(h);
        sizes.push_back(1 + 2 * env.num_actions());
        net_ = nn::Mlp(sizes, act, seed);
    }

    const Env& env() const { return *env_; }
    nn::Mlp& net() { return net_; }
    const nn::Mlp& net() const { return net_; }

    void evaluate(const typename Env::State& s, StateEval& ev) const {
        const int A = env_->num_actions();
        enc_.resize(env_->encoding_dim());
        env_->encode(s, enc_.data());
        net_.forward_cached(enc_, ev.cache, ev.out);
        ev.log_flow = ev.out[0];
        env_->legal_actions(s, ev.legal_f);
        env_->legal_back_actions(s, ev.legal_b);
        std::span<const double> pf_logits(ev.out.data() + 1, A);
        std::span<const double> pb_logits(ev.out.data() + 1 + A, A);
        if (!ev.legal_f.empty())
            nn::masked_log_softmax(pf_logits, ev.legal_f, ev.log_pf, ev.pf);
        else {
            ev.log_pf.assign(A, kNegInf);
            ev.pf.assign(A, 0.0);
        }
        if (!ev.legal_b.empty())
            nn::masked_log_softmax(pb_logits, ev.legal_b, ev.log_pb, ev.pb);
        else {
            ev.log_pb.assign(A, kNegInf);
            ev.pb.assign(A, 0.0);
        }
    }

    void accumulate_grads(const StateEval& ev, const EvalGrad& g, std::span<double> grad) const {
        const int A = env_->num_actions();
        dout_.assign(1 + 2 * A, 0.0);
        dout_[0] = g.d_log_flow;
        add_softmax_grads(g.d_log_pf, ev.pf, ev.legal_f, dout_.data() + 1);
        add_softmax_grads(g.d_log_pb, ev.pb, ev.legal_b, dout_.data() + 1 + A);
        net_.backward(ev.cache, dout_, grad);
    }

private:
    // d(log p_a)/d(logit_j) = [a == j] - p_j over legal j
    static void add_softmax_grads(const std::vector<std::pair<int, double>>& terms,
                                  const std::vector<double>& p, const std::vector<int>& legal,
                                  double* dlogits) {
        double total = 0.0;
        for (auto [a, c] : terms) {
            dlogits[a] += c;
            total += c;
        }
        if (total != 0.0)
            for (int j : legal) dlogits[j] -= total * p[j];
    }

    const Env* env_ = nullptr;
    nn::Mlp net_;
    mutable std::vector<double> enc_;
    mutable std::vector<double> dout_;
};

// learned log-partition estimate for the trajectory-balance objective
struct TBHead {
    std::vector<double> log_z{0.0};

    double value() const { return log_z[0]; }
};

} // namespace ocgfn::gfn
