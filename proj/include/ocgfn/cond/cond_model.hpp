#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "ocgfn/common.hpp"
#include "ocgfn/gfn/flow_model.hpp"
#include "ocgfn/nn/mlp.hpp"

namespace ocgfn::cond {

// Outcome-conditioned model view at a state: conditional log-flow and masked
// conditional log-policies. Terminal states report log F(x|y) = 0 (the
// conditional terminal flow is fixed to 1; the indicator reward enters the
// loss explicitly instead).
struct CondView {
    double log_flow = 0.0;
    std::vector<double> log_pf;
    std::vector<double> log_pb;
};

// Conditional flow model: a single net over [state encoding | outcome encoding]
// with heads [log F(s|y) | P_F(.|s,y) logits | P_B(.|s,y) logits].
template <class Env>
class CondFlowModel {
public:
    CondFlowModel() = default;

    CondFlowModel(const Env& env, const std::vector<int>& hidden, nn::Activation act,
                  uint64_t seed)
        : env_(&env) {
        std::vector<int> sizes;
        sizes.push_back(2 * env.encoding_dim());
        for (int h : hidden) sizes.push_back(h);
        sizes.push_back(1 + 2 * env.num_actions());
        net_ = nn::Mlp(sizes, act, seed);
    }

    const Env& env() const { return *env_; }
    nn::Mlp& net() { return net_; }
    const nn::Mlp& net() const { return net_; }

    std::vector<double> encode_outcome(const typename Env::State& y) const {
        std::vector<double> enc(env_->encoding_dim());
        env_->encode(y, enc.data());
        return enc;
    }

    // training-path evaluation with cache; terminal convention applied
    void evaluate(const typename Env::State& s, std::span<const double> y_enc,
                  gfn::StateEval& ev) const {
        const int A = env_->num_actions();
        const int d = env_->encoding_dim();
        enc_.resize(2 * d);
        env_->encode(s, enc_.data());
        std::copy(y_enc.begin(), y_enc.end(), enc_.begin() + d);
        net_.forward_cached(enc_, ev.cache, ev.out);
        ev.log_flow = env_->is_terminal(s) ? 0.0 : ev.out[0];
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

    void accumulate_grads(const gfn::StateEval& ev, const gfn::EvalGrad& g,
                          std::span<double> grad) const {
        const int A = env_->num_actions();
        dout_.assign(1 + 2 * A, 0.0);
        dout_[0] = g.d_log_flow;
        add_softmax_grads(g.d_log_pf, ev.pf, ev.legal_f, dout_.data() + 1);
        add_softmax_grads(g.d_log_pb, ev.pb, ev.legal_b, dout_.data() + 1 + A);
        net_.backward(ev.cache, dout_, grad);
    }

    void view(const typename Env::State& s, std::span<const double> y_enc, CondView& v) const {
        const int A = env_->num_actions();
        const int d = env_->encoding_dim();
        enc_.resize(2 * d);
        env_->encode(s, enc_.data());
        std::copy(y_enc.begin(), y_enc.end(), enc_.begin() + d);
        net_.forward(enc_, out_);
        v.log_flow = env_->is_terminal(s) ? 0.0 : out_[0];
        env_->legal_actions(s, legal_f_);
        env_->legal_back_actions(s, legal_b_);
        std::span<const double> pf_logits(out_.data() + 1, A);
        std::span<const double> pb_logits(out_.data() + 1 + A, A);
        if (!legal_f_.empty())
            nn::masked_log_softmax(pf_logits, legal_f_, v.log_pf, p_scratch_);
        else
            v.log_pf.assign(A, kNegInf);
        if (!legal_b_.empty())
            nn::masked_log_softmax(pb_logits, legal_b_, v.log_pb, p_scratch_);
        else
            v.log_pb.assign(A, kNegInf);
    }

    void view(const typename Env::State& s, const typename Env::State& y, CondView& v) const {
        y_enc_ = encode_outcome(y);
        view(s, y_enc_, v);
    }

private:
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
    mutable std::vector<double> enc_, out_, y_enc_, p_scratch_, dout_;
    mutable std::vector<int> legal_f_, legal_b_;
};

// Conditional model held as explicit tables over an enumerated state space,
// e.g. the analytic flows built by the proposition-4.1 oracle. Terminal flows
// store the indicator R(x|y). Backward policy is uniform over parents.
template <class Env>
class TabularCondModel {
public:
    TabularCondModel(const Env& env, std::vector<typename Env::State> states,
                     std::unordered_map<std::string, int> index)
        : env_(&env), states_(std::move(states)), index_(std::move(index)) {}

    const Env& env() const { return *env_; }
    const std::vector<typename Env::State>& states() const { return states_; }

    int state_id(const typename Env::State& s) const {
        auto it = index_.find(env_->state_key(s));
        if (it == index_.end()) throw std::runtime_error("TabularCondModel: unknown state");
        return it->second;
    }

    // filled per outcome by the oracle construction
    void set_outcome_table(int y_cell, std::vector<double> flows,
                           std::vector<std::vector<double>> pf) {
        if (tables_.count(y_cell)) throw std::runtime_error("outcome table already set");
        tables_[y_cell] = {std::move(flows), std::move(pf)};
    }

    bool has_outcome(int y_cell) const { return tables_.count(y_cell) > 0; }

    double flow(const typename Env::State& s, const typename Env::State& y) const {
        return table_for(y).flows[state_id(s)];
    }

    void view(const typename Env::State& s, const typename Env::State& y, CondView& v) const {
        const auto& tab = table_for(y);
        const int sid = state_id(s);
        const int A = env_->num_actions();
        const double f = tab.flows[sid];
        v.log_flow = f > 0.0 ? std::log(f) : kNegInf;
        v.log_pf.assign(A, kNegInf);
        v.log_pb.assign(A, kNegInf);
        if (!env_->is_terminal(s)) {
            const auto& pf = tab.pf[sid];
            for (int a = 0; a < A; ++a)
                if (pf[a] > 0.0) v.log_pf[a] = std::log(pf[a]);
        }
        std::vector<int> back;
        env_->legal_back_actions(s, back);
        if (!back.empty()) {
            const double lp = -std::log(static_cast<double>(back.size()));
            for (int a : back) v.log_pb[a] = lp;
        }
    }

private:
    struct Table {
        std::vector<double> flows;            // per state id; terminals hold 1{x==y}
        std::vector<std::vector<double>> pf;  // per state id, dense over actions
    };

    const Table& table_for(const typename Env::State& y) const {
        auto it = tables_.find(static_cast<int>(env_->cell_index(y)));
        if (it == tables_.end())
            throw std::runtime_error("TabularCondModel: outcome table missing");
        return it->second;
    }

    const Env* env_;
    std::vector<typename Env::State> states_;
    std::unordered_map<std::string, int> index_;
    std::unordered_map<int, Table> tables_;
};

} // namespace ocgfn::cond
