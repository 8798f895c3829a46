#pragma once

#include <cmath>
#include <vector>

#include "ocgfn/nn/adam.hpp"
#include "ocgfn/nn/mlp.hpp"

namespace ocgfn::gfn {

// Random network distillation: intrinsic reward is the distance between a
// frozen random target embedding and a trained predictor embedding. Novel
// states have a large prediction error, which decays as they are revisited.
template <class Env>
class RndPair {
public:
    RndPair() = default;

    RndPair(const Env& env, const std::vector<int>& hidden, int embed_dim, double coefficient,
            double lr, uint64_t seed)
        : env_(&env), coef_(coefficient), opt_(lr) {
        std::vector<int> sizes;
        sizes.push_back(env.encoding_dim());
        for (int h : hidden) sizes.push_back(h);
        sizes.push_back(embed_dim);
        target_ = nn::Mlp(sizes, nn::Activation::leaky_relu, Rng::derive(seed, 1));
        predictor_ = nn::Mlp(sizes, nn::Activation::leaky_relu, Rng::derive(seed, 2));
    }

    double coefficient() const { return coef_; }
    nn::Mlp& predictor() { return predictor_; }
    const nn::Mlp& predictor() const { return predictor_; }
    nn::Mlp& target() { return target_; }

    // coef * ||target(s) - predictor(s)||_2
    double intrinsic(const typename Env::State& s) const {
        encode(s);
        target_.forward(enc_, t_out_);
        predictor_.forward(enc_, p_out_);
        return coef_ * distance(t_out_, p_out_);
    }

    // one Adam step on the mean squared embedding distance over a state batch
    template <class States>
    double update(const States& states) {
        grad_.assign(predictor_.params().size(), 0.0);
        double loss = 0.0;
        size_t count = 0;
        nn::Mlp::Cache cache;
        std::vector<double> dout;
        for (const auto& s : states) {
            encode(s);
            target_.forward(enc_, t_out_);
            predictor_.forward_cached(enc_, cache, p_out_);
            dout.resize(p_out_.size());
            double sq = 0.0;
            for (size_t i = 0; i < p_out_.size(); ++i) {
                const double d = p_out_[i] - t_out_[i];
                sq += d * d;
                dout[i] = 2.0 * d;
            }
            loss += sq;
            count += 1;
            predictor_.backward(cache, dout, grad_);
        }
        if (count == 0) return 0.0;
        const double inv = 1.0 / static_cast<double>(count);
        loss *= inv;
        for (double& g : grad_) g *= inv;
        nn::adam_step(predictor_.params(), grad_, opt_, "rnd_predictor");
        return loss;
    }

private:
    void encode(const typename Env::State& s) const {
        enc_.resize(env_->encoding_dim());
        env_->encode(s, enc_.data());
    }

    static double distance(const std::vector<double>& a, const std::vector<double>& b) {
        double sq = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            sq += d * d;
        }
        return std::sqrt(sq);
    }

    const Env* env_ = nullptr;
    double coef_ = 1.0;
    nn::Mlp target_, predictor_;
    nn::AdamState opt_;
    mutable std::vector<double> enc_, t_out_, p_out_;
    std::vector<double> grad_;
};

} // namespace ocgfn::gfn
