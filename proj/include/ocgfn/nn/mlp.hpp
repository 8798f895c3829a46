#pragma once

#include <cmath>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "ocgfn/common.hpp"

namespace ocgfn::nn {

enum class Activation { leaky_relu, relu };

inline const char* activation_name(Activation a) {
    return a == Activation::leaky_relu ? "leaky_relu" : "relu";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "leaky_relu") return Activation::leaky_relu;
    if (s == "relu") return Activation::relu;
    throw std::invalid_argument("unknown activation: " + s);
}

constexpr double kLeakySlope = 0.01;

// Plain feedforward net on a single flat parameter vector (per layer: weight
// matrix row-major [out][in], then bias). Activation applied between layers,
// never on the output layer. Initialization is Kaiming-style uniform fan-in,
// fully determined by the seed.
class Mlp {
public:
    Mlp() = default;

    Mlp(std::vector<int> layer_sizes, Activation act, uint64_t seed)
        : sizes_(std::move(layer_sizes)), act_(act) {
        if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least in/out sizes");
        size_t total = 0;
        for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
            offsets_.push_back(total);
            total += static_cast<size_t>(sizes_[l + 1]) * sizes_[l] + sizes_[l + 1];
        }
        params_.assign(total, 0.0);
        Rng rng(seed);
        for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
            double bound = std::sqrt(6.0 / sizes_[l]);
            double* w = params_.data() + offsets_[l];
            for (int i = 0; i < sizes_[l + 1] * sizes_[l]; ++i) w[i] = rng.uniform(-bound, bound);
            // biases start at zero
        }
    }

    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
    const std::vector<int>& layer_sizes() const { return sizes_; }
    Activation activation() const { return act_; }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    struct Cache {
        // acts[0] = input, acts[l] = post-activation output of layer l,
        // acts[L] = raw output; pre[l] = pre-activation of hidden layer l
        std::vector<std::vector<double>> acts;
        std::vector<std::vector<double>> pre;
    };

    void forward(std::span<const double> x, std::vector<double>& out) const {
        scratch_a_.assign(x.begin(), x.end());
        for (int l = 0; l < num_layers(); ++l) {
            affine(l, scratch_a_, scratch_b_);
            if (l + 1 < num_layers()) activate(scratch_b_);
            scratch_a_.swap(scratch_b_);
        }
        out = scratch_a_;
    }

    void forward_cached(std::span<const double> x, Cache& c, std::vector<double>& out) const {
        const int L = num_layers();
        c.acts.resize(L + 1);
        c.pre.resize(L);
        c.acts[0].assign(x.begin(), x.end());
        for (int l = 0; l < L; ++l) {
            affine(l, c.acts[l], c.pre[l]);
            c.acts[l + 1] = c.pre[l];
            if (l + 1 < L) activate(c.acts[l + 1]);
        }
        out = c.acts[L];
    }

    // accumulates d(loss)/d(params) into grad; dout = d(loss)/d(raw output)
    void backward(const Cache& c, std::span<const double> dout, std::span<double> grad) const {
        const int L = num_layers();
        std::vector<double> g(dout.begin(), dout.end());
        std::vector<double> gprev;
        for (int l = L - 1; l >= 0; --l) {
            const int nout = sizes_[l + 1], nin = sizes_[l];
            const double* w = params_.data() + offsets_[l];
            double* gw = grad.data() + offsets_[l];
            double* gb = gw + static_cast<size_t>(nout) * nin;
            const std::vector<double>& in = c.acts[l];
            gprev.assign(nin, 0.0);
            for (int o = 0; o < nout; ++o) {
                const double go = g[o];
                if (go == 0.0) continue;
                const double* wrow = w + static_cast<size_t>(o) * nin;
                double* gwrow = gw + static_cast<size_t>(o) * nin;
                for (int i = 0; i < nin; ++i) {
                    gwrow[i] += go * in[i];
                    gprev[i] += go * wrow[i];
                }
                gb[o] += go;
            }
            if (l > 0) {
                const std::vector<double>& pre = c.pre[l - 1];
                for (int i = 0; i < nin; ++i)
                    gprev[i] *= act_deriv(pre[i]);
            }
            g.swap(gprev);
        }
    }

private:
    void affine(int l, const std::vector<double>& in, std::vector<double>& out) const {
        const int nout = sizes_[l + 1], nin = sizes_[l];
        const double* w = params_.data() + offsets_[l];
        const double* b = w + static_cast<size_t>(nout) * nin;
        out.resize(nout);
        for (int o = 0; o < nout; ++o) {
            const double* wrow = w + static_cast<size_t>(o) * nin;
            double acc = 0.0;
            for (int i = 0; i < nin; ++i) acc += wrow[i] * in[i];
            out[o] = acc + b[o];
        }
    }

    void activate(std::vector<double>& v) const {
        if (act_ == Activation::relu) {
            for (double& x : v) x = x > 0.0 ? x : 0.0;
        } else {
            for (double& x : v) x = x > 0.0 ? x : kLeakySlope * x;
        }
    }

    double act_deriv(double pre) const {
        if (act_ == Activation::relu) return pre > 0.0 ? 1.0 : 0.0;
        return pre > 0.0 ? 1.0 : kLeakySlope;
    }

    std::vector<int> sizes_;
    Activation act_ = Activation::leaky_relu;
    std::vector<size_t> offsets_;
    std::vector<double> params_;
    mutable std::vector<double> scratch_a_, scratch_b_;
};

// log-softmax restricted to the legal index set; illegal entries get -inf.
// Writes probabilities (0 on illegal) alongside for gradient computation.
inline void masked_log_softmax(std::span<const double> logits, std::span<const int> legal,
                               std::vector<double>& log_p, std::vector<double>& p) {
    log_p.assign(logits.size(), kNegInf);
    p.assign(logits.size(), 0.0);
    double m = kNegInf;
    for (int a : legal) m = std::max(m, logits[a]);
    double z = 0.0;
    for (int a : legal) z += std::exp(logits[a] - m);
    double log_z = m + std::log(z);
    for (int a : legal) {
        log_p[a] = logits[a] - log_z;
        p[a] = std::exp(log_p[a]);
    }
}

} // namespace ocgfn::nn
