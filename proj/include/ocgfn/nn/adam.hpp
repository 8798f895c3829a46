#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ocgfn/common.hpp"

namespace ocgfn::nn {

// Bias-corrected Adam over a flat parameter vector.
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    std::vector<double> m, v;

    explicit AdamState(double learning_rate = 1e-3) : lr(learning_rate) {}

    void ensure_size(size_t n) {
        if (m.size() != n) {
            m.assign(n, 0.0);
            v.assign(n, 0.0);
            step = 0;
        }
    }
};

inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& st,
                      const std::string& name = "params") {
    st.ensure_size(params.size());
    st.step += 1;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    for (size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        if (!std::isfinite(g))
            throw std::runtime_error("non-finite gradient in " + name + " at parameter " +
                                     std::to_string(i));
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * g;
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * g * g;
        const double mhat = st.m[i] / bc1;
        const double vhat = st.v[i] / bc2;
        params[i] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
    }
}

} // namespace ocgfn::nn
