#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace ocgfn::nn {

struct GradCheckReport {
    double max_rel_err = 0.0;
    size_t checked = 0;
    size_t skipped_nonsmooth = 0;
};

// Central finite differences against analytic gradients, h scaled per
// parameter. Parameters whose one-sided differences disagree straddle an
// activation kink and are excluded from the comparison.
inline GradCheckReport grad_check(std::span<double> params, std::span<const double> analytic,
                                  const std::function<double()>& eval, double h = 1e-5) {
    GradCheckReport rep;
    const double f0 = eval();
    for (size_t i = 0; i < params.size(); ++i) {
        const double w = params[i];
        const double hi = h * std::max(1.0, std::abs(w));
        params[i] = w + hi;
        const double fp = eval();
        params[i] = w - hi;
        const double fm = eval();
        params[i] = w;
        const double gf = (fp - f0) / hi;
        const double gb = (f0 - fm) / hi;
        if (std::abs(gf - gb) > 0.05 * (std::abs(gf) + std::abs(gb)) + 1e-4) {
            rep.skipped_nonsmooth += 1;
            continue;
        }
        const double gc = (fp - fm) / (2.0 * hi);
        const double ga = analytic[i];
        const double rel = std::abs(ga - gc) / std::max(1e-3, std::abs(ga) + std::abs(gc));
        rep.max_rel_err = std::max(rep.max_rel_err, rel);
        rep.checked += 1;
    }
    return rep;
}

} // namespace ocgfn::nn
