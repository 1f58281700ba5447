#pragma once

#include <cmath>

#include "taskcodec/common.hpp"

namespace taskcodec {

// Laplace CDF with location 0 and scale sigma.
inline double laplace_cdf(double t, double sigma) {
    if (t < 0.0) return 0.5 * std::exp(t / sigma);
    return 1.0 - 0.5 * std::exp(-t / sigma);
}

// Mass of the unit-width bin centred at v_hat under Laplace(mu, sigma):
// F(v_hat - mu + 0.5) - F(v_hat - mu - 0.5). Evaluated in closed form on
// whichever tail avoids cancellation. Exact value — likelihood floors for
// coding stability are applied by the rate/coding layer, not here.
inline double laplace_bin_probability(double v_hat, double mu, double sigma) {
    require(sigma > 0.0, ErrorKind::Internal, "laplace_bin_probability: sigma must be positive");
    const double d = v_hat - mu;
    const double a = std::fabs(d);
    if (a >= 0.5) {
        // Bin entirely in one tail.
        return 0.5 * std::exp(-(a - 0.5) / sigma) * (1.0 - std::exp(-1.0 / sigma));
    }
    // Bin straddles the mode.
    return 1.0 - 0.5 * std::exp(-(0.5 + d) / sigma) - 0.5 * std::exp(-(0.5 - d) / sigma);
}

struct LaplaceBinGrad {
    double p;         // bin probability
    double dp_dd;     // derivative w.r.t. d = v_hat - mu
    double dp_dsigma;
};

inline LaplaceBinGrad laplace_bin_probability_grad(double v_hat, double mu, double sigma) {
    const double d = v_hat - mu;
    const double hi = d + 0.5, lo = d - 0.5;
    // f(t) = pdf, dF/dsigma = -(t / (2 sigma^2)) e^{-|t|/sigma}
    const double e_hi = std::exp(-std::fabs(hi) / sigma);
    const double e_lo = std::exp(-std::fabs(lo) / sigma);
    LaplaceBinGrad g;
    g.p = laplace_bin_probability(v_hat, mu, sigma);
    g.dp_dd = (e_hi - e_lo) / (2.0 * sigma);
    g.dp_dsigma = -(hi * e_hi - lo * e_lo) / (2.0 * sigma * sigma);
    return g;
}

}  // namespace taskcodec
