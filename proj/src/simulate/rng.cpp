#include "proxopt/rng.hpp"
#include "proxopt/types.hpp"

#include <cmath>
#include <numbers>

namespace proxopt {

double SeededRng::normal()
{
    // Box-Muller, cosine branch only; one normal per two uniforms keeps the
    // stream position a pure function of the number of draws.
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
}

long long SeededRng::poisson(double rate)
{
    if (!(rate >= 0.0) || !std::isfinite(rate))
        throw InvalidArgument("poisson: rate must be finite and >= 0");
    if (rate == 0.0) return 0;

    if (rate < 10.0) {
        // inversion by sequential search
        long long k = 0;
        double p = std::exp(-rate);
        double cdf = p;
        const double u = uniform();
        while (u > cdf && k < 1000) {
            ++k;
            p *= rate / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    // PTRS transformed rejection (Hormann 1993)
    const double slam = std::sqrt(rate);
    const double loglam = std::log(rate);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double U = uniform() - 0.5;
        const double V = uniform_open();
        const double us = 0.5 - std::abs(U);
        const double k = std::floor((2.0 * a / us + b) * U + rate + 0.43);
        if (us >= 0.07 && V <= vr) return static_cast<long long>(k);
        if (k < 0.0 || (us < 0.013 && V > us)) continue;
        if (std::log(V) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -rate + k * loglam - std::lgamma(k + 1.0))
            return static_cast<long long>(k);
    }
}

} // namespace proxopt
