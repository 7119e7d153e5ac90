#include "copoly/walk.hpp"

#include <cmath>
#include <stdexcept>

namespace copoly {

namespace {

// Height cap for the excursion DP. Mass above 10 sigma sqrt(n) is < 1e-21
// of the excursion weight, far below the double resolution of K(n).
std::size_t height_cap(double p, std::size_t n_max) {
    const double sigma2 = 2.0 * p;
    const std::size_t h = static_cast<std::size_t>(10.0 * std::sqrt(sigma2 * double(n_max))) + 16;
    return std::min(h, n_max + 1);
}

}  // namespace

WalkLaw first_return_law(double p, std::size_t n_max) {
    if (!(p > 0.0) || !(p < 0.5))
        throw std::invalid_argument("first_return_law: p must lie strictly inside (0, 1/2)");
    if (n_max < 2) throw std::invalid_argument("first_return_law: n_max must be >= 2");

    WalkLaw law;
    law.p = p;
    law.n_max = n_max;
    law.ret.assign(n_max + 1, 0.0);
    law.ret[1] = 1.0 - 2.0 * p;
    if (n_max >= 2) law.ret[2] = 2.0 * p * p;

    // w[h] = weight of lazy paths 1 -> h in t steps staying >= 1.
    // K(t+2) = 2 p^2 w_t(1): enter at 1, wander, exit from 1, both signs.
    const std::size_t cap = height_cap(p, n_max);
    std::vector<double> w(cap + 2, 0.0), next(cap + 2, 0.0);
    w[1] = 1.0;
    const double stay = 1.0 - 2.0 * p;
    for (std::size_t t = 1; t + 2 <= n_max; ++t) {
        const std::size_t hi = std::min(cap, t + 1);
        for (std::size_t h = 1; h <= hi; ++h) {
            double acc = stay * w[h] + p * w[h + 1];
            if (h >= 2) acc += p * w[h - 1];
            next[h] = acc;
        }
        for (std::size_t h = 1; h <= hi; ++h) w[h] = next[h];
        law.ret[t + 2] = 2.0 * p * p * w[1];
    }

    // Survival table as 1 minus a compensated running sum.
    law.surv.assign(n_max + 1, 0.0);
    double sum = 0.0, comp = 0.0;
    law.surv[0] = 1.0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        const double y = law.ret[n] - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        law.surv[n] = 1.0 - sum;
    }

    law.c_tail = tail_constant(law, &law.c_tail_residual);
    law.c_tail_converged = law.c_tail_residual <= 1e-3;
    return law;
}

double tail_constant(const WalkLaw& law, double* rel_change) {
    if (law.n_max < 64) throw std::invalid_argument("tail_constant: table too short to extrapolate");
    const auto g = [&law](std::size_t n) {
        return law.ret[n] * std::pow(double(n), 1.5);
    };
    const std::size_t n2 = law.n_max, n1 = n2 / 2, n0 = n2 / 4;
    // K(n) n^{3/2} = c (1 + a/n + O(n^{-3/2})): eliminate 1/n, then the rest
    // with an exponent-2 step.
    const double r0 = 2.0 * g(n1) - g(n0);
    const double r1 = 2.0 * g(n2) - g(n1);
    const double r2 = (4.0 * r1 - r0) / 3.0;
    if (rel_change != nullptr) *rel_change = std::fabs(r2 - r1) / std::max(std::fabs(r2), 1e-300);
    return r2;
}

double WalkLaw::tail_mass(std::size_t l) const {
    if (l <= n_max) return surv[l];
    return 2.0 * c_tail / std::sqrt(double(l) + 0.5);
}

double zero_return_probability(double p, std::size_t n) {
    if (n == 0) return 1.0;
    if (n <= 4096) {
        // Height-space DP on |S|; prob[h] = P(S_t = h), h >= 0 by symmetry.
        std::vector<double> prob(n + 2, 0.0), next(n + 2, 0.0);
        prob[0] = 1.0;
        const double stay = 1.0 - 2.0 * p;
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t hi = std::min(n, t + 1);
            next[0] = stay * prob[0] + p * prob[1];
            for (std::size_t h = 1; h <= hi; ++h)
                next[h] = stay * prob[h] + p * prob[h + 1] + p * (h == 1 ? 2.0 * prob[0] : prob[h - 1]);
            std::swap(prob, next);
        }
        return prob[0];
    }
    // P(S_n = 0) = sum_k n! / (k! k! (n-2k)!) p^{2k} (1-2p)^{n-2k}.
    const double lp = std::log(p), lq = std::log1p(-2.0 * p), lgn = std::lgamma(double(n) + 1.0);
    double best = -1e308;
    std::vector<double> terms;
    terms.reserve(n / 2 + 1);
    for (std::size_t k = 0; 2 * k <= n; ++k) {
        const double lt = lgn - 2.0 * std::lgamma(double(k) + 1.0) -
                          std::lgamma(double(n - 2 * k) + 1.0) + 2.0 * double(k) * lp +
                          double(n - 2 * k) * lq;
        terms.push_back(lt);
        best = std::max(best, lt);
    }
    double acc = 0.0;
    for (double lt : terms) acc += std::exp(lt - best);
    return std::exp(best) * acc;
}

long long ConditionedWalk::step(long long x, Rng& rng) const {
    const double u = rng.u01();
    if (u < up(x)) return x + 1;
    if (u < up(x) + stay(x)) return x;
    return x - 1;
}

ConditionedWalk conditioned_step_kernel(double p) {
    if (!(p > 0.0) || !(p < 0.5))
        throw std::invalid_argument("conditioned_step_kernel: p must lie strictly inside (0, 1/2)");
    return ConditionedWalk{p};
}

}  // namespace copoly
