// First-return law and related kernels of the lazy simple random walk:
// steps +1, -1 with probability p each and 0 with probability 1-2p, p in (0,1/2).
#pragma once

#include <cstddef>
#include <vector>

#include "copoly/rng.hpp"

namespace copoly {

struct WalkLaw {
    double p = 0.0;
    std::size_t n_max = 0;
    // ret[n] = K(n) = P(first return to 0 at time n), n = 1..n_max; ret[0] unused.
    std::vector<double> ret;
    // surv[l] = Q(l) = P(no return within l steps) = sum_{t>l} K(t), l = 0..n_max.
    // Built as 1 - running sum, so Q(0) = 1 exactly and sum K + Q(n_max) = 1 exactly.
    std::vector<double> surv;
    double c_tail = 0.0;        // limit of K(n) n^{3/2}, by Richardson extrapolation
    bool c_tail_converged = false;
    double c_tail_residual = 0.0;  // relative change between the last two levels

    // Q(l); table for l <= n_max, analytic completion 2 c_tail (l+1/2)^{-1/2} beyond.
    double tail_mass(std::size_t l) const;
    // q(l) = Q(l)/2, the weight of one incomplete excursion of a fixed sign.
    double one_sided_tail(std::size_t l) const { return 0.5 * tail_mass(l); }
};

// Exact dynamic programming over excursion heights (positive excursions,
// doubled for the mirror, plus the lazy stay K(1) = 1-2p).
WalkLaw first_return_law(double p, std::size_t n_max);

// Richardson-extrapolated limit of K(n) n^{3/2} from the law's table.
// Fills *rel_change with the relative gap between the last two levels.
double tail_constant(const WalkLaw& law, double* rel_change = nullptr);

// P(S_N = 0): exact height-space DP for small N, log-multinomial sum for
// large N. Independent of the renewal recursion; used as an oracle.
double zero_return_probability(double p, std::size_t n);

// Step kernel of the walk conditioned to stay positive (Doob transform with
// harmonic h(x) = x/p for x >= 1). Rows sum to 1 exactly; from 0 the step to
// 1 is forced.
struct ConditionedWalk {
    double p = 0.0;

    // Probability of x -> x+1 / x -> x / x -> x-1.
    double up(long long x) const { return x == 0 ? 1.0 : p * double(x + 1) / double(x); }
    double stay(long long x) const { return x == 0 ? 0.0 : 1.0 - 2.0 * p; }
    double down(long long x) const { return x <= 1 ? 0.0 : p * double(x - 1) / double(x); }

    long long step(long long x, Rng& rng) const;
};

ConditionedWalk conditioned_step_kernel(double p);

}  // namespace copoly
