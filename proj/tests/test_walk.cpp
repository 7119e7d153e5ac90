#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "copoly/rng.hpp"
#include "copoly/walk.hpp"
#include "test_util.hpp"

using namespace copoly;

namespace {

// Oracle: K(n) by enumeration of all 3^n step sequences.
double first_return_by_enumeration(double p, std::size_t n) {
    const double lp[3] = {p, 1.0 - 2.0 * p, p};
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 3;
    double acc = 0.0;
    std::vector<int> digits(n, 0);
    for (std::size_t code = 0; code < total; ++code) {
        long long s = 0;
        double w = 1.0;
        bool returned_early = false;
        for (std::size_t i = 0; i < n; ++i) {
            s += digits[i] - 1;
            w *= lp[digits[i]];
            if (s == 0 && i + 1 < n) {
                returned_early = true;
                break;
            }
        }
        if (!returned_early && s == 0) acc += w;
        for (std::size_t i = 0; i < n; ++i) {
            if (++digits[i] < 3) break;
            digits[i] = 0;
        }
    }
    return acc;
}

}  // namespace

TEST_CASE("first_return_law matches closed forms and enumeration") {
    const double p = 0.3;
    WalkLaw law = first_return_law(p, 4096);
    CHECK(law.ret[1] == doctest::Approx(1.0 - 2.0 * p).epsilon(1e-15));
    CHECK(law.ret[2] == doctest::Approx(2.0 * p * p).epsilon(1e-15));
    CHECK(law.ret[3] == doctest::Approx(2.0 * p * p * (1.0 - 2.0 * p)).epsilon(1e-15));

    for (std::size_t n = 1; n <= 12; ++n) {
        const double oracle = first_return_by_enumeration(p, n);
        CHECK(std::fabs(law.ret[n] - oracle) < 1e-14);
    }
}

TEST_CASE("first_return_law rejects bad arguments") {
    CHECK_THROWS_AS(first_return_law(0.0, 100), std::invalid_argument);
    CHECK_THROWS_AS(first_return_law(0.5, 100), std::invalid_argument);
    CHECK_THROWS_AS(first_return_law(0.3, 1), std::invalid_argument);
}

TEST_CASE("normalization: table plus survival is exactly one") {
    WalkLaw law = first_return_law(0.27, 20000);
    double sum = 0.0, comp = 0.0;
    for (std::size_t n = 1; n <= law.n_max; ++n) {
        const double y = law.ret[n] - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    CHECK(std::fabs(sum + law.surv[law.n_max] - 1.0) < 1e-12);
    CHECK(law.surv[0] == 1.0);
    for (std::size_t l = 1; l <= law.n_max; ++l) CHECK(law.surv[l] <= law.surv[l - 1]);
}

TEST_CASE("tail constant extrapolates to sqrt(p/pi)") {
    // The generating function gives K(n) n^{3/2} -> sqrt(p/pi); the code must
    // find that limit numerically without knowing it.
    for (double p : {0.1, 0.3}) {
        const WalkLaw& law = copoly_test::cached_walk(p, 100000);
        CHECK(law.c_tail_converged);
        const double oracle = std::sqrt(p / M_PI);
        CHECK(std::fabs(law.c_tail / oracle - 1.0) < 1e-4);
        CHECK(law.c_tail > 0.0);
    }
}

TEST_CASE("tail ratio decreases beyond n = 100") {
    const WalkLaw& law = copoly_test::cached_walk(0.3, 100000);
    const double c = law.c_tail;
    double prev = std::fabs(law.ret[100] * std::pow(100.0, 1.5) / c - 1.0);
    for (std::size_t n = 200; n <= 100000; n *= 2) {
        const double cur = std::fabs(law.ret[n] * std::pow(double(n), 1.5) / c - 1.0);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("tail_mass: table, analytic completion, partial sums") {
    const double p = 0.3;
    WalkLaw law = first_return_law(p, 1000);
    CHECK(law.tail_mass(0) == 1.0);
    CHECK(law.tail_mass(1) == doctest::Approx(1.0 - (1.0 - 2.0 * p)).epsilon(1e-14));
    // l = 3: 1 - K(1) - K(2) - K(3) from the brute-force values.
    const double expect = 1.0 - 0.4 - 0.18 - 0.072;
    CHECK(law.tail_mass(3) == doctest::Approx(expect).epsilon(1e-13));
    // Beyond the table the completion continues the power law.
    const double beyond = law.tail_mass(2000);
    CHECK(beyond == doctest::Approx(2.0 * law.c_tail / std::sqrt(2000.5)).epsilon(1e-14));
    CHECK(beyond < law.tail_mass(1000));
}

TEST_CASE("zero_return_probability: small-N enumeration and large-N consistency") {
    const double p = 0.3;
    // N = 2: stay-stay + up-down + down-up.
    const double expect2 = (1 - 2 * p) * (1 - 2 * p) + 2 * p * p;
    CHECK(zero_return_probability(p, 2) == doctest::Approx(expect2).epsilon(1e-15));
    // DP route (N <= 4096) against the multinomial route (forced via N > 4096):
    // compare both at the same N by the renewal identity instead.
    WalkLaw law = first_return_law(p, 5000);
    std::vector<double> u(5001, 0.0);
    u[0] = 1.0;
    for (std::size_t n = 1; n <= 5000; ++n) {
        double acc = 0.0;
        for (std::size_t m = 1; m <= n; ++m) acc += law.ret[m] * u[n - m];
        u[n] = acc;
    }
    CHECK(std::fabs(zero_return_probability(p, 4000) - u[4000]) < 1e-12);
    CHECK(std::fabs(zero_return_probability(p, 4999) - u[4999]) < 1e-12);
    // The two internal routes agree across the switchover.
    CHECK(zero_return_probability(p, 4096) ==
          doctest::Approx(zero_return_probability(p, 4097) / (u[4097] / u[4096])).epsilon(1e-10));
}

TEST_CASE("conditioned kernel: rows sum to one and harmonicity holds") {
    const double p = 0.3;
    ConditionedWalk cw = conditioned_step_kernel(p);
    CHECK(cw.up(0) == 1.0);
    CHECK(cw.up(1) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(cw.stay(1) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(cw.down(1) == 0.0);
    CHECK(cw.up(5) == doctest::Approx(0.36).epsilon(1e-15));
    CHECK(cw.down(5) == doctest::Approx(0.24).epsilon(1e-15));
    for (long long x = 1; x <= 50; ++x) {
        CHECK(cw.up(x) + cw.stay(x) + cw.down(x) == doctest::Approx(1.0).epsilon(1e-15));
        // Harmonicity of h(x) = x/p under the killed walk.
        const double lhs = p * double(x + 1) / p + (1 - 2 * p) * double(x) / p +
                           (x >= 2 ? p * double(x - 1) / p : 0.0);
        CHECK(lhs == doctest::Approx(double(x) / p).epsilon(1e-14));
    }
}

TEST_CASE("conditioned walk is transient: long run never revisits zero") {
    ConditionedWalk cw = conditioned_step_kernel(0.3);
    Rng rng(20240901);
    long long x = 0;
    long long run_min_after_burnin = 1 << 30;
    for (std::size_t step = 1; step <= 1000000; ++step) {
        x = cw.step(x, rng);
        if (step > 1000) run_min_after_burnin = std::min(run_min_after_burnin, x);
    }
    CHECK(run_min_after_burnin > 0);
}
