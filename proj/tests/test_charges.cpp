#include <doctest.h>

#include <cmath>

#include <limits>

#include "copoly/charges.hpp"
#include "copoly/rng.hpp"
#include "copoly/spectral.hpp"
#include "test_util.hpp"

using namespace copoly;
using copoly_test::cached_walk;

TEST_CASE("normalize: zero environment") {
    CycleCharges c = normalize({{0.0}, {0.0}, {0.0}, {0.0}});
    CHECK(c.period == 1);
    CHECK(c.h == 0.0);
    CHECK_FALSE(c.flipped);
}

TEST_CASE("normalize: gauge zeroes the plus charges") {
    CycleCharges c = normalize({{1.0, 0.0}, {0.0}, {0.0}, {0.0}});
    CHECK(c.period == 2);
    CHECK(c.h == doctest::Approx(0.5).epsilon(1e-15));
    for (double v : c.w_plus) CHECK(v == 0.0);
    // Stored minus = omega^- - omega^+ : -1 at odd positions (class 1), 0 at even.
    CHECK(c.w_minus[1] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(c.w_minus[0] == 0.0);
}

TEST_CASE("normalize: negative drift flips the environment") {
    CycleCharges c = normalize({{0.0, -1.0}, {0.0, 1.0}, {0.0}, {0.0}});
    CHECK(c.flipped);
    CHECK(c.h == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("normalize rejects bad input") {
    CHECK_THROWS_AS(normalize({{}, {0.0}, {0.0}, {0.0}}), std::invalid_argument);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(normalize({{inf}, {0.0}, {0.0}, {0.0}}), std::invalid_argument);
}

TEST_CASE("sigma matrix: defining identity and cocycle") {
    // T = 2, plus = 1 on odd positions: h = 1/2, Sigma_{[0],[1]} = -1/2.
    CycleCharges c = normalize({{1.0, 0.0}, {0.0}, {0.0}, {0.0}});
    Mat s = sigma_matrix(c);
    CHECK(s(0, 1) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(s(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s(0, 0) == 0.0);
    CHECK(s(1, 1) == 0.0);

    // Random T = 3 instance: cocycle holds exactly and the defining sum of
    // gauged charges reproduces each entry.
    Rng rng(7);
    RawCharges raw;
    for (auto* seq : {&raw.plus, &raw.minus, &raw.zero, &raw.zero_tilde}) {
        seq->resize(3);
        for (double& v : *seq) v = 2.0 * rng.u01() - 1.0;
    }
    CycleCharges c3 = normalize(raw);
    Mat s3 = sigma_matrix(c3);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
            for (std::size_t g = 0; g < 3; ++g)
                CHECK(s3(a, b) + s3(b, g) == doctest::Approx(s3(a, g)).epsilon(1e-15));
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            const std::size_t span = (b + 3 - a) % 3;
            double acc = 0.0;
            for (std::size_t n = a + 1; n <= a + span; ++n)
                acc += c3.w_minus[n % 3] - c3.w_plus[n % 3];
            CHECK(acc == doctest::Approx(-double(span) * c3.h + s3(a, b)).epsilon(1e-13));
        }
}

TEST_CASE("phi: trivial values") {
    CycleCharges zero = normalize({{0.0}, {0.0}, {0.0}, {0.0}});
    CHECK(phi(zero, 0, 1) == 0.0);
    CHECK(phi(zero, 0, 2) == doctest::Approx(0.0).epsilon(1e-15));

    CycleCharges pin = normalize({{0.0}, {0.0}, {-1.0}, {0.0}});
    CHECK(phi(pin, 0, 5) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("m kernel reduces to the walk law for zero charges") {
    WalkLaw walk = first_return_law(0.3, 512);
    CycleCharges zero = normalize({{0.0}, {0.0}, {0.0}, {0.0}});
    KernelSet ks = build_kernel_set(zero, walk, {.n_max = 256, .with_tail = false});
    for (std::size_t n = 1; n <= 256; ++n)
        CHECK(ks.m[0][n] == doctest::Approx(walk.ret[n]).epsilon(1e-14));
}

TEST_CASE("m kernel matches an independent scalar evaluation") {
    WalkLaw walk = first_return_law(0.3, 64);
    Rng rng(11);
    RawCharges raw;
    for (auto* seq : {&raw.plus, &raw.minus, &raw.zero, &raw.zero_tilde}) {
        seq->resize(2);
        for (double& v : *seq) v = 2.0 * rng.u01() - 1.0;
    }
    CycleCharges c = normalize(raw);
    KernelSet ks = build_kernel_set(c, walk, {.n_max = 16, .with_tail = false});
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t n = 1; n <= 12; ++n) {
            // Re-evaluate the excursion weight from scratch.
            const std::size_t b = (a + n) % 2;
            double expect;
            if (n == 1) {
                expect = std::exp(c.w_zero[b] + c.w_zero_tilde[b]) * walk.ret[1];
            } else {
                expect = std::exp(c.w_zero[b]) * 0.5 *
                         (1.0 + std::exp(-double(n) * c.h + c.sigma(a, b))) * walk.ret[n];
            }
            CHECK(ks.m[a][n] == doctest::Approx(expect).epsilon(1e-13));
        }
}

TEST_CASE("b matrix: zero charges are exactly critical") {
    const WalkLaw& walk = copoly_test::cached_walk(0.3);
    CycleCharges zero = normalize({{0.0}, {0.0}, {0.0}, {0.0}});
    KernelSet ks = build_kernel_set(zero, walk, {});
    CHECK(ks.tail_corrected);
    CHECK(std::fabs(ks.b(0, 0) - 1.0) < 1e-13);

    // T = 2 zero charges: rows of B sum to 1.
    CycleCharges zero2 = normalize({{0.0, 0.0}, {0.0}, {0.0}, {0.0}});
    KernelSet ks2 = build_kernel_set(zero2, walk, {});
    for (std::size_t a = 0; a < 2; ++a)
        CHECK(std::fabs(ks2.b(a, 0) + ks2.b(a, 1) - 1.0) < 1e-10);
}

TEST_CASE("b matrix: homogeneous pinning is a scalar multiple") {
    const WalkLaw& walk = copoly_test::cached_walk(0.3);
    CycleCharges pin = normalize({{0.0}, {0.0}, {0.7}, {0.0}});
    KernelSet ks = build_kernel_set(pin, walk, {});
    CHECK(ks.b(0, 0) == doctest::Approx(std::exp(0.7)).epsilon(1e-12));
}

TEST_CASE("l matrices: shapes of the tail amplitudes") {
    const WalkLaw& walk = copoly_test::cached_walk(0.3);
    CycleCharges zero = normalize({{0.0}, {0.0}, {0.0}, {0.0}});
    KernelSet ks = build_kernel_set(zero, walk, {});
    CHECK(ks.l_tilde(0, 0) == doctest::Approx(2.0 * walk.c_tail).epsilon(1e-14));
    CHECK(ks.l(0, 0) == doctest::Approx(walk.c_tail).epsilon(1e-14));

    // Positive drift: open amplitude collapses to c_K.
    CycleCharges drift = normalize({{0.4}, {0.0}, {-0.2}, {0.0}});
    KernelSet ksd = build_kernel_set(drift, walk, {});
    CHECK(ksd.l_tilde(0, 0) == doctest::Approx(walk.c_tail).epsilon(1e-14));
    CHECK(ksd.l(0, 0) == doctest::Approx(0.5 * std::exp(-0.2) * walk.c_tail).epsilon(1e-14));
}

TEST_CASE("x^{3/2} M(x) approaches the completed-return amplitude") {
    const WalkLaw& walk = copoly_test::cached_walk(0.3);
    Rng rng(23);
    RawCharges raw;
    for (auto* seq : {&raw.plus, &raw.minus, &raw.zero, &raw.zero_tilde}) {
        seq->resize(2);
        for (double& v : *seq) v = rng.u01() - 0.5;
    }
    CycleCharges c = normalize(raw);
    KernelSet ks = build_kernel_set(c, walk, {});
    const std::size_t x = 10000;
    for (std::size_t a = 0; a < 2; ++a) {
        const std::size_t b = (a + x) % 2;
        const double lim = ks.l(a, b);
        const double val = std::pow(double(x), 1.5) * ks.m[a][x];
        CHECK(std::fabs(val / lim - 1.0) < 0.02);
    }
}

TEST_CASE("copolymer with vanishing drift and live cocycle localizes") {
    const WalkLaw& walk = copoly_test::cached_walk(0.3);
    Rng rng(31);
    for (int inst = 0; inst < 5; ++inst) {
        const double amp = 0.2 + rng.u01();
        RawCharges raw{{amp, -amp}, {-amp, amp}, {0.0}, {0.0}};
        CycleCharges c = normalize(raw);
        CHECK(c.h_is_zero());
        KernelSet ks = build_kernel_set(c, walk, {});
        CHECK(pf_eigen(ks.b).z > 1.0);
    }
}

TEST_CASE("in_p_less gating") {
    const WalkLaw& walk = copoly_test::cached_walk(0.3);
    CycleCharges zero = normalize({{0.0}, {0.0}, {0.0}, {0.0}});
    CHECK_FALSE(in_p_less(zero, 1.0));

    // Pinning: sigma vanishes identically, never in P^<.
    CycleCharges pin = normalize({{0.0}, {0.0}, {-1.0}, {0.0}});
    CHECK_FALSE(in_p_less(pin, std::exp(-1.0)));

    // h > 0 blocks membership even with delta < 1.
    CycleCharges drift = normalize({{0.5}, {0.0}, {-1.0}, {0.0}});
    CHECK_FALSE(in_p_less(drift, 0.5));

    // h = 0, sigma alive, delta < 1: inside.
    CycleCharges live = normalize({{0.0}, {0.7, -0.7}, {-1.2}, {0.0}});
    KernelSet ks = build_kernel_set(live, walk, {});
    const double delta = pf_eigen(ks.b).z;
    CHECK(delta < 1.0);
    CHECK(in_p_less(live, delta));
}
