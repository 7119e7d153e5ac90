#include <doctest.h>

#include <cmath>

#include "copoly/charges.hpp"
#include "copoly/limits.hpp"
#include "copoly/partition.hpp"
#include "copoly/sampler.hpp"
#include "copoly/spectral.hpp"
#include "test_util.hpp"

using namespace copoly;
using copoly_test::cached_walk;
using copoly_test::random_raw;

namespace {

struct DelocInstance {
    CycleCharges charges;
    KernelSet ks;
    FreeEnergyReport rep;
    AsymptoticConstants ac;
    GibbsDecomposition gd;
};

DelocInstance make_deloc(const RawCharges& raw, const WalkLaw& walk) {
    DelocInstance di;
    di.charges = normalize(raw);
    di.ks = build_kernel_set(di.charges, walk, {});
    di.rep = free_energy(di.ks);
    di.ac = asymptotic_constants(di.ks, di.rep.delta);
    di.gd = gibbs_vectors(di.ks, di.ac, walk.c_tail);
    return di;
}

}  // namespace

TEST_CASE("classify: canonical instances") {
    CHECK(classify(1.0) == Regime::critical);
    CHECK(classify(std::exp(-1.0)) == Regime::strictly_delocalized);
    CHECK(classify(std::exp(0.5)) == Regime::localized);
}

TEST_CASE("asymptotic constants: scalar pinning algebra") {
    const WalkLaw& walk = cached_walk(0.3);
    DelocInstance di = make_deloc({{0.0}, {0.0}, {-1.0}, {0.0}}, walk);
    const double ck = walk.c_tail, d = std::exp(-1.0);
    CHECK(di.ac.resolvent_b(0, 0) == doctest::Approx(1.0 / (1.0 - d)).epsilon(1e-10));
    CHECK(di.ac.amp_c(0, 0) ==
          doctest::Approx(ck * d / ((1.0 - d) * (1.0 - d))).epsilon(1e-9));
    CHECK(di.ac.amp_f(0, 0) == doctest::Approx(2.0 * ck / (1.0 - d)).epsilon(1e-9));
}

TEST_CASE("asymptotic constants: rejected at and above criticality") {
    const WalkLaw& walk = cached_walk(0.3);
    CycleCharges zero = normalize({{0.0}, {0.0}, {0.0}, {0.0}});
    KernelSet ks = build_kernel_set(zero, walk, {});
    CHECK_THROWS_AS(asymptotic_constants(ks, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(asymptotic_constants(ks, 1.3), std::invalid_argument);
}

TEST_CASE("normalization identity B Lambda = Lambda - mu") {
    const WalkLaw& walk = cached_walk(0.3);
    Rng rng(57);
    int taken = 0;
    while (taken < 6) {
        RawCharges raw = random_raw(rng, 1 + taken % 3);
        raw.zero.assign(raw.zero.size(), -1.3);  // push into delta < 1
        CycleCharges c = normalize(raw);
        KernelSet ks = build_kernel_set(c, walk, {});
        const double delta = pf_eigen(ks.b).z;
        if (delta >= 1.0 - 1e-9) continue;
        ++taken;
        AsymptoticConstants ac = asymptotic_constants(ks, delta);
        for (auto [amp, esc] : {std::pair{&ac.amp_c, &ac.escape_amp_c},
                                std::pair{&ac.amp_f, &ac.escape_amp_f}}) {
            Mat lhs = ks.b * (*amp);
            Mat rhs = (*amp) - (*esc);
            CHECK((lhs - rhs).max_abs() <= 1e-10 * amp->max_abs());
        }
    }
}

TEST_CASE("defective kernel rows close to one, escape positive") {
    const WalkLaw& walk = cached_walk(0.3);
    DelocInstance di = make_deloc({{0.0}, {0.7, -0.7}, {-1.2}, {0.0}}, walk);
    for (std::size_t eta = 0; eta < 2; ++eta)
        for (Boundary a : {Boundary::constrained, Boundary::free_end}) {
            SemiMarkovKernel k = defective_kernel(di.ks, di.ac, eta, a);
            CHECK(k.defective);
            for (std::size_t al = 0; al < 2; ++al) {
                CHECK(k.escape[al] > 0.0);
                CHECK(std::fabs(k.row_mass(al) - 1.0) < 1e-10);
            }
        }
}

TEST_CASE("pinning: defective kernel independent of eta and boundary") {
    const WalkLaw& walk = cached_walk(0.3);
    DelocInstance di = make_deloc({{0.0}, {0.0}, {-1.0, -0.6}, {0.0}}, walk);
    CHECK_FALSE(in_p_less(di.charges, di.rep.delta));
    SemiMarkovKernel base = defective_kernel(di.ks, di.ac, 0, Boundary::constrained);
    for (std::size_t eta = 0; eta < 2; ++eta)
        for (Boundary a : {Boundary::constrained, Boundary::free_end}) {
            SemiMarkovKernel k = defective_kernel(di.ks, di.ac, eta, a);
            for (std::size_t al = 0; al < 2; ++al) {
                CHECK(k.escape[al] == doctest::Approx(base.escape[al]).epsilon(1e-10));
                for (std::size_t n = 1; n <= 64; ++n)
                    CHECK(k.hold[al][n] == doctest::Approx(base.hold[al][n]).epsilon(1e-10));
            }
        }
}

TEST_CASE("boundary-sensitive instance: kernels differ across eta") {
    const WalkLaw& walk = cached_walk(0.3);
    DelocInstance di = make_deloc({{0.0}, {0.7, -0.7}, {-1.2}, {0.0}}, walk);
    CHECK(in_p_less(di.charges, di.rep.delta));
    SemiMarkovKernel k0 = defective_kernel(di.ks, di.ac, 0, Boundary::free_end);
    SemiMarkovKernel k1 = defective_kernel(di.ks, di.ac, 1, Boundary::free_end);
    CHECK(std::fabs(k0.escape[0] - k1.escape[0]) > 1e-6);
}

TEST_CASE("gibbs vectors: cone membership and the linear combination") {
    const WalkLaw& walk = cached_walk(0.3);
    for (const RawCharges& raw :
         {RawCharges{{0.0}, {0.7, -0.7}, {-1.2}, {0.0}},
          RawCharges{{0.0}, {0.0}, {-1.0, -0.6}, {0.0}},
          RawCharges{{0.3}, {-0.3}, {-1.0}, {0.0}}}) {
        DelocInstance di = make_deloc(raw, walk);
        const std::size_t t = di.charges.period;
        // v+- in the cone: B v <= v componentwise.
        for (const std::vector<double>* v : {&di.gd.v_plus, &di.gd.v_minus}) {
            std::vector<double> bv = di.ks.b.apply(*v);
            for (std::size_t i = 0; i < t; ++i) CHECK(bv[i] <= (*v)[i]);
        }
        // x v+ + y v- reproduces the amplitude columns.
        for (std::size_t eta = 0; eta < t; ++eta)
            for (Boundary a : {Boundary::constrained, Boundary::free_end}) {
                const Mat& amp = a == Boundary::constrained ? di.ac.amp_c : di.ac.amp_f;
                for (std::size_t al = 0; al < t; ++al) {
                    const double recon = di.gd.x(eta, a) * di.gd.v_plus[al] +
                                         di.gd.y(eta, a) * di.gd.v_minus[al];
                    CHECK(std::fabs(recon - amp(al, eta)) <= 1e-10 * amp(al, eta));
                }
                const double r = di.gd.r(eta, a);
                CHECK(r >= 0.0);
                CHECK(r <= 1.0 + 1e-12);
            }
    }
}

TEST_CASE("pinning symmetry: r is exactly one half") {
    const WalkLaw& walk = cached_walk(0.3);
    DelocInstance di = make_deloc({{0.0}, {0.0}, {-1.0, -0.6}, {0.0}}, walk);
    for (std::size_t eta = 0; eta < 2; ++eta) {
        CHECK(di.gd.r_c[eta] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(di.gd.r_f[eta] == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("positive drift: the free-boundary weight hits the upper endpoint") {
    const WalkLaw& walk = cached_walk(0.3);
    DelocInstance di = make_deloc({{0.3}, {-0.3}, {-1.0}, {0.0}}, walk);
    CHECK(di.charges.h > 0.0);
    CHECK(di.gd.r_f[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("superposition identity is exact") {
    const WalkLaw& walk = cached_walk(0.3);
    DelocInstance di = make_deloc({{0.0}, {0.7, -0.7}, {-1.2}, {0.0}}, walk);
    const std::vector<std::vector<std::size_t>> cylinders = {
        {}, {2}, {1, 5}, {3, 4, 11}, {2, 3, 9}};
    for (double p_mix : {0.0, 0.37, 1.0}) {
        for (const auto& cyl : cylinders) {
            auto [lhs, rhs] = superposition_check(di.ks, di.gd.v_plus, di.gd.v_minus, p_mix, cyl);
            CHECK(std::fabs(lhs - rhs) <= 1e-12);
            if (cyl.empty()) CHECK(lhs == 1.0);
        }
    }
}

TEST_CASE("limit-law decomposition identity") {
    const WalkLaw& walk = cached_walk(0.3);
    DelocInstance di = make_deloc({{0.0}, {0.7, -0.7}, {-1.2}, {0.0}}, walk);
    const std::vector<std::vector<std::size_t>> cylinders = {{}, {2}, {1, 5}, {2, 3, 9}};
    for (std::size_t eta = 0; eta < 2; ++eta)
        for (Boundary a : {Boundary::constrained, Boundary::free_end})
            for (const auto& cyl : cylinders) {
                auto [lhs, rhs] = decomposition_check(di.ks, di.ac, di.gd, eta, a, cyl);
                CHECK(std::fabs(lhs - rhs) <= 1e-10 * std::max(1.0, lhs));
            }
}

TEST_CASE("holding-time integrability by regime") {
    const WalkLaw& walk = cached_walk(0.3);
    // Localized: finite mean holding, exponential tail.
    CycleCharges att = normalize({{0.0}, {0.0}, {0.5}, {0.0}});
    KernelSet ka = build_kernel_set(att, walk, {});
    FreeEnergyReport ra = free_energy(ka);
    SemiMarkovKernel loc = gamma_kernel(ka, ra);
    CHECK(loc.mean_holding(0) < 20.0);
    CHECK(loc.hold[0][2000] < loc.hold[0][100] * std::exp(-ra.free_energy * 1500.0));

    // Critical: proper rows but diverging mean (partial sums grow like sqrt).
    CycleCharges zero = normalize({{0.0}, {0.0}, {0.0}, {0.0}});
    KernelSet kz = build_kernel_set(zero, walk, {});
    SemiMarkovKernel crit = gamma_kernel(kz, free_energy(kz));
    auto partial_mean = [&crit](std::size_t cut) {
        double s = 0.0;
        for (std::size_t n = 1; n <= cut; ++n) s += double(n) * crit.hold[0][n];
        return s;
    };
    const double m1 = partial_mean(4096), m2 = partial_mean(16384);
    CHECK(m2 / m1 == doctest::Approx(2.0).epsilon(0.05));  // sqrt(16384/4096) = 2

    // Strictly delocalized: positive escape mass.
    CycleCharges del = normalize({{0.0}, {0.0}, {-1.0}, {0.0}});
    KernelSet kd = build_kernel_set(del, walk, {});
    AsymptoticConstants ac = asymptotic_constants(kd, free_energy(kd).delta);
    SemiMarkovKernel defk = defective_kernel(kd, ac, 0, Boundary::constrained);
    CHECK(defk.escape[0] > 0.0);
}

TEST_CASE("finite-volume marginals converge to the limit kernels") {
    const WalkLaw& walk = cached_walk(0.3);
    const std::vector<std::size_t> cyl = {2, 5};

    struct Case {
        RawCharges raw;
        Regime regime;
    };
    const std::vector<Case> cases = {
        {{{0.0}, {0.0}, {0.45}, {0.0}}, Regime::localized},
        {{{0.0}, {0.0}, {0.0}, {0.0}}, Regime::critical},
        {{{0.0}, {0.0}, {-0.8}, {0.0}}, Regime::strictly_delocalized},
    };
    for (const Case& cs : cases) {
        CycleCharges c = normalize(cs.raw);
        KernelSet ks = build_kernel_set(c, walk, {});
        FreeEnergyReport rep = free_energy(ks);
        REQUIRE(rep.regime == cs.regime);

        double limit_c, limit_f;
        if (rep.regime == Regime::strictly_delocalized) {
            AsymptoticConstants ac = asymptotic_constants(ks, rep.delta);
            limit_c = 1.0;
            limit_f = 1.0;
            SemiMarkovKernel kc = defective_kernel(ks, ac, 0, Boundary::constrained);
            SemiMarkovKernel kf = defective_kernel(ks, ac, 0, Boundary::free_end);
            limit_c = kc.hold[0][cyl[0]] * kc.hold[0][cyl[1] - cyl[0]];
            limit_f = kf.hold[0][cyl[0]] * kf.hold[0][cyl[1] - cyl[0]];
        } else {
            SemiMarkovKernel k = gamma_kernel(ks, rep);
            limit_c = limit_f = k.hold[0][cyl[0]] * k.hold[0][cyl[1] - cyl[0]];
        }

        double prev_dev_c = 1e9, prev_dev_f = 1e9;
        for (std::size_t n : {1000, 4000}) {
            PartitionTable tab = constrained_dp(ks, rep, n);
            free_dp(tab, ks, walk);
            const double mc = contact_marginal(ks, tab, Boundary::constrained, cyl);
            const double mf = contact_marginal(ks, tab, Boundary::free_end, cyl);
            const double dev_c = std::fabs(mc / limit_c - 1.0);
            const double dev_f = std::fabs(mf / limit_f - 1.0);
            // Strictly smaller unless already at the roundoff floor.
            CHECK(dev_c < std::max(prev_dev_c, 1e-10));
            CHECK(dev_f < std::max(prev_dev_f, 1e-10));
            prev_dev_c = dev_c;
            prev_dev_f = dev_f;
        }
        CHECK(prev_dev_c < 0.02);
        CHECK(prev_dev_f < 0.02);
    }
}
