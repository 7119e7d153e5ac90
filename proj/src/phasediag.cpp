#include "copoly/phasediag.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "copoly/partition.hpp"
#include "copoly/sampler.hpp"

namespace copoly {

RawCharges family_charges(const std::vector<double>& omega, double h, double beta) {
    if (omega.empty()) throw std::invalid_argument("family_charges: empty omega");
    double mean = 0.0;
    for (double v : omega) mean += v;
    mean /= double(omega.size());
    if (std::fabs(mean) > 1e-12)
        throw std::invalid_argument("family_charges: omega must be centered");
    RawCharges raw;
    raw.plus.resize(omega.size());
    raw.minus.resize(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) {
        raw.plus[i] = omega[i] + h;
        raw.minus[i] = -(omega[i] + h);
    }
    raw.zero = {-beta};
    raw.zero_tilde = {0.0};
    return raw;
}

CycleCharges to_charges(const std::vector<double>& omega, double h, double beta) {
    return normalize(family_charges(omega, h, beta));
}

double beta_c(const std::vector<double>& omega, const WalkLaw& walk,
              const KernelSetOptions& opt) {
    const KernelSet ks = build_kernel_set(to_charges(omega, 0.0, 0.0), walk, opt);
    return std::log(pf_eigen(ks.b).z);
}

std::vector<double> GridAxis::values() const {
    std::vector<double> v;
    if (step <= 0.0) throw std::invalid_argument("GridAxis: step must be positive");
    for (double x = lo; x <= hi + 0.5 * step; x += step) v.push_back(x);
    return v;
}

namespace {

PhasePoint scan_point(const std::vector<double>& omega, const WalkLaw& walk, double beta,
                      double h, const ScanOptions& opt) {
    PhasePoint pt;
    pt.beta = beta;
    pt.h = h;
    const CycleCharges c = to_charges(omega, h, beta);
    const KernelSet ks = build_kernel_set(c, walk, opt.kernel);
    const FreeEnergyReport rep = free_energy(ks, opt.cls_tol);
    pt.delta = rep.delta;
    pt.f_gauged = rep.free_energy;
    pt.f_raw = rep.raw_free_energy;
    pt.regime = rep.regime;
    pt.near_critical = std::fabs(rep.delta - 1.0) <= 10.0 * opt.cls_tol;
    pt.rho_fd = std::numeric_limits<double>::quiet_NaN();
    pt.rho_mc = std::numeric_limits<double>::quiet_NaN();
    return pt;
}

}  // namespace

std::vector<PhasePoint> scan(const std::vector<double>& omega, const WalkLaw& walk,
                             const GridAxis& beta_grid, const GridAxis& h_grid,
                             const ScanOptions& opt) {
    const std::vector<double> betas = beta_grid.values();
    const std::vector<double> hs = h_grid.values();
    std::vector<PhasePoint> grid(betas.size() * hs.size());

    unsigned threads = opt.threads != 0 ? opt.threads : std::thread::hardware_concurrency();
    if (threads == 0) threads = 1;
    threads = std::min<unsigned>(threads, 8);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            grid[i] = scan_point(omega, walk, betas[i / hs.size()], hs[i % hs.size()], opt);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    // Order parameter by finite differences of f_raw in h; one-sided at the
    // edges and at h = 0 (f is not differentiable across 0 when delocalized).
    for (std::size_t bi = 0; bi < betas.size(); ++bi) {
        for (std::size_t hi = 0; hi < hs.size(); ++hi) {
            PhasePoint& pt = grid[bi * hs.size() + hi];
            const bool at_zero = std::fabs(pt.h) <= 1e-14;
            const bool has_left = hi > 0;
            const bool has_right = hi + 1 < hs.size();
            const auto f_at = [&](std::size_t j) { return grid[bi * hs.size() + j].f_raw; };
            if ((at_zero || !has_left) && has_right) {
                pt.rho_fd = (f_at(hi + 1) - f_at(hi)) / (hs[hi + 1] - hs[hi]);
            } else if (has_left && (!has_right || at_zero)) {
                pt.rho_fd = (f_at(hi) - f_at(hi - 1)) / (hs[hi] - hs[hi - 1]);
            } else if (has_left && has_right) {
                pt.rho_fd = (f_at(hi + 1) - f_at(hi - 1)) / (hs[hi + 1] - hs[hi - 1]);
            }
        }
    }
    return grid;
}

double rho_monte_carlo(const std::vector<double>& omega, double h, double beta,
                       const WalkLaw& walk, std::size_t n, std::size_t samples,
                       std::uint64_t seed, const KernelSetOptions& opt) {
    KernelSetOptions ko = opt;
    ko.n_max = std::max(ko.n_max, n);
    const CycleCharges c = to_charges(omega, h, beta);
    const KernelSet ks = build_kernel_set(c, walk, ko);
    const FreeEnergyReport rep = free_energy(ks);
    PartitionTable tab = constrained_dp(ks, rep, n);
    free_dp(tab, ks, walk);
    const FiniteSampler sampler(ks, tab, walk, /*with_moduli=*/false);

    // The family may have been flipped to keep h_omega >= 0; sign sums of the
    // raw model then carry the opposite orientation.
    const double orient = c.flipped ? -1.0 : 1.0;
    double acc = 0.0;
    Rng root(seed);
    for (std::size_t s = 0; s < samples; ++s) {
        Rng r = root.split(s + 1);
        const ContactsSigns cs = sampler.contacts_signs(Boundary::free_end, r);
        long long signed_sites = 0;
        for (std::size_t i = 1; i < cs.contacts.size(); ++i)
            signed_sites += (long long)cs.signs[i - 1] *
                            (long long)(cs.contacts[i] - cs.contacts[i - 1]);
        signed_sites += (long long)cs.final_sign * (long long)cs.final_len;
        acc += double(signed_sites) / double(n);
    }
    return orient * acc / double(samples);
}

}  // namespace copoly
