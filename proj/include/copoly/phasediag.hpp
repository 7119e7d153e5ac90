// The (beta, h) pinning/copolymer family: mapping to charge sequences, free
// energy and order parameter over a grid, and the critical pinning strength.
#pragma once

#include <cstddef>
#include <vector>

#include "copoly/charges.hpp"
#include "copoly/spectral.hpp"
#include "copoly/walk.hpp"

namespace copoly {

struct PhasePoint {
    double beta = 0.0;
    double h = 0.0;
    double delta = 0.0;
    double f_gauged = 0.0;  // free energy of the gauged model
    double f_raw = 0.0;     // raw-Hamiltonian free energy, = f_gauged + |h|
    double rho_fd = 0.0;    // order parameter by finite differences (NaN if unset)
    double rho_mc = 0.0;    // Monte-Carlo estimate (NaN if not requested)
    Regime regime = Regime::critical;
    bool near_critical = false;  // |delta - 1| within 10x the classification tol
};

// RawCharges of the family: sign charges omega_n + h, contact penalty beta.
// omega must be centered (tolerance 1e-12).
RawCharges family_charges(const std::vector<double>& omega, double h, double beta);
CycleCharges to_charges(const std::vector<double>& omega, double h, double beta);

// log delta(0): delta(beta) = e^{-beta} delta(0), so this is the pinning
// strength where the h = 0 line changes regime.
double beta_c(const std::vector<double>& omega, const WalkLaw& walk,
              const KernelSetOptions& opt = {});

struct GridAxis {
    double lo = 0.0, hi = 0.0, step = 1.0;
    std::vector<double> values() const;
};

struct ScanOptions {
    KernelSetOptions kernel;
    double cls_tol = 1e-9;
    unsigned threads = 0;  // 0: hardware concurrency
};

// Grid scan; points are emitted in row-major (beta outer, h inner) order.
// rho_fd is filled by a post-pass of central differences in h (one-sided at
// the grid edges and at h = 0); rho_mc is left NaN (see rho_monte_carlo).
std::vector<PhasePoint> scan(const std::vector<double>& omega, const WalkLaw& walk,
                             const GridAxis& beta_grid, const GridAxis& h_grid,
                             const ScanOptions& opt = {});

// Mean of (1/N) sum_n sign(S_n) under the free polymer at one family point,
// estimated from `samples` contact/sign draws.
double rho_monte_carlo(const std::vector<double>& omega, double h, double beta,
                       const WalkLaw& walk, std::size_t n, std::size_t samples,
                       std::uint64_t seed, const KernelSetOptions& opt = {});

}  // namespace copoly
