// Finite-volume partition functions by renewal dynamic programming, contact
// marginals, endpoint-sign probabilities, and the exhaustive enumeration
// oracle.
//
// The DP runs in linear arithmetic on the exponentially tilted kernel
// G_a(m) = M_a(m) e^{-b m} xi_{a+[m]} / xi_a with b the free energy
// (localized) or 0 otherwise, so every stored value stays polynomially
// bounded; log-partition values are reconstructed on access.
#pragma once

#include <cstddef>
#include <vector>

#include "copoly/charges.hpp"
#include "copoly/spectral.hpp"
#include "copoly/walk.hpp"

namespace copoly {

enum class Boundary { constrained, free_end };

struct PartitionTable {
    std::size_t horizon = 0;  // N
    std::size_t period = 1;
    double tilt = 0.0;                 // b of the tilt
    std::vector<double> xi;            // tilt vector (positive, sums to 1)
    std::vector<double> log_xi;
    // Scaled tables, indexed [class][length]:
    //   sc[a][k] = Zc_a(k) e^{-b k} xi_{a+[k]} / xi_a
    //   sp[a][k] = Z+_a(k) e^{-b k} / xi_a       (and sm for Z-)
    //   sf[a][k] = Zf_a(k) e^{-b k}
    std::vector<std::vector<double>> sc, sp, sm, sf;
    bool with_free = false;

    double log_zc(std::size_t a, std::size_t k) const;
    double log_zp(std::size_t a, std::size_t k) const;
    double log_zm(std::size_t a, std::size_t k) const;
    double log_zf(std::size_t a, std::size_t k) const;
    double log_z(Boundary b, std::size_t a, std::size_t k) const;
};

// Constrained table for all classes and lengths 0..N. Requires ks.n_max >= N.
PartitionTable constrained_dp(const KernelSet& ks, const FreeEnergyReport& rep, std::size_t n);

// Adds the sign-restricted and free tables (last-zero decomposition).
void free_dp(PartitionTable& table, const KernelSet& ks, const WalkLaw& walk);

// P^a(tau_1 = k_1, ..., tau_j = k_j) for strictly increasing contact points.
double contact_marginal(const KernelSet& ks, const PartitionTable& table, Boundary a,
                        const std::vector<std::size_t>& points);

// Free case: P^f_N(S_N > 0). Constrained case: P^c_N(S_{floor(N/2)} > 0)
// via the two-sided sum over the flanking zeros.
double endpoint_sign_prob(const KernelSet& ks, const PartitionTable& table, Boundary a,
                          const WalkLaw& walk);

// Exhaustive 3^N enumeration of the raw-Hamiltonian model; the oracle for
// everything above. Probabilities are per-boundary; partition values are
// reported in the gauged normalization.
struct BruteForce {
    double z_c = 0.0, z_f = 0.0, z_p = 0.0, z_m = 0.0;
    // single_ா[k] = P^a(tau_1 = k); pair_a[k1 * (N+1) + k2] = P^a(tau_1 = k1, tau_2 = k2).
    std::vector<double> single_c, single_f;
    std::vector<double> pair_c, pair_f;
    double sign_f = 0.0;  // P^f(S_N > 0)
    double sign_c = 0.0;  // P^c(S_{floor(N/2)} > 0)
    // Per-path probabilities (only when keep_paths): index is the base-3
    // encoding of the step sequence (digit i = step_{i+1} + 1).
    std::vector<double> path_prob_c, path_prob_f;
};

BruteForce brute_force(const RawCharges& raw, double p, std::size_t n, bool keep_paths = false);

}  // namespace copoly
