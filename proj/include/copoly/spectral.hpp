// Spectral side of the model: the discounted kernel sum A(b), its
// Perron-Frobenius pair, the regime selector delta, the free energy from
// Z(b) = 1, and the recurrent-regime holding kernel.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "copoly/charges.hpp"
#include "copoly/mat.hpp"
#include "copoly/semi_markov.hpp"

namespace copoly {

enum class Regime { localized, critical, strictly_delocalized };

const char* regime_name(Regime r);

struct SpectralResult {
    double b = 0.0;           // discount rate the pair was computed at
    double z = 0.0;           // spectral radius
    std::vector<double> xi;   // right eigenvector, positive, sums to 1
    std::size_t iterations = 0;
};

struct FreeEnergyReport {
    double delta = 0.0;       // Z(0)
    double free_energy = 0.0; // 0 unless localized
    Regime regime = Regime::critical;
    std::vector<double> xi_at_f;   // eigenvector at b = free_energy
    double raw_free_energy = 0.0;  // translated back through the gauge
    double z_residual = 0.0;       // |Z(F) - 1| reached by the bisection
    double cls_tol = 1e-9;
};

// A(b)_{a,c} = sum_n M_a(n) e^{-b n} over the class-consistent lattice.
// A(0) equals B exactly (including the tail correction when present).
Mat a_matrix(const KernelSet& ks, double b);

// Upper bound on what the n_max truncation can cost an entry of A(b), b > 0.
double a_matrix_truncation_bound(const KernelSet& ks, double b);

// Power iteration on a strictly positive matrix; throws after 1e5
// non-converged sweeps. Optional start must be positive.
SpectralResult pf_eigen(const Mat& a, const std::vector<double>* start = nullptr);

FreeEnergyReport free_energy(const KernelSet& ks, double cls_tol = 1e-9);

Regime classify(double delta, double cls_tol = 1e-9);

// Perron-Frobenius pair of A(b), with b recorded.
SpectralResult spectral_at(const KernelSet& ks, double b);

// The matrix representation identity: e^{bN} (xi_[0]/xi_[N]) E_b[Z(b)^k; N in
// tau-hat] evaluated by exact DP over the b-discounted kernel. Equals
// log Zc_N for every b >= 0; an independent route to the partition value.
double representation_log_zc(const KernelSet& ks, const SpectralResult& sr, std::size_t n);

// Holding kernel of the localized/critical limit: proper rows, no escape.
// Rejects strictly delocalized reports.
SemiMarkovKernel gamma_kernel(const KernelSet& ks, const FreeEnergyReport& rep,
                              std::size_t n_cut = 0 /* 0: use ks.n_max */);

}  // namespace copoly
