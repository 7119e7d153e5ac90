// Infinite-volume objects of the strictly delocalized regime: partition
// amplitude matrices, defective limit kernels, the two extremal contact
// laws and the superposition weights.
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "copoly/charges.hpp"
#include "copoly/mat.hpp"
#include "copoly/partition.hpp"
#include "copoly/semi_markov.hpp"
#include "copoly/spectral.hpp"

namespace copoly {

struct AsymptoticConstants {
    Mat resolvent_b;  // (1 - B)^{-1}
    Mat amp_c, amp_f;         // partition amplitudes (constrained / free)
    Mat escape_amp_c, escape_amp_f;
};

// Requires delta < 1 (throws otherwise: 1 - B near-singular).
AsymptoticConstants asymptotic_constants(const KernelSet& ks, double delta,
                                         double cls_tol = 1e-9);

// Defective limit kernel for boundary a approached along [N] = eta.
SemiMarkovKernel defective_kernel(const KernelSet& ks, const AsymptoticConstants& ac,
                                  std::size_t eta, Boundary a, std::size_t n_cut = 0);

struct GibbsDecomposition {
    std::vector<double> v_plus, v_minus;  // the two extremal cone vectors
    // Linear-combination coefficients and mixture weights, indexed by eta.
    std::vector<double> x_c, y_c, r_c;
    std::vector<double> x_f, y_f, r_f;

    double x(std::size_t eta, Boundary a) const {
        return a == Boundary::constrained ? x_c[eta] : x_f[eta];
    }
    double y(std::size_t eta, Boundary a) const {
        return a == Boundary::constrained ? y_c[eta] : y_f[eta];
    }
    double r(std::size_t eta, Boundary a) const {
        return a == Boundary::constrained ? r_c[eta] : r_f[eta];
    }
};

GibbsDecomposition gibbs_vectors(const KernelSet& ks, const AsymptoticConstants& ac,
                                 double c_tail);

// Defective contact law q^v on a cylinder (product of return kernels times
// v_{[k_j]} / v_{[0]}); empty cylinder has probability 1.
double cone_law(const KernelSet& ks, const std::vector<double>& v,
                const std::vector<std::size_t>& cylinder);

// Both sides of the mixing identity for q^{p v+ + (1-p) v-}:
// lhs evaluated directly, rhs as the r-mixture of q^{v+} and q^{v-}.
std::pair<double, double> superposition_check(const KernelSet& ks,
                                              const std::vector<double>& v_plus,
                                              const std::vector<double>& v_minus, double p_mix,
                                              const std::vector<std::size_t>& cylinder);

// Both sides of the limit-law decomposition on a cylinder: lhs from the
// defective kernel products, rhs = r q^{v+} + (1-r) q^{v-}.
std::pair<double, double> decomposition_check(const KernelSet& ks, const AsymptoticConstants& ac,
                                              const GibbsDecomposition& gd, std::size_t eta,
                                              Boundary a,
                                              const std::vector<std::size_t>& cylinder);

}  // namespace copoly
