// Periodic environment: gauge/flip normalization of the four charge
// sequences and the matrix encoding (class cocycle, return kernel, its sum,
// and the heavy-tail amplitude matrices).
//
// Class convention: positions are 1-based, the class of position n is
// n mod T, and all per-class arrays are indexed by that class. Input
// sequences list positions 1..L of their own period.
#pragma once

#include <cstddef>
#include <vector>

#include "copoly/mat.hpp"
#include "copoly/walk.hpp"

namespace copoly {

struct RawCharges {
    std::vector<double> plus;        // solvent charge for sign +1
    std::vector<double> minus;       // solvent charge for sign -1
    std::vector<double> zero;        // contact (S_n = 0) charge
    std::vector<double> zero_tilde;  // flat-bond (sign = 0) charge
};

struct CycleCharges {
    std::size_t period = 1;  // lcm of the four input periods
    // Gauged sequences, class-indexed. w_plus is identically zero after the
    // gauge; kept for clarity of the invariant.
    std::vector<double> w_plus, w_minus, w_zero, w_zero_tilde;
    bool flipped = false;            // whether the S -> -S swap was applied
    std::vector<double> gauge;       // per-class subtracted (post-flip) plus-charges
    double h = 0.0;                  // drift h_omega >= 0
    std::vector<double> sigma_to;    // sigma_to[g] = Sigma_{[0],g}; cocycle base

    std::size_t cls(std::size_t n) const { return n % period; }
    // Sigma_{a,b} = sigma_to[b] - sigma_to[a]: the cocycle identity is exact.
    double sigma(std::size_t a, std::size_t b) const { return sigma_to[b] - sigma_to[a]; }
    bool h_is_zero(double tol = 1e-12) const { return h <= tol; }
    double gauge_mean() const;
};

CycleCharges normalize(const RawCharges& raw);

Mat sigma_matrix(const CycleCharges& c);

// Log-weight of one excursion of length ell leaving from class alpha
// (target class alpha + [ell] is implied).
double phi(const CycleCharges& c, std::size_t alpha, std::size_t ell);

struct KernelSet {
    CycleCharges charges;
    std::size_t n_max = 0;
    // m[alpha][n] = M_{alpha, alpha+[n]}(n) and its log, n = 1..n_max.
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> log_m;
    Mat b;          // summed kernel, tail-corrected when tail_corrected
    Mat tail_corr;  // per-pair return mass beyond n_max (zero otherwise)
    Mat l;          // lim x^{3/2} M(x): completed-return tail amplitude
    Mat l_tilde;    // open-excursion tail amplitude
    bool tail_corrected = false;
    bool tail_warning = false;  // some tail correction exceeded 1e-6 of its table sum

    std::size_t period() const { return charges.period; }
    std::size_t cls(std::size_t n) const { return n % charges.period; }
};

struct KernelSetOptions {
    std::size_t n_max = std::size_t(1) << 16;
    // When false, only the M table is built (enough for finite-volume DP);
    // B carries no tail correction and L matrices are left empty.
    bool with_tail = true;
};

// The three build stages; build_kernel_set runs them in order.
KernelSet m_kernel(const CycleCharges& c, const WalkLaw& walk, std::size_t n_max);
void b_matrix(KernelSet& ks, const WalkLaw& walk, bool with_tail);
void l_matrices(KernelSet& ks, const WalkLaw& walk);
KernelSet build_kernel_set(const CycleCharges& c, const WalkLaw& walk,
                           const KernelSetOptions& opt = {});

// Membership in the boundary-condition-sensitive set: delta < 1, h = 0 and
// a non-vanishing cocycle.
bool in_p_less(const CycleCharges& c, double delta, double tol = 1e-12,
               double cls_tol = 1e-9);

}  // namespace copoly
