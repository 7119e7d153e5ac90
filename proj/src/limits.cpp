#include "copoly/limits.hpp"

#include <cmath>
#include <stdexcept>

namespace copoly {

AsymptoticConstants asymptotic_constants(const KernelSet& ks, double delta, double cls_tol) {
    if (delta >= 1.0 - cls_tol)
        throw std::invalid_argument("asymptotic_constants: needs delta < 1 (1 - B near-singular)");
    if (!ks.tail_corrected)
        throw std::invalid_argument("asymptotic_constants: kernel set built without tail data");
    AsymptoticConstants ac;
    ac.resolvent_b = resolvent(ks.b);
    ac.amp_c = ac.resolvent_b * ks.l * ac.resolvent_b;
    ac.amp_f = ac.resolvent_b * ks.l_tilde;
    ac.escape_amp_c = ks.l * ac.resolvent_b;
    ac.escape_amp_f = ks.l_tilde;
    return ac;
}

SemiMarkovKernel defective_kernel(const KernelSet& ks, const AsymptoticConstants& ac,
                                  std::size_t eta, Boundary a, std::size_t n_cut) {
    const std::size_t t = ks.period();
    if (eta >= t) throw std::invalid_argument("defective_kernel: eta out of range");
    if (n_cut == 0 || n_cut > ks.n_max) n_cut = ks.n_max;
    const Mat& amp = a == Boundary::constrained ? ac.amp_c : ac.amp_f;
    const Mat& esc = a == Boundary::constrained ? ac.escape_amp_c : ac.escape_amp_f;

    SemiMarkovKernel k;
    k.period = t;
    k.n_cut = n_cut;
    k.defective = true;
    k.hold.assign(t, std::vector<double>(n_cut + 1, 0.0));
    k.tail_residual.assign(t, 0.0);
    k.escape.assign(t, 0.0);
    for (std::size_t al = 0; al < t; ++al) {
        k.escape[al] = esc(al, eta) / amp(al, eta);
        std::size_t cl = (al + 1) % t;
        double table_tail = 0.0, comp = 0.0;
        for (std::size_t n = 1; n <= ks.n_max; ++n) {
            const double w = ks.m[al][n] * amp(cl, eta) / amp(al, eta);
            if (n <= n_cut) {
                k.hold[al][n] = w;
            } else {
                const double y = w - comp;
                const double s = table_tail + y;
                comp = (s - table_tail) - y;
                table_tail = s;
            }
            if (++cl == t) cl = 0;
        }
        double beyond = 0.0;
        for (std::size_t be = 0; be < t; ++be)
            beyond += ks.tail_corr(al, be) * amp(be, eta) / amp(al, eta);
        k.tail_residual[al] = table_tail + beyond;
    }
    return k;
}

GibbsDecomposition gibbs_vectors(const KernelSet& ks, const AsymptoticConstants& ac,
                                 double c_tail) {
    const std::size_t t = ks.period();
    const CycleCharges& c = ks.charges;
    GibbsDecomposition gd;
    gd.v_plus.assign(t, 0.0);
    gd.v_minus.assign(t, 0.0);
    for (std::size_t al = 0; al < t; ++al)
        for (std::size_t g = 0; g < t; ++g) {
            gd.v_plus[al] += ac.resolvent_b(al, g);
            gd.v_minus[al] += ac.resolvent_b(al, g) * std::exp(-c.sigma_to[g]);
        }

    const bool h0 = c.h_is_zero();
    gd.x_c.assign(t, 0.0);
    gd.y_c.assign(t, 0.0);
    gd.r_c.assign(t, 0.0);
    gd.x_f.assign(t, 0.0);
    gd.y_f.assign(t, 0.0);
    gd.r_f.assign(t, 0.0);
    for (std::size_t eta = 0; eta < t; ++eta) {
        double xc = 0.0, yc = 0.0;
        for (std::size_t z = 0; z < t; ++z) {
            const double base = 0.5 * c_tail * std::exp(c.w_zero[z]) * ac.resolvent_b(z, eta);
            xc += base;
            yc += base * std::exp(c.sigma_to[z]);
        }
        gd.x_c[eta] = xc;
        gd.y_c[eta] = h0 ? yc : 0.0;
        gd.x_f[eta] = c_tail;
        gd.y_f[eta] = h0 ? c_tail * std::exp(c.sigma_to[eta]) : 0.0;

        gd.r_c[eta] = gd.x_c[eta] * gd.v_plus[0] / ac.amp_c(0, eta);
        gd.r_f[eta] = gd.x_f[eta] * gd.v_plus[0] / ac.amp_f(0, eta);
    }
    return gd;
}

double cone_law(const KernelSet& ks, const std::vector<double>& v,
                const std::vector<std::size_t>& cylinder) {
    const std::size_t t = ks.period();
    double prob = 1.0;
    std::size_t prev = 0;
    for (std::size_t k : cylinder) {
        if (k <= prev) throw std::invalid_argument("cone_law: cylinder must strictly increase");
        prob *= ks.m[prev % t][k - prev];
        prev = k;
    }
    return prob * v[prev % t] / v[0];
}

std::pair<double, double> superposition_check(const KernelSet& ks,
                                              const std::vector<double>& v_plus,
                                              const std::vector<double>& v_minus, double p_mix,
                                              const std::vector<std::size_t>& cylinder) {
    const std::size_t t = ks.period();
    std::vector<double> mix(t);
    for (std::size_t g = 0; g < t; ++g)
        mix[g] = p_mix * v_plus[g] + (1.0 - p_mix) * v_minus[g];
    const double lhs = cone_law(ks, mix, cylinder);
    const double r = p_mix * v_plus[0] / (p_mix * v_plus[0] + (1.0 - p_mix) * v_minus[0]);
    const double rhs =
        r * cone_law(ks, v_plus, cylinder) + (1.0 - r) * cone_law(ks, v_minus, cylinder);
    return {lhs, rhs};
}

std::pair<double, double> decomposition_check(const KernelSet& ks, const AsymptoticConstants& ac,
                                              const GibbsDecomposition& gd, std::size_t eta,
                                              Boundary a,
                                              const std::vector<std::size_t>& cylinder) {
    const std::size_t t = ks.period();
    const Mat& amp = a == Boundary::constrained ? ac.amp_c : ac.amp_f;
    std::vector<double> lam(t);
    for (std::size_t al = 0; al < t; ++al) lam[al] = amp(al, eta);
    const double lhs = cone_law(ks, lam, cylinder);
    const double r = gd.r(eta, a);
    const double rhs =
        r * cone_law(ks, gd.v_plus, cylinder) + (1.0 - r) * cone_law(ks, gd.v_minus, cylinder);
    return {lhs, rhs};
}

}  // namespace copoly
