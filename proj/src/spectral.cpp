#include "copoly/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace copoly {

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::localized: return "localized";
        case Regime::critical: return "critical";
        case Regime::strictly_delocalized: return "strictly_delocalized";
    }
    return "unknown";
}

Mat a_matrix(const KernelSet& ks, double b) {
    if (b < 0.0) throw std::invalid_argument("a_matrix: b must be >= 0");
    const std::size_t t = ks.period();
    if (t > 64) throw std::invalid_argument("a_matrix: periods above 64 are not supported");
    if (b == 0.0) return ks.b;
    Mat a(t);
    const double decay = std::exp(-b);
    for (std::size_t al = 0; al < t; ++al) {
        const std::vector<double>& row = ks.m[al];
        double disc = decay;  // e^{-b n}, kept as a running product
        double sums[64] = {0.0};
        double comps[64] = {0.0};
        std::size_t cl = (al + 1) % t;
        for (std::size_t n = 1; n <= ks.n_max; ++n) {
            const double y = row[n] * disc - comps[cl];
            const double s = sums[cl] + y;
            comps[cl] = (s - sums[cl]) - y;
            sums[cl] = s;
            disc *= decay;
            if (++cl == t) cl = 0;
        }
        for (std::size_t be = 0; be < t; ++be) a(al, be) = sums[be];
    }
    return a;
}

double a_matrix_truncation_bound(const KernelSet& ks, double b) {
    if (!ks.tail_corrected || b <= 0.0) return 0.0;
    return ks.tail_corr.max_abs() * std::exp(-b * double(ks.n_max));
}

SpectralResult pf_eigen(const Mat& a, const std::vector<double>* start) {
    const std::size_t t = a.dim();
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < t; ++j)
            if (!(a(i, j) > 0.0)) throw std::invalid_argument("pf_eigen: matrix must be strictly positive");

    SpectralResult res;
    std::vector<double> x(t, 1.0 / double(t));
    if (start != nullptr) {
        x = *start;
        double s = 0.0;
        for (double v : x) {
            if (!(v > 0.0)) throw std::invalid_argument("pf_eigen: start vector must be positive");
            s += v;
        }
        for (double& v : x) v /= s;
    }
    double z_prev = 0.0;
    for (std::size_t it = 1; it <= 100000; ++it) {
        std::vector<double> y = a.apply(x);
        double z = 0.0;
        for (double v : y) z += v;
        if (it > 1 && std::fabs(z - z_prev) < 1e-13 * z) {
            // Eigenvalue settled; accept once the per-component residual has too.
            double resid = 0.0;
            for (std::size_t i = 0; i < t; ++i)
                resid = std::max(resid, std::fabs(y[i] - z * x[i]) / (z * x[i]));
            if (resid < 1e-13) {
                res.z = z;
                res.xi = x;
                res.iterations = it;
                return res;
            }
        }
        for (std::size_t i = 0; i < t; ++i) x[i] = y[i] / z;
        z_prev = z;
    }
    throw std::runtime_error("pf_eigen: power iteration failed to converge");
}

Regime classify(double delta, double cls_tol) {
    if (delta > 1.0 + cls_tol) return Regime::localized;
    if (delta < 1.0 - cls_tol) return Regime::strictly_delocalized;
    return Regime::critical;
}

FreeEnergyReport free_energy(const KernelSet& ks, double cls_tol) {
    FreeEnergyReport rep;
    rep.cls_tol = cls_tol;
    SpectralResult at0 = pf_eigen(ks.b);
    rep.delta = at0.z;
    rep.regime = classify(rep.delta, cls_tol);

    if (rep.regime != Regime::localized) {
        rep.free_energy = 0.0;
        rep.xi_at_f = at0.xi;
        rep.z_residual = std::fabs(at0.z - 1.0);
    } else {
        double lo = 0.0, hi = 1.0;
        SpectralResult cur = pf_eigen(a_matrix(ks, hi), &at0.xi);
        while (cur.z >= 1.0) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e6) throw std::runtime_error("free_energy: Z(b) = 1 bracket not found");
            cur = pf_eigen(a_matrix(ks, hi), &cur.xi);
        }
        // Z is strictly decreasing; bisect until the residual target is met
        // or the interval collapses to machine width.
        double mid = 0.5 * (lo + hi);
        std::vector<double> warm = at0.xi;
        for (int it = 0; it < 200; ++it) {
            mid = 0.5 * (lo + hi);
            cur = pf_eigen(a_matrix(ks, mid), &warm);
            warm = cur.xi;
            if (std::fabs(cur.z - 1.0) < 1e-12) break;
            (cur.z > 1.0 ? lo : hi) = mid;
            if (hi - lo < 1e-16 * (1.0 + hi)) break;
        }
        rep.free_energy = mid;
        rep.xi_at_f = cur.xi;
        rep.z_residual = std::fabs(cur.z - 1.0);
    }
    rep.raw_free_energy = rep.free_energy + ks.charges.gauge_mean();
    return rep;
}

SpectralResult spectral_at(const KernelSet& ks, double b) {
    SpectralResult sr = pf_eigen(a_matrix(ks, b));
    sr.b = b;
    return sr;
}

double representation_log_zc(const KernelSet& ks, const SpectralResult& sr, std::size_t n) {
    if (n > ks.n_max)
        throw std::invalid_argument("representation_log_zc: kernel table too short");
    const std::size_t t = ks.period();
    // Z(b) Gamma_a(m) = M_a(m) e^{-b m} xi_{a+[m]} / xi_a: the per-renewal
    // Z factor and the kernel normalization cancel exactly.
    std::vector<std::vector<double>> g(t, std::vector<double>(n + 1, 0.0));
    const double decay = std::exp(-sr.b);
    for (std::size_t a = 0; a < t; ++a) {
        double disc = decay;
        std::size_t cl = (a + 1) % t;
        for (std::size_t m = 1; m <= n; ++m) {
            g[a][m] = ks.m[a][m] * disc * sr.xi[cl] / sr.xi[a];
            disc *= decay;
            if (++cl == t) cl = 0;
        }
    }
    std::vector<std::vector<double>> v(t, std::vector<double>(n + 1, 0.0));
    for (std::size_t a = 0; a < t; ++a) v[a][0] = 1.0;
    for (std::size_t k = 1; k <= n; ++k)
        for (std::size_t a = 0; a < t; ++a) {
            double acc = 0.0;
            std::size_t cl = (a + 1) % t;
            for (std::size_t m = 1; m <= k; ++m) {
                acc += g[a][m] * v[cl][k - m];
                if (++cl == t) cl = 0;
            }
            v[a][k] = acc;
        }
    return sr.b * double(n) + std::log(sr.xi[0]) - std::log(sr.xi[n % t]) + std::log(v[0][n]);
}

SemiMarkovKernel gamma_kernel(const KernelSet& ks, const FreeEnergyReport& rep,
                              std::size_t n_cut) {
    if (rep.regime == Regime::strictly_delocalized)
        throw std::invalid_argument(
            "gamma_kernel: strictly delocalized input (use the defective limit kernel)");
    const std::size_t t = ks.period();
    if (n_cut == 0 || n_cut > ks.n_max) n_cut = ks.n_max;
    const double f = rep.free_energy;
    const std::vector<double>& xi = rep.xi_at_f;

    SemiMarkovKernel k;
    k.period = t;
    k.n_cut = n_cut;
    k.defective = false;
    k.hold.assign(t, std::vector<double>(n_cut + 1, 0.0));
    k.tail_residual.assign(t, 0.0);
    k.escape.assign(t, 0.0);

    for (std::size_t a = 0; a < t; ++a) {
        const double decay = std::exp(-f);
        double disc = decay;
        std::size_t cl = (a + 1) % t;
        double table_tail = 0.0, comp = 0.0;
        for (std::size_t n = 1; n <= ks.n_max; ++n) {
            const double w = ks.m[a][n] * (f == 0.0 ? 1.0 : disc) * xi[cl] / xi[a];
            if (n <= n_cut) {
                k.hold[a][n] = w;
            } else {
                const double y = w - comp;
                const double s = table_tail + y;
                comp = (s - table_tail) - y;
                table_tail = s;
            }
            disc *= decay;
            if (++cl == t) cl = 0;
        }
        // Analytic mass beyond the kernel set's table, same quadrature as B.
        double beyond = 0.0;
        if (ks.tail_corrected) {
            for (std::size_t be = 0; be < t; ++be) {
                const double damp = (f == 0.0) ? 1.0 : std::exp(-f * double(ks.n_max + 1));
                beyond += ks.tail_corr(a, be) * damp * xi[be] / xi[a];
            }
        }
        k.tail_residual[a] = table_tail + beyond;
    }
    return k;
}

}  // namespace copoly
