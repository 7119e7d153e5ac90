#include "copoly/partition.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace copoly {

namespace {

double lse_accumulate(double acc, double term) {
    // log(e^acc + e^term), streaming form.
    if (acc == -std::numeric_limits<double>::infinity()) return term;
    if (term > acc) std::swap(acc, term);
    return acc + std::log1p(std::exp(term - acc));
}

}  // namespace

double PartitionTable::log_zc(std::size_t a, std::size_t k) const {
    const std::size_t t = period;
    return std::log(sc[a][k]) + tilt * double(k) + log_xi[a] - log_xi[(a + k) % t];
}

double PartitionTable::log_zp(std::size_t a, std::size_t k) const {
    return std::log(sp[a][k]) + tilt * double(k) + log_xi[a];
}

double PartitionTable::log_zm(std::size_t a, std::size_t k) const {
    return std::log(sm[a][k]) + tilt * double(k) + log_xi[a];
}

double PartitionTable::log_zf(std::size_t a, std::size_t k) const {
    return std::log(sf[a][k]) + tilt * double(k);
}

double PartitionTable::log_z(Boundary b, std::size_t a, std::size_t k) const {
    return b == Boundary::constrained ? log_zc(a, k) : log_zf(a, k);
}

PartitionTable constrained_dp(const KernelSet& ks, const FreeEnergyReport& rep, std::size_t n) {
    if (n > ks.n_max)
        throw std::invalid_argument("constrained_dp: kernel table shorter than the horizon");
    const std::size_t t = ks.period();

    PartitionTable tab;
    tab.horizon = n;
    tab.period = t;
    tab.tilt = rep.regime == Regime::localized ? rep.free_energy : 0.0;
    tab.xi = rep.xi_at_f;
    tab.log_xi.resize(t);
    for (std::size_t a = 0; a < t; ++a) tab.log_xi[a] = std::log(tab.xi[a]);

    // Tilted kernel g[a][m] = M_a(m) e^{-b m} xi_{a+[m]} / xi_a.
    std::vector<std::vector<double>> g(t, std::vector<double>(n + 1, 0.0));
    {
        const double decay = std::exp(-tab.tilt);
        for (std::size_t a = 0; a < t; ++a) {
            double disc = decay;
            std::size_t cl = (a + 1) % t;
            for (std::size_t m = 1; m <= n; ++m) {
                g[a][m] = ks.m[a][m] * disc * tab.xi[cl] / tab.xi[a];
                disc *= decay;
                if (++cl == t) cl = 0;
            }
        }
    }

    tab.sc.assign(t, std::vector<double>(n + 1, 0.0));
    for (std::size_t a = 0; a < t; ++a) tab.sc[a][0] = 1.0;
    if (t == 1) {
        const double* gk = g[0].data();
        double* out = tab.sc[0].data();
        for (std::size_t k = 1; k <= n; ++k) {
            double acc = 0.0;
            for (std::size_t m = 1; m <= k; ++m) acc += gk[m] * out[k - m];
            out[k] = acc;
        }
    } else {
        for (std::size_t k = 1; k <= n; ++k)
            for (std::size_t a = 0; a < t; ++a) {
                double acc = 0.0;
                std::size_t cl = (a + 1) % t;
                const double* gk = g[a].data();
                for (std::size_t m = 1; m <= k; ++m) {
                    acc += gk[m] * tab.sc[cl][k - m];
                    if (++cl == t) cl = 0;
                }
                tab.sc[a][k] = acc;
            }
    }
    return tab;
}

void free_dp(PartitionTable& tab, const KernelSet& ks, const WalkLaw& walk) {
    const std::size_t t = tab.period, n = tab.horizon;
    if (walk.n_max < n) throw std::invalid_argument("free_dp: walk table shorter than the horizon");
    const CycleCharges& c = ks.charges;

    // s_plus(l) = e^{-b l} q(l); s_minus(l) = e^{-(b+h) l} q(l).
    std::vector<double> s_plus(n + 1, 0.0), s_minus(n + 1, 0.0);
    {
        const double dp = std::exp(-tab.tilt), dm = std::exp(-(tab.tilt + c.h));
        double ap = 1.0, am = 1.0;
        for (std::size_t l = 1; l <= n; ++l) {
            ap *= dp;
            am *= dm;
            const double q = 0.5 * walk.surv[l];
            s_plus[l] = ap * q;
            s_minus[l] = am * q;
        }
    }

    tab.sp.assign(t, std::vector<double>(n + 1, 0.0));
    tab.sm.assign(t, std::vector<double>(n + 1, 0.0));
    tab.sf.assign(t, std::vector<double>(n + 1, 0.0));
    std::vector<double> u(n + 1), v(n + 1);
    for (std::size_t a = 0; a < t; ++a) {
        // u(m) = sc[a][m] / xi_{a+[m]}; v(m) = u(m) e^{-Sigma_{[0],a+[m]}}.
        std::size_t cl = a;
        for (std::size_t m = 0; m <= n; ++m) {
            u[m] = tab.sc[a][m] / tab.xi[cl];
            v[m] = u[m] * std::exp(-c.sigma_to[cl]);
            if (++cl == t) cl = 0;
        }
        cl = a;
        for (std::size_t k = 0; k <= n; ++k) {
            double accp = 0.0, accm = 0.0;
            for (std::size_t m = 0; m < k; ++m) {
                accp += u[m] * s_plus[k - m];
                accm += v[m] * s_minus[k - m];
            }
            tab.sp[a][k] = accp;
            tab.sm[a][k] = accm * std::exp(c.sigma_to[cl]);
            tab.sf[a][k] =
                tab.sc[a][k] * tab.xi[a] / tab.xi[cl] + tab.xi[a] * (tab.sp[a][k] + tab.sm[a][k]);
            if (++cl == t) cl = 0;
        }
    }
    tab.with_free = true;
}

double contact_marginal(const KernelSet& ks, const PartitionTable& tab, Boundary a,
                        const std::vector<std::size_t>& points) {
    if (points.empty()) throw std::invalid_argument("contact_marginal: empty point list");
    const std::size_t n = tab.horizon, t = tab.period;
    std::size_t prev = 0;
    double log_p = 0.0;
    for (std::size_t k : points) {
        if (k <= prev || k > n)
            throw std::invalid_argument("contact_marginal: points must increase within 1..N");
        log_p += ks.log_m[prev % t][k - prev];
        prev = k;
    }
    log_p += tab.log_z(a, prev % t, n - prev) - tab.log_z(a, 0, n);
    return std::exp(log_p);
}

double endpoint_sign_prob(const KernelSet& ks, const PartitionTable& tab, Boundary a,
                          const WalkLaw& walk) {
    const std::size_t n = tab.horizon, t = tab.period;
    if (a == Boundary::free_end) {
        if (!tab.with_free) throw std::invalid_argument("endpoint_sign_prob: free tables not built");
        return std::exp(tab.log_zp(0, n) - tab.log_zf(0, n));
    }
    const std::size_t site = n / 2;
    if (site < 1) return 0.0;
    // Last zero l < site, first zero m > site, positive bridge between them.
    double acc = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < site; ++l) {
        const double lead = tab.log_zc(0, l);
        for (std::size_t m = site + 1; m <= n; ++m) {
            const double term = lead + std::log(0.5 * walk.ret[m - l]) +
                                ks.charges.w_zero[m % t] + tab.log_zc(m % t, n - m);
            acc = lse_accumulate(acc, term);
        }
    }
    return std::exp(acc - tab.log_zc(0, n));
}

BruteForce brute_force(const RawCharges& raw, double p, std::size_t n, bool keep_paths) {
    if (n > 14) throw std::invalid_argument("brute_force: N must be <= 14");
    if (!(p > 0.0) || !(p < 0.5)) throw std::invalid_argument("brute_force: p outside (0, 1/2)");

    // Orient the environment the way the model convention does (h >= 0 via
    // the joint S -> -S, plus <-> minus swap, under which the measure is
    // invariant), then enumerate the raw Hamiltonian of the oriented charges.
    double h_raw = 0.0;
    {
        const std::size_t lcm_pm = std::lcm(raw.plus.size(), raw.minus.size());
        for (std::size_t i = 0; i < lcm_pm; ++i)
            h_raw += raw.plus[i % raw.plus.size()] - raw.minus[i % raw.minus.size()];
        h_raw /= double(lcm_pm);
    }
    const bool flip = h_raw < 0.0;

    // Position-indexed charges 1..N and the gauge total for the raw -> gauged
    // normalizer conversion.
    std::vector<double> wp(n + 1), wm(n + 1), w0(n + 1), wt(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        wp[i] = raw.plus[(i - 1) % raw.plus.size()];
        wm[i] = raw.minus[(i - 1) % raw.minus.size()];
        if (flip) std::swap(wp[i], wm[i]);
        w0[i] = raw.zero[(i - 1) % raw.zero.size()];
        wt[i] = raw.zero_tilde[(i - 1) % raw.zero_tilde.size()];
    }
    double gauge_total = 0.0;
    for (std::size_t i = 1; i <= n; ++i) gauge_total += wp[i];

    std::size_t n_paths = 1;
    for (std::size_t i = 0; i < n; ++i) n_paths *= 3;

    BruteForce bf;
    bf.single_c.assign(n + 1, 0.0);
    bf.single_f.assign(n + 1, 0.0);
    bf.pair_c.assign((n + 1) * (n + 1), 0.0);
    bf.pair_f.assign((n + 1) * (n + 1), 0.0);
    if (keep_paths) {
        bf.path_prob_c.assign(n_paths, 0.0);
        bf.path_prob_f.assign(n_paths, 0.0);
    }

    const double lstep[3] = {std::log(p), std::log1p(-2.0 * p), std::log(p)};
    long double zc = 0.0L, zf = 0.0L, zpls = 0.0L, zmns = 0.0L;
    long double sgn_f = 0.0L, sgn_c = 0.0L;
    std::vector<long double> single_c(n + 1, 0.0L), single_f(n + 1, 0.0L);
    std::vector<long double> pair_c((n + 1) * (n + 1), 0.0L), pair_f((n + 1) * (n + 1), 0.0L);

    std::vector<int> digits(n, 0);
    const std::size_t site = n / 2;
    for (std::size_t code = 0; code < n_paths; ++code) {
        long long s = 0;
        double log_w = 0.0, ham = 0.0;
        std::size_t z1 = 0, z2 = 0;
        bool site_positive = false;
        for (std::size_t i = 1; i <= n; ++i) {
            const int step = digits[i - 1] - 1;
            log_w += lstep[digits[i - 1]];
            const long long s_prev = s;
            s += step;
            int sign;
            if (s > 0) sign = 1;
            else if (s < 0) sign = -1;
            else sign = (s_prev > 0) ? 1 : (s_prev < 0 ? -1 : 0);
            if (sign == 1) ham += wp[i];
            else if (sign == -1) ham += wm[i];
            else ham += wt[i];
            if (s == 0) {
                ham += w0[i];
                if (z1 == 0) z1 = i;
                else if (z2 == 0) z2 = i;
            }
            if (i == site && s > 0) site_positive = true;
        }
        const long double w = std::exp(log_w + ham);
        zf += w;
        if (z1 > 0) {
            single_f[z1] += w;
            if (z2 > 0) pair_f[z1 * (n + 1) + z2] += w;
        }
        if (s > 0) {
            zpls += w;
            sgn_f += w;
        } else if (s < 0) {
            zmns += w;
        } else {
            zc += w;
            if (z1 > 0) {
                single_c[z1] += w;
                if (z2 > 0) pair_c[z1 * (n + 1) + z2] += w;
            }
            if (site_positive) sgn_c += w;
        }
        if (keep_paths) {
            bf.path_prob_f[code] = double(w);
            if (s == 0) bf.path_prob_c[code] = double(w);
        }

        for (std::size_t i = 0; i < n; ++i) {
            if (++digits[i] < 3) break;
            digits[i] = 0;
        }
    }

    const double to_gauged = std::exp(-gauge_total);
    bf.z_c = double(zc) * to_gauged;
    bf.z_f = double(zf) * to_gauged;
    bf.z_p = double(zpls) * to_gauged;
    bf.z_m = double(zmns) * to_gauged;
    for (std::size_t k = 1; k <= n; ++k) {
        bf.single_c[k] = double(single_c[k] / zc);
        bf.single_f[k] = double(single_f[k] / zf);
    }
    for (std::size_t i = 0; i < (n + 1) * (n + 1); ++i) {
        bf.pair_c[i] = double(pair_c[i] / zc);
        bf.pair_f[i] = double(pair_f[i] / zf);
    }
    bf.sign_f = double(sgn_f / zf);
    bf.sign_c = double(sgn_c / zc);
    if (keep_paths) {
        for (double& v : bf.path_prob_f) v /= double(zf);
        for (double& v : bf.path_prob_c) v /= double(zc);
    }
    return bf;
}

}  // namespace copoly
