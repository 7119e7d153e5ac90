#include "copoly/charges.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace copoly {

namespace {

// Expand an input sequence (positions 1..L) onto classes 0..T-1.
std::vector<double> expand(const std::vector<double>& v, std::size_t t) {
    std::vector<double> w(t, 0.0);
    for (std::size_t c = 0; c < t; ++c) {
        const std::size_t pos = (c == 0) ? t : c;  // a position with class c
        w[c] = v[(pos - 1) % v.size()];
    }
    return w;
}

// log(0.5 (1 + e^z)) without overflow.
double log_half_one_plus_exp(double z) {
    constexpr double kLog2 = 0.6931471805599453;
    if (z > 0.0) return z - kLog2 + std::log1p(std::exp(-z));
    return -kLog2 + std::log1p(std::exp(z));
}

double kahan_sum_strided(const std::vector<double>& v, std::size_t first, std::size_t stride,
                         std::size_t last) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t n = first; n <= last; n += stride) {
        const double y = v[n] - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace

double CycleCharges::gauge_mean() const {
    double s = 0.0;
    for (double g : gauge) s += g;
    return s / double(period);
}

CycleCharges normalize(const RawCharges& raw) {
    for (const auto* seq : {&raw.plus, &raw.minus, &raw.zero, &raw.zero_tilde}) {
        if (seq->empty()) throw std::invalid_argument("normalize: empty charge sequence");
        for (double v : *seq)
            if (!std::isfinite(v)) throw std::invalid_argument("normalize: non-finite charge value");
    }
    std::size_t t = std::lcm(raw.plus.size(), raw.minus.size());
    t = std::lcm(t, raw.zero.size());
    t = std::lcm(t, raw.zero_tilde.size());

    CycleCharges c;
    c.period = t;
    std::vector<double> plus = expand(raw.plus, t);
    std::vector<double> minus = expand(raw.minus, t);
    c.w_zero = expand(raw.zero, t);
    c.w_zero_tilde = expand(raw.zero_tilde, t);

    double h_raw = 0.0;
    for (std::size_t g = 0; g < t; ++g) h_raw += plus[g] - minus[g];
    h_raw /= double(t);
    c.flipped = h_raw < 0.0;
    if (c.flipped) std::swap(plus, minus);

    c.gauge = plus;
    c.w_plus.assign(t, 0.0);
    c.w_minus.resize(t);
    for (std::size_t g = 0; g < t; ++g) {
        c.w_minus[g] = minus[g] - plus[g];
        c.w_zero_tilde[g] -= plus[g];
    }
    c.h = std::fabs(h_raw);

    // sigma_to[g] = sum_{n=1..g} (w_minus)_n + g h; exact cocycle via differences.
    c.sigma_to.assign(t, 0.0);
    double acc = 0.0;
    for (std::size_t g = 1; g < t; ++g) {
        acc += c.w_minus[c.cls(g)];
        c.sigma_to[g] = acc + double(g) * c.h;
    }
    return c;
}

Mat sigma_matrix(const CycleCharges& c) {
    const std::size_t t = c.period;
    Mat s(t);
    for (std::size_t a = 0; a < t; ++a)
        for (std::size_t b = 0; b < t; ++b) s(a, b) = c.sigma(a, b);
    return s;
}

double phi(const CycleCharges& c, std::size_t alpha, std::size_t ell) {
    if (ell == 0) throw std::invalid_argument("phi: excursion length must be >= 1");
    const std::size_t beta = c.cls(alpha + ell);
    if (ell == 1) return c.w_zero[beta] + c.w_zero_tilde[beta];
    const double z = -double(ell) * c.h + c.sigma(alpha % c.period, beta);
    return c.w_zero[beta] + log_half_one_plus_exp(z);
}

KernelSet m_kernel(const CycleCharges& c, const WalkLaw& walk, std::size_t n_max) {
    if (walk.n_max < n_max)
        throw std::invalid_argument("m_kernel: walk table shorter than requested n_max");
    KernelSet ks;
    ks.charges = c;
    ks.n_max = n_max;
    const std::size_t t = c.period;
    ks.m.assign(t, std::vector<double>(n_max + 1, 0.0));
    ks.log_m.assign(t, std::vector<double>(n_max + 1, 0.0));
    // Phi depends on n only through the target class once n > 1 and h = 0;
    // with h > 0 there is an extra -n h drift inside the log term.
    for (std::size_t a = 0; a < t; ++a) {
        for (std::size_t n = 1; n <= n_max; ++n) {
            const double lm = phi(c, a, n) + std::log(walk.ret[n]);
            ks.log_m[a][n] = lm;
            ks.m[a][n] = std::exp(lm);
        }
    }
    return ks;
}

void b_matrix(KernelSet& ks, const WalkLaw& walk, bool with_tail) {
    const std::size_t t = ks.period();
    ks.b = Mat(t);
    ks.tail_corr = Mat(t);
    ks.tail_warning = false;
    for (std::size_t a = 0; a < t; ++a)
        for (std::size_t s = 0; s < t; ++s) {
            const std::size_t beta = (a + s) % t;
            const std::size_t first = (s == 0) ? t : s;
            if (first <= ks.n_max)
                ks.b(a, beta) = kahan_sum_strided(ks.m[a], first, t, ks.n_max);
        }
    if (!with_tail) {
        ks.tail_corrected = false;
        return;
    }

    // Tail beyond n_max. The exact total sum_{n > n_max} K(n) = Q(n_max) is
    // split across residue classes in proportion to the per-residue analytic
    // completions (2 c_K / T)(M_s - T/2)^{-1/2}; the common relative error of
    // the completion cancels in the proportions, so the split inherits the
    // accuracy of Q(n_max) itself.
    const double q_total = walk.surv[ks.n_max];
    std::vector<double> first_idx(t), share(t);
    double share_sum = 0.0;
    for (std::size_t s = 0; s < t; ++s) {
        std::size_t ms = ks.n_max + 1;
        while (ms % t != s) ++ms;
        first_idx[s] = double(ms);
        share[s] = 1.0 / std::sqrt(double(ms) - double(t) / 2.0);
        share_sum += share[s];
    }
    for (std::size_t s = 0; s < t; ++s) share[s] *= q_total / share_sum;

    const CycleCharges& c = ks.charges;
    const bool h0 = c.h_is_zero();
    for (std::size_t a = 0; a < t; ++a)
        for (std::size_t s = 0; s < t; ++s) {
            const std::size_t beta = (a + s) % t;
            double drift_part;
            if (h0) {
                drift_part = std::exp(c.sigma(a, beta)) * share[s];
            } else {
                // sum_{n > n_max, n = s (mod T)} K(n) e^{-n h}, geometric bound
                // evaluated at the first tail index; negligible for any real h.
                const double ms = first_idx[s];
                drift_part = std::exp(c.sigma(a, beta) - ms * c.h) * walk.c_tail *
                             std::pow(ms, -1.5) / (1.0 - std::exp(-double(t) * c.h));
            }
            const double corr = 0.5 * std::exp(c.w_zero[beta]) * (share[s] + drift_part);
            ks.tail_corr(a, beta) = corr;
            if (corr > 1e-6 * std::max(ks.b(a, beta), 1e-300)) ks.tail_warning = true;
            ks.b(a, beta) += corr;
        }
    ks.tail_corrected = true;
}

void l_matrices(KernelSet& ks, const WalkLaw& walk) {
    if (!walk.c_tail_converged)
        throw std::invalid_argument("l_matrices: tail constant of the walk has not converged");
    const std::size_t t = ks.period();
    const CycleCharges& c = ks.charges;
    ks.l = Mat(t);
    ks.l_tilde = Mat(t);
    const bool h0 = c.h_is_zero();
    for (std::size_t a = 0; a < t; ++a)
        for (std::size_t b = 0; b < t; ++b) {
            const double lt = h0 ? walk.c_tail * (1.0 + std::exp(c.sigma(a, b))) : walk.c_tail;
            ks.l_tilde(a, b) = lt;
            ks.l(a, b) = 0.5 * std::exp(c.w_zero[b]) * lt;
        }
}

KernelSet build_kernel_set(const CycleCharges& c, const WalkLaw& walk,
                           const KernelSetOptions& opt) {
    if (opt.with_tail && !walk.c_tail_converged)
        throw std::invalid_argument(
            "build_kernel_set: tail-corrected build needs a converged tail constant "
            "(use a longer walk table or with_tail = false)");
    KernelSet ks = m_kernel(c, walk, opt.n_max);
    b_matrix(ks, walk, opt.with_tail);
    if (opt.with_tail) l_matrices(ks, walk);
    return ks;
}

bool in_p_less(const CycleCharges& c, double delta, double tol, double cls_tol) {
    if (delta >= 1.0 - cls_tol) return false;
    if (!c.h_is_zero(tol)) return false;
    for (double s : c.sigma_to)
        if (std::fabs(s) > tol) return true;
    return false;
}

}  // namespace copoly
