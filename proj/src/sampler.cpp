#include "copoly/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace copoly {

namespace {

constexpr std::uint64_t kContactStream = 0xC0;
constexpr std::uint64_t kSignStream = 0x51;
constexpr std::uint64_t kBridgeStream = 0xB1;

std::size_t bridge_height_cap(double p, std::size_t m) {
    return std::min<std::size_t>(m, std::size_t(8.0 * std::sqrt(2.0 * p * double(m))) + 8);
}

}  // namespace

Bridges::Bridges(double p, std::size_t exact_len_cap) : p_(p), cap_(exact_len_cap) {
    const double stay = 1.0 - 2.0 * p;
    g_.resize(cap_ + 1);
    gbar_.resize(cap_ + 1);
    for (std::size_t m = 1; m <= cap_; ++m) {
        const std::size_t hm = bridge_height_cap(p_, m);
        g_[m].assign(hm, 0.0);
        gbar_[m].assign(hm, 0.0);
        for (std::size_t i = 0; i < hm; ++i) {
            const long long x = (long long)i + 1;
            // Down-steps to 0 are weighted by g(m-1, 0) = [m-1 == 0]: an early
            // zero kills the excursion, the terminal one completes it.
            g_[m][i] = stay * g(m - 1, x) + p * g(m - 1, x + 1) + p * g(m - 1, x - 1);
            gbar_[m][i] = stay * gbar(m - 1, x) + p * gbar(m - 1, x + 1) +
                          (x >= 2 ? p * gbar(m - 1, x - 1) : 0.0);
        }
    }
}

double Bridges::g(std::size_t m, long long x) const {
    if (m == 0) return x == 0 ? 1.0 : 0.0;
    if (x <= 0) return 0.0;
    if ((std::size_t)x > m) return 0.0;
    if (m <= cap_ && (std::size_t)x <= g_[m].size()) return g_[m][x - 1];
    // Diffusive hitting density from height x (step variance 2p).
    const double xm = double(x), mm = double(m);
    return xm / (2.0 * std::sqrt(M_PI * p_)) * std::pow(mm, -1.5) *
           std::exp(-xm * xm / (4.0 * p_ * mm));
}

double Bridges::gbar(std::size_t m, long long x) const {
    if (x <= 0) return 0.0;
    if (m == 0) return 1.0;
    if ((std::size_t)x > m) return 1.0;
    if (m <= cap_ && (std::size_t)x <= gbar_[m].size()) return gbar_[m][x - 1];
    return std::erf(double(x) / (2.0 * std::sqrt(p_ * double(m))));
}

void Bridges::fill_bridge(std::size_t len, std::size_t visible, long long* out, Rng& rng) const {
    long long x = 0;
    const double stay = 1.0 - 2.0 * p_;
    for (std::size_t i = 1; i <= visible; ++i) {
        const std::size_t rem = len - i;  // steps remaining after this one
        long long y;
        if (x == 0) {
            y = 1;  // first step of a positive modulus
        } else {
            const double wu = p_ * g(rem, x + 1);
            const double ws = stay * g(rem, x);
            const double wd = p_ * g(rem, x - 1);
            const double u = rng.u01() * (wu + ws + wd);
            y = (u < wu) ? x + 1 : (u < wu + ws ? x : x - 1);
        }
        x = y;
        out[i - 1] = x;
    }
}

void Bridges::fill_meander(std::size_t len, std::size_t visible, long long* out, Rng& rng) const {
    long long x = 0;
    const double stay = 1.0 - 2.0 * p_;
    for (std::size_t i = 1; i <= visible; ++i) {
        const std::size_t rem = len - i;
        long long y;
        if (x == 0) {
            y = 1;
        } else {
            const double wu = p_ * gbar(rem, x + 1);
            const double ws = stay * gbar(rem, x);
            const double wd = p_ * gbar(rem, x - 1);  // gbar(., 0) = 0: no zero allowed
            const double u = rng.u01() * (wu + ws + wd);
            y = (u < wu) ? x + 1 : (u < wu + ws ? x : x - 1);
        }
        x = y;
        out[i - 1] = x;
    }
}

double sign_plus_prob(const CycleCharges& c, std::size_t alpha, std::size_t len) {
    const double z = -double(len) * c.h + c.sigma(alpha % c.period, c.cls(alpha + len));
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

FiniteSampler::FiniteSampler(const KernelSet& ks, const PartitionTable& table,
                             const WalkLaw& walk, bool with_moduli)
    : ks_(ks), tab_(table), walk_(walk) {
    if (tab_.horizon > ks_.n_max)
        throw std::invalid_argument("FiniteSampler: table horizon exceeds the kernel table");
    ebt_.resize(tab_.horizon + 1);
    const double decay = std::exp(-tab_.tilt);
    ebt_[0] = 1.0;
    for (std::size_t t = 1; t <= tab_.horizon; ++t) ebt_[t] = ebt_[t - 1] * decay;
    if (with_moduli) bridges_.emplace(walk.p, std::min<std::size_t>(tab_.horizon, 4096));
}

namespace {

// Shared contact/sign draw for the finite sampler; contact and sign
// randomness come from distinct streams.
ContactsSigns finite_contacts_signs(const KernelSet& ks, const PartitionTable& tab,
                                    const std::vector<double>& ebt, Boundary a, Rng& r_contact,
                                    Rng& r_sign) {
    const std::size_t n = tab.horizon, t = tab.period;
    ContactsSigns cs;
    cs.contacts.push_back(0);
    std::size_t cur = 0;
    while (cur < n) {
        const std::size_t rem = n - cur;
        const std::size_t cls = cur % t;
        double acc = 0.0;
        bool moved = false;
        std::size_t tc = (cls + 1) % t;
        if (a == Boundary::constrained) {
            const double u = r_contact.u01() * tab.sc[cls][rem];
            std::size_t step = rem;  // roundoff fallback
            for (std::size_t m = 1; m <= rem; ++m) {
                acc += ks.m[cls][m] * ebt[m] * (tab.xi[tc] / tab.xi[cls]) * tab.sc[tc][rem - m];
                if (acc >= u) {
                    step = m;
                    break;
                }
                if (++tc == t) tc = 0;
            }
            cur += step;
            cs.contacts.push_back(cur);
            moved = true;
        } else {
            const double u = r_contact.u01() * tab.sf[cls][rem];
            for (std::size_t m = 1; m <= rem; ++m) {
                acc += ks.m[cls][m] * ebt[m] * tab.sf[tc][rem - m];
                if (acc >= u) {
                    cur += m;
                    cs.contacts.push_back(cur);
                    moved = true;
                    break;
                }
                if (++tc == t) tc = 0;
            }
        }
        if (!moved) {  // free case: no further contact before N
            cs.final_len = rem;
            break;
        }
    }

    const CycleCharges& c = ks.charges;
    for (std::size_t i = 1; i < cs.contacts.size(); ++i) {
        const std::size_t from = cs.contacts[i - 1], len = cs.contacts[i] - from;
        cs.signs.push_back(
            len == 1 ? 0 : (r_sign.u01() < sign_plus_prob(c, from % t, len) ? 1 : -1));
    }
    if (cs.final_len > 0) {
        const std::size_t from = cs.contacts.back();
        cs.final_sign = r_sign.u01() < sign_plus_prob(c, from % t, cs.final_len) ? 1 : -1;
    }
    return cs;
}

}  // namespace

ContactsSigns FiniteSampler::contacts_signs(Boundary a, Rng& rng) const {
    Rng r_contact = rng.split(kContactStream);
    Rng r_sign = rng.split(kSignStream);
    return finite_contacts_signs(ks_, tab_, ebt_, a, r_contact, r_sign);
}

PathSample FiniteSampler::sample(Boundary a, std::uint64_t seed) const {
    if (!bridges_) throw std::logic_error("FiniteSampler: built without moduli support");
    Rng root(seed);
    Rng r_contact = root.split(kContactStream);
    Rng r_sign = root.split(kSignStream);
    Rng r_bridge = root.split(kBridgeStream);
    ContactsSigns cs = finite_contacts_signs(ks_, tab_, ebt_, a, r_contact, r_sign);

    PathSample ps;
    ps.seed = seed;
    ps.contacts = cs.contacts;
    ps.signs = cs.signs;
    const std::size_t n = tab_.horizon;
    ps.heights.assign(n + 1, 0);
    std::vector<long long> buf(n + 1, 0);
    for (std::size_t i = 1; i < cs.contacts.size(); ++i) {
        const std::size_t from = cs.contacts[i - 1], len = cs.contacts[i] - from;
        if (len <= 1) continue;
        bridges_->fill_bridge(len, len, buf.data(), r_bridge);
        const long long sgn = cs.signs[i - 1];
        for (std::size_t j = 1; j < len; ++j) ps.heights[from + j] = sgn * buf[j - 1];
    }
    if (cs.final_len > 0) {
        const std::size_t from = cs.contacts.back();
        bridges_->fill_meander(cs.final_len, cs.final_len, buf.data(), r_bridge);
        for (std::size_t j = 1; j <= cs.final_len; ++j)
            ps.heights[from + j] = (long long)cs.final_sign * buf[j - 1];
        ps.signs.push_back(cs.final_sign);
    }
    return ps;
}

InfiniteSampler::InfiniteSampler(const KernelSet& ks, const SemiMarkovKernel& kernel,
                                 const GibbsDecomposition* gd, std::size_t eta, Boundary a,
                                 const WalkLaw& walk)
    : ks_(ks), kernel_(kernel), gd_(gd), eta_(eta), boundary_(a), walk_(walk) {
    if (kernel_.defective && gd_ == nullptr)
        throw std::invalid_argument("InfiniteSampler: defective kernels need the decomposition");
    const std::size_t t = kernel_.period;
    cum_.assign(t, {});
    hold_mass_.assign(t, 0.0);
    for (std::size_t cls = 0; cls < t; ++cls) {
        cum_[cls].resize(kernel_.n_cut + 1, 0.0);
        double acc = 0.0;
        for (std::size_t m = 1; m <= kernel_.n_cut; ++m) {
            acc += kernel_.hold[cls][m];
            cum_[cls][m] = acc;
        }
        hold_mass_[cls] = acc;
    }
}

std::size_t InfiniteSampler::draw_holding(std::size_t cls, Rng& rng, bool* escaped) const {
    *escaped = false;
    const double u = rng.u01();
    if (kernel_.defective && u >= 1.0 - kernel_.escape[cls]) {
        *escaped = true;
        return 0;
    }
    const std::vector<double>& cum = cum_[cls];
    if (u < hold_mass_[cls]) {
        const auto it = std::upper_bound(cum.begin() + 1, cum.end(), u);
        return std::size_t(it - cum.begin());
    }
    // Beyond the table: invert the analytic survival ~ ((n_cut+1/2)/(x+1/2))^{1/2}.
    const double w = rng.u01();
    const double frac = std::max(1e-16, 1.0 - w);
    const double x = (double(kernel_.n_cut) + 0.5) / (frac * frac) - 0.5;
    return std::max<std::size_t>(kernel_.n_cut + 1, std::size_t(std::ceil(x)));
}

ContactsSigns InfiniteSampler::contacts_signs(std::size_t horizon, Rng& rng) const {
    Rng r_contact = rng.split(kContactStream);
    Rng r_sign = rng.split(kSignStream);
    const std::size_t t = kernel_.period;
    const CycleCharges& c = ks_.charges;

    ContactsSigns cs;
    cs.contacts.push_back(0);
    std::size_t cur = 0;
    while (cur < horizon) {
        bool esc = false;
        const std::size_t hold = draw_holding(cur % t, r_contact, &esc);
        if (esc) {
            cs.escaped = true;
            break;
        }
        if (cur + hold <= horizon) {
            cur += hold;
            cs.contacts.push_back(cur);
        } else {
            cs.final_len = hold;  // completed excursion crossing the horizon
            break;
        }
    }

    for (std::size_t i = 1; i < cs.contacts.size(); ++i) {
        const std::size_t from = cs.contacts[i - 1], len = cs.contacts[i] - from;
        cs.signs.push_back(len == 1 ? 0
                                    : (r_sign.u01() < sign_plus_prob(c, from % t, len) ? 1 : -1));
    }
    const std::size_t last = cs.contacts.back();
    if (cs.escaped) {
        // Last (infinite) excursion: +1 with probability x / mu_{alpha,eta},
        // which aggregates to r(eta, a) over the contact-set law.
        const double wplus = gd_->x(eta_, boundary_);
        const double wminus = gd_->y(eta_, boundary_) * std::exp(-c.sigma(0, last % t));
        cs.final_sign = r_sign.u01() * (wplus + wminus) < wplus ? 1 : -1;
    } else if (cs.final_len > 0) {
        cs.final_sign = r_sign.u01() < sign_plus_prob(c, last % t, cs.final_len) ? 1 : -1;
    }
    return cs;
}

PathSample InfiniteSampler::sample(std::size_t horizon, std::uint64_t seed,
                                   bool with_moduli) const {
    Rng root(seed);
    ContactsSigns cs = contacts_signs(horizon, root);
    PathSample ps;
    ps.seed = seed;
    ps.contacts = cs.contacts;
    ps.signs = cs.signs;
    ps.escaped = cs.escaped;
    if (!with_moduli) {
        if (cs.escaped || cs.final_len > 0) ps.signs.push_back(cs.final_sign);
        return ps;
    }

    if (!bridges_) bridges_.emplace(walk_.p, 4096);
    Rng r_bridge = root.split(kBridgeStream);
    ps.heights.assign(horizon + 1, 0);
    std::vector<long long> buf(horizon + 1, 0);
    for (std::size_t i = 1; i < cs.contacts.size(); ++i) {
        const std::size_t from = cs.contacts[i - 1], len = cs.contacts[i] - from;
        if (len <= 1) continue;
        bridges_->fill_bridge(len, len, buf.data(), r_bridge);
        const long long sgn = cs.signs[i - 1];
        for (std::size_t j = 1; j < len; ++j) ps.heights[from + j] = sgn * buf[j - 1];
    }
    const std::size_t last = cs.contacts.back();
    if (cs.escaped) {
        ConditionedWalk cw = conditioned_step_kernel(walk_.p);
        long long x = 0;
        for (std::size_t j = 1; last + j <= horizon; ++j) {
            x = cw.step(x, r_bridge);
            ps.heights[last + j] = (long long)cs.final_sign * x;
        }
        ps.signs.push_back(cs.final_sign);
        ps.censored = last < horizon;
    } else if (cs.final_len > 0) {
        const std::size_t visible = horizon - last;
        if (visible > 0) {
            bridges_->fill_bridge(cs.final_len, visible, buf.data(), r_bridge);
            for (std::size_t j = 1; j <= visible; ++j)
                ps.heights[last + j] = (long long)cs.final_sign * buf[j - 1];
        }
        ps.signs.push_back(cs.final_sign);
        ps.censored = true;
    }
    return ps;
}

std::vector<double> renewal_mass(const SemiMarkovKernel& kernel,
                                 const std::vector<std::size_t>& n_list) {
    if (kernel.defective) throw std::invalid_argument("renewal_mass: defective kernel rejected");
    std::size_t n_top = 0;
    for (std::size_t n : n_list) n_top = std::max(n_top, n);
    if (n_top > kernel.n_cut)
        throw std::invalid_argument("renewal_mass: horizon beyond the kernel table");

    const std::size_t t = kernel.period;
    std::vector<double> u(n_top + 1, 0.0);
    u[0] = 1.0;
    if (t == 1) {
        const double* h = kernel.hold[0].data();
        for (std::size_t n = 1; n <= n_top; ++n) {
            double acc = 0.0;
            for (std::size_t m = 1; m <= n; ++m) acc += u[n - m] * h[m];
            u[n] = acc;
        }
    } else {
        for (std::size_t n = 1; n <= n_top; ++n) {
            double acc = 0.0;
            std::size_t cls = (n - 1) % t;
            for (std::size_t m = 1; m <= n; ++m) {
                acc += u[n - m] * kernel.hold[cls][m];
                cls = (cls == 0) ? t - 1 : cls - 1;
            }
            u[n] = acc;
        }
    }
    std::vector<double> out;
    out.reserve(n_list.size());
    for (std::size_t n : n_list) out.push_back(u[n]);
    return out;
}

}  // namespace copoly
