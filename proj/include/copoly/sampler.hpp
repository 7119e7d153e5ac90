// Exact path sampling: contact set -> excursion signs -> excursion moduli.
// Finite volume samples from the partition tables; infinite volume from the
// limit kernels (proper or defective). All randomness flows through split
// streams of one counter-based seed, so samples are bit-reproducible.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "copoly/charges.hpp"
#include "copoly/limits.hpp"
#include "copoly/partition.hpp"
#include "copoly/rng.hpp"
#include "copoly/semi_markov.hpp"
#include "copoly/spectral.hpp"
#include "copoly/walk.hpp"

namespace copoly {

struct PathSample {
    std::vector<long long> heights;     // S_0..S_H
    std::vector<std::size_t> contacts;  // zero set, starting with 0
    std::vector<int> signs;             // one per excursion, the last possibly incomplete
    std::uint64_t seed = 0;
    bool censored = false;  // last excursion extends beyond the horizon
    bool escaped = false;   // defective case: the contact set terminated
};

struct ContactsSigns {
    std::vector<std::size_t> contacts;  // starts with 0
    std::vector<int> signs;             // per completed excursion
    int final_sign = 0;                 // sign of the trailing incomplete excursion
    std::size_t final_len = 0;          // its length (0 if the path ends in a contact)
    bool escaped = false;
};

// Conditioned-excursion step tables: g(m, x) = P_x(stay > 0 for m-1 steps,
// hit 0 at step m) and gbar(m, x) = P_x(stay > 0 for m steps). Exact up to
// the length cap, diffusive asymptotics beyond (each sampling step
// renormalizes its candidate weights, so the sampler stays a proper law).
class Bridges {
  public:
    Bridges(double p, std::size_t exact_len_cap = 4096);

    double g(std::size_t m, long long x) const;
    double gbar(std::size_t m, long long x) const;

    // Heights 1..visible of an excursion of total length len (> 1), positive
    // modulus; out[i] receives e(i), out must have room for visible entries.
    void fill_bridge(std::size_t len, std::size_t visible, long long* out, Rng& rng) const;
    // Modulus of an incomplete excursion: stays positive through step len.
    void fill_meander(std::size_t len, std::size_t visible, long long* out, Rng& rng) const;

  private:
    double p_;
    std::size_t cap_;
    std::vector<std::vector<double>> g_, gbar_;  // [m][x-1], ragged heights
};

class FiniteSampler {
  public:
    // with_moduli controls whether the bridge tables are prepared; contact
    // and sign sampling never needs them.
    FiniteSampler(const KernelSet& ks, const PartitionTable& table, const WalkLaw& walk,
                  bool with_moduli = true);

    ContactsSigns contacts_signs(Boundary a, Rng& rng) const;
    PathSample sample(Boundary a, std::uint64_t seed) const;

  private:
    const KernelSet& ks_;
    const PartitionTable& tab_;
    const WalkLaw& walk_;
    std::vector<double> ebt_;  // e^{-tilt * t}
    std::optional<Bridges> bridges_;
};

// P(sigma = +1) for an excursion of length len between classes a and a+[len].
double sign_plus_prob(const CycleCharges& c, std::size_t alpha, std::size_t len);

class InfiniteSampler {
  public:
    // Proper (localized/critical) kernels: gd may be null. Defective kernels
    // need the decomposition for the last-excursion sign.
    InfiniteSampler(const KernelSet& ks, const SemiMarkovKernel& kernel,
                    const GibbsDecomposition* gd, std::size_t eta, Boundary a,
                    const WalkLaw& walk);

    ContactsSigns contacts_signs(std::size_t horizon, Rng& rng) const;
    PathSample sample(std::size_t horizon, std::uint64_t seed, bool with_moduli = true) const;

  private:
    std::size_t draw_holding(std::size_t cls, Rng& rng, bool* escaped) const;

    const KernelSet& ks_;
    const SemiMarkovKernel& kernel_;
    const GibbsDecomposition* gd_;
    std::size_t eta_;
    Boundary boundary_;
    const WalkLaw& walk_;
    std::vector<std::vector<double>> cum_;  // per class, cumulative holding mass
    std::vector<double> hold_mass_;         // cum end per class
    mutable std::optional<Bridges> bridges_;
};

// Mass renewal function P(n in tau-hat) of a proper kernel, exact DP.
// Requires max(n_list) <= kernel.n_cut; rejects defective kernels.
std::vector<double> renewal_mass(const SemiMarkovKernel& kernel,
                                 const std::vector<std::size_t>& n_list);

}  // namespace copoly
