// Shared fixtures: walk tables are the expensive input, cache them per p.
#pragma once

#include <cstddef>
#include <map>

#include "copoly/charges.hpp"
#include "copoly/rng.hpp"
#include "copoly/walk.hpp"

namespace copoly_test {

inline const copoly::WalkLaw& cached_walk(double p, std::size_t n_max = std::size_t(1) << 16) {
    static std::map<std::pair<double, std::size_t>, copoly::WalkLaw> cache;
    auto key = std::make_pair(p, n_max);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, copoly::first_return_law(p, n_max)).first;
    return it->second;
}

inline copoly::RawCharges random_raw(copoly::Rng& rng, std::size_t period, double amp = 1.0) {
    copoly::RawCharges raw;
    for (auto* seq : {&raw.plus, &raw.minus, &raw.zero, &raw.zero_tilde}) {
        seq->resize(period);
        for (double& v : *seq) v = amp * (2.0 * rng.u01() - 1.0);
    }
    return raw;
}

}  // namespace copoly_test
