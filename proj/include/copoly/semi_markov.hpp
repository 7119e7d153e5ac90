// Semi-Markov kernel on classes x holding times: the target class of a jump
// of length n from class a is forced to a + [n]. Defective kernels carry a
// per-class escape weight to the absorbing infinite excursion.
#pragma once

#include <cstddef>
#include <vector>

namespace copoly {

struct SemiMarkovKernel {
    std::size_t period = 1;
    std::size_t n_cut = 0;
    // hold[a][n], n = 1..n_cut: probability of a completed holding of length n.
    std::vector<std::vector<double>> hold;
    // Mass of holdings beyond n_cut, per class: the truncation is recorded,
    // never dropped (tail_residual includes the analytic part beyond the
    // kernel set's table).
    std::vector<double> tail_residual;
    std::vector<double> escape;  // per class; zero rows when not defective
    bool defective = false;

    // sum_n hold + tail_residual + escape, the quantity that must equal 1.
    double row_mass(std::size_t a) const {
        double s = 0.0, comp = 0.0;
        for (std::size_t n = 1; n <= n_cut; ++n) {
            const double y = hold[a][n] - comp;
            const double t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        return s + tail_residual[a] + escape[a];
    }

    double mean_holding(std::size_t a) const {
        double s = 0.0;
        for (std::size_t n = 1; n <= n_cut; ++n) s += double(n) * hold[a][n];
        return s;
    }
};

}  // namespace copoly
