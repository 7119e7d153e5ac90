// Command-line front end. The dispatcher is a library function so the test
// suite can run commands in-process.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace copoly {

struct RunConfig {
    std::string command;  // free-energy, classify, partition, asymptotics,
                          // sample, limits, phase-diagram, verify
    std::string input;    // charge-spec JSON path
    std::string output;   // output path prefix ("" = stdout)
    std::uint64_t seed = 1905;  // documented default
    std::size_t n_max = std::size_t(1) << 16;
    std::size_t horizon = 0;        // N for partition/sample
    std::size_t samples = 1;        // sample batch size
    std::size_t eta = 0;            // class of the approach subsequence
    std::string boundary = "free";  // free | constrained
    std::string beta_grid, h_grid;  // "lo:hi:step"
    bool rho_mc = false;            // phase-diagram: add MC order parameter
    std::size_t mc_samples = 2000;
    std::size_t mc_horizon = 4000;
    double cls_tol = 1e-9;
};

// Returns the process exit code; writes artifacts and human output to `out`,
// machine-readable errors as one-line JSON to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace copoly
