#ifndef VARSEL_CLI_HPP
#define VARSEL_CLI_HPP

#include "varsel/core.hpp"
#include "varsel/io.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace varsel {

// Exit codes are part of the scripting contract.
enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_numerical = 3 };

/// Runs one command line (args excludes the program name).
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

struct SimulationSpec {
    Eigen::Index n = 1000;
    Eigen::Index p = 10000;
    Eigen::Index n_causal = 10;
    double pve = 0.3;
    Family family = Family::gaussian;
    std::uint64_t seed = 1;
    double rho = 0;            // within-block correlation
    Eigen::Index block_size = 1;
    bool normal_effects = false;  // default: equal magnitudes, random signs
};

struct SimulatedData {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<Eigen::Index> causal;  // 0-based, ascending
    Eigen::VectorXd effects;           // aligned with causal
    double intercept = 0;
};

SimulatedData simulate(const SimulationSpec &spec);

inline constexpr std::array<double, 6> kPipCutoffs = {0.10, 0.25, 0.50, 0.75, 0.90, 0.95};

std::array<int, 6> cutoff_counts(const Eigen::VectorXd &pip);

/// Smallest set of grid points (by weight) holding at least `level` of the
/// mass; returns the indices.
std::vector<Eigen::Index> credible_set(const Eigen::VectorXd &w, double level);

std::string format_summary(const FitArchive &archive, int nv);

/// "9.355e+05"-style rendering.
std::string format_bayes_factor(double bf);

std::string format_double(double v);  // shortest round-trip

}  // namespace varsel

#endif
