#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracasym/coeffexpr.hpp"
#include "fracasym/solver.hpp"

namespace fracasym {

enum ExitCode : int {
    kExitOk = 0,
    kExitHypothesis = 1,
    kExitInput = 2,
    kExitNotConverged = 3,
    kExitVerification = 4,
};

/// One axis of a sweep, "param=lo:hi:steps[:log]" with param in
/// {alpha, amplitude, T}. steps = 0 gives an empty axis.
struct SweepAxis {
    std::string param;
    double lo = 0.0, hi = 0.0;
    int steps = 0;
    bool log = false;
    std::vector<double> values() const;
};
SweepAxis parse_sweep_axis(const std::string& text);

struct RunConfig {
    std::string command;
    std::optional<Coefficient> coeff;
    std::optional<SolveCase> which;   // check and sweep: unset means every case
    double alpha = 0.5;
    double a = 1.0, b = 1.0, T = 1.0;
    double t_max = kDefaultTMax;
    std::size_t nodes = kDefaultNodes;
    double grading = kDefaultGrading;
    double tolerance = 1e-10;
    int max_iterations = 60;
    double residual_tolerance = 5e-3;
    bool override_hypotheses = false;
    bool sweep_solve = false;
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> input;
    std::vector<SweepAxis> sweep;

    /// Throws DomainError when the scalars or the grid are out of range.
    void validate() const;
    SolveSpec solve_spec() const;
};

/// Each command prints its JSON report to out and, when config.out is set,
/// writes report and CSV files there. Returns an ExitCode.
int cmd_check(const RunConfig& config, std::ostream& out);
int cmd_solve(const RunConfig& config, std::ostream& out);
int cmd_verify(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& out);

int run_cli(int argc, char** argv);

}  // namespace fracasym
