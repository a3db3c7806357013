#pragma once

// Iterative solvers for the crystallographic problem: RRR, alternating
// projections, and the charge-flipping map. All three share one harness
// (initialization, certificate, trace, timing).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phasebench/grid.hpp"
#include "phasebench/projections.hpp"

namespace phasebench {

enum class Algorithm { rrr, alternating, charge_flip };

std::string algorithm_name(Algorithm a);  // "rrr", "alternating", "charge-flip"
Algorithm parse_algorithm(const std::string& s);

struct SolverConfig {
  double beta = 0.5;
  long max_iterations = 100000000;
  double check_threshold = 0.95;
  std::uint64_t seed = 0;
  long trace_stride = 0;  // 0 = no trace
  // Relative step below which alternating projections is reported as stalled.
  double stall_tolerance = 1e-10;
};

// Throws InvalidArgument unless 0 < beta < 2, 0 < threshold < 1, max_iterations >= 1.
void validate(const SolverConfig& cfg);

struct TracePoint {
  long iteration = 0;
  double power_ratio = 0.0;
};

struct SolveReport {
  Algorithm algorithm = Algorithm::rrr;
  long iterations = 0;
  bool solved = false;
  bool stalled = false;
  double final_ratio = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::vector<TracePoint> trace;
};

struct SolveOutcome {
  SolveReport report;
  std::optional<PhaseSolution> solution;  // set when solved (and the dc of rho2 is positive)
  RealGrid final_grid;                    // rho2 of the last iteration
};

// Starts from i.i.d. standard-normal pixels drawn from cfg.seed, or from
// `initial` when given. ZeroPower propagates when the certificate sees an
// all-zero signal.
SolveOutcome solve(Algorithm algorithm, const MagnitudeField& data, std::size_t support_size, const SolverConfig& cfg,
                   const RealGrid* initial = nullptr);

inline SolveOutcome rrr_solve(const MagnitudeField& data, std::size_t support_size, const SolverConfig& cfg,
                              const RealGrid* initial = nullptr) {
  return solve(Algorithm::rrr, data, support_size, cfg, initial);
}
inline SolveOutcome alternating_solve(const MagnitudeField& data, std::size_t support_size, const SolverConfig& cfg,
                                      const RealGrid* initial = nullptr) {
  return solve(Algorithm::alternating, data, support_size, cfg, initial);
}
inline SolveOutcome charge_flip_solve(const MagnitudeField& data, std::size_t support_size, const SolverConfig& cfg,
                                      const RealGrid* initial = nullptr) {
  return solve(Algorithm::charge_flip, data, support_size, cfg, initial);
}

RealGrid random_initial_grid(std::size_t m, std::uint64_t seed);

// CSV "iteration,power_ratio".
std::string trace_csv(const SolveReport& r);
// JSON array of reports.
std::string reports_json(const std::vector<SolveReport>& reports);

}  // namespace phasebench
