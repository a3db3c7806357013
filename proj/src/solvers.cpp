#include "phasebench/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "phasebench/errors.hpp"
#include "phasebench/random.hpp"

namespace phasebench {

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::rrr: return "rrr";
    case Algorithm::alternating: return "alternating";
    case Algorithm::charge_flip: return "charge-flip";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "rrr") return Algorithm::rrr;
  if (s == "alternating" || s == "ap") return Algorithm::alternating;
  if (s == "charge-flip" || s == "cf") return Algorithm::charge_flip;
  throw InvalidArgument("unknown solver '" + s + "' (rrr, alternating, charge-flip)");
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.beta > 0.0 && cfg.beta < 2.0)) throw InvalidArgument("solver: beta must lie in (0, 2)");
  if (!(cfg.check_threshold > 0.0 && cfg.check_threshold < 1.0))
    throw InvalidArgument("solver: threshold must lie in (0, 1)");
  if (cfg.max_iterations < 1) throw InvalidArgument("solver: max_iterations must be positive");
  if (cfg.trace_stride < 0) throw InvalidArgument("solver: negative trace stride");
}

RealGrid random_initial_grid(std::size_t m, std::uint64_t seed) {
  RealGrid g(m);
  CounterRng rng(seed, Stream::solver);
  for (double& v : g.values()) v = rng.normal();
  return g;
}

SolveOutcome solve(Algorithm algorithm, const MagnitudeField& data, std::size_t support_size, const SolverConfig& cfg,
                   const RealGrid* initial) {
  validate(cfg);
  const std::size_t m = data.size();
  require_supported_size(m);
  if (support_size == 0 || support_size > m * m) throw InvalidArgument("solver: support size outside [1, M^2]");
  if (initial && initial->size() != m) throw InvalidArgument("solver: initial grid size does not match data");

  const auto start = std::chrono::steady_clock::now();
  FourierEngine engine(m);
  const std::size_t pixels = m * m;
  const RealGrid start_grid = initial ? *initial : random_initial_grid(m, cfg.seed);
  std::vector<double> rho(start_grid.values().begin(), start_grid.values().end());
  std::vector<double> rho1(pixels), rho2(pixels), work(pixels);
  std::vector<cdouble> half(engine.half_count());
  std::vector<std::uint32_t> support;

  SolveOutcome out;
  SolveReport& rep = out.report;
  rep.algorithm = algorithm;
  rep.seed = cfg.seed;

  for (long it = 1; it <= cfg.max_iterations; ++it) {
    // rho1 = P1(rho)
    select_top_values(rho, support_size, support);
    std::fill(rho1.begin(), rho1.end(), 0.0);
    for (std::uint32_t i : support) rho1[i] = rho[i];

    // Argument of P2.
    if (algorithm == Algorithm::alternating) {
      work = rho1;
    } else {
      for (std::size_t i = 0; i < pixels; ++i) work[i] = 2.0 * rho1[i] - rho[i];
    }
    engine.forward(work, half);
    apply_magnitudes(half, data);
    engine.inverse(half, rho2);

    const double ratio = power_ratio(rho2, support);
    rep.iterations = it;
    rep.final_ratio = ratio;
    if (cfg.trace_stride > 0 && it % cfg.trace_stride == 0) rep.trace.push_back({it, ratio});
    if (ratio > cfg.check_threshold) {
      rep.solved = true;
      break;
    }

    switch (algorithm) {
      case Algorithm::rrr:
        for (std::size_t i = 0; i < pixels; ++i) rho[i] += cfg.beta * (rho2[i] - rho1[i]);
        break;
      case Algorithm::alternating:
      case Algorithm::charge_flip: {
        double step = 0.0, norm = 0.0;
        for (std::size_t i = 0; i < pixels; ++i) {
          step += (rho2[i] - rho[i]) * (rho2[i] - rho[i]);
          norm += rho[i] * rho[i];
        }
        rho = rho2;
        if (algorithm == Algorithm::alternating && norm > 0.0 && std::sqrt(step / norm) < cfg.stall_tolerance) {
          rep.stalled = true;
        }
        break;
      }
    }
    if (rep.stalled) break;
  }
  if (cfg.trace_stride > 0 && (rep.trace.empty() || rep.trace.back().iteration != rep.iterations))
    rep.trace.push_back({rep.iterations, rep.final_ratio});

  out.final_grid = RealGrid(m, rho2);
  if (rep.solved) {
    engine.forward(rho2, half);
    if (half[0].real() > 0.0) out.solution = PhaseSolution::from_spectrum(expand_half_spectrum(m, half));
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string trace_csv(const SolveReport& r) {
  std::ostringstream os;
  os << std::setprecision(17) << "iteration,power_ratio\n";
  for (const TracePoint& t : r.trace) os << t.iteration << ',' << t.power_ratio << '\n';
  return os.str();
}

std::string reports_json(const std::vector<SolveReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const SolveReport& r : reports) {
    nlohmann::ordered_json j;
    j["algorithm"] = algorithm_name(r.algorithm);
    j["iterations"] = r.iterations;
    j["solved"] = r.solved;
    j["stalled"] = r.stalled;
    j["final_ratio"] = r.final_ratio;
    j["wall_seconds"] = r.wall_seconds;
    j["seed"] = r.seed;
    nlohmann::ordered_json trace = nlohmann::ordered_json::array();
    for (const TracePoint& t : r.trace) trace.push_back({t.iteration, t.power_ratio});
    j["trace"] = trace;
    arr.push_back(j);
  }
  return arr.dump(2);
}

}  // namespace phasebench
