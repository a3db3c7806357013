#include <doctest.h>

#include "phasebench/campaign.hpp"
#include "phasebench/errors.hpp"
#include "phasebench/instance.hpp"
#include "phasebench/solvers.hpp"

using namespace phasebench;

namespace {

const Instance& easy100() {
  static const Instance inst = generate({100, Grade::easy, 1});
  return inst;
}

// The ground-truth density rebuilt on the measured magnitudes: a point every
// map should accept immediately.
RealGrid truth_on_data(const Instance& inst) {
  return PhaseSolution::from_spectrum(forward_transform(inst.truth.density)).synthesize(inst.table.magnitudes());
}

}  // namespace

TEST_CASE("algorithm names") {
  CHECK(parse_algorithm("rrr") == Algorithm::rrr);
  CHECK(parse_algorithm("ap") == Algorithm::alternating);
  CHECK(parse_algorithm("cf") == Algorithm::charge_flip);
  for (Algorithm a : {Algorithm::rrr, Algorithm::alternating, Algorithm::charge_flip})
    CHECK(parse_algorithm(algorithm_name(a)) == a);
  CHECK_THROWS_AS(parse_algorithm("hio"), InvalidArgument);
}

TEST_CASE("config validation") {
  const MagnitudeField data = easy100().table.magnitudes();
  SolverConfig cfg;
  cfg.beta = 2.0;
  CHECK_THROWS_AS(rrr_solve(data, 800, cfg), InvalidArgument);
  cfg = {};
  cfg.check_threshold = 1.0;
  CHECK_THROWS_AS(rrr_solve(data, 800, cfg), InvalidArgument);
  cfg = {};
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(rrr_solve(data, 800, cfg), InvalidArgument);
  CHECK_THROWS_AS(rrr_solve(data, 0, {}), InvalidArgument);
  const RealGrid wrong(64);
  CHECK_THROWS_AS(rrr_solve(data, 800, {}, &wrong), InvalidArgument);
}

TEST_CASE("a solution is a fixed point of every map") {
  const Instance& inst = easy100();
  const RealGrid start = truth_on_data(inst);
  for (Algorithm a : {Algorithm::rrr, Algorithm::alternating, Algorithm::charge_flip}) {
    const SolveOutcome out = solve(a, inst.table.magnitudes(), 800, {}, &start);
    CHECK(out.report.solved);
    CHECK(out.report.iterations == 1);
    CHECK(out.report.final_ratio > 0.95);
  }
}

TEST_CASE("RRR solves a small easy instance and the solution verifies") {
  const Instance& inst = easy100();
  SolverConfig cfg;
  cfg.seed = 4;
  cfg.max_iterations = 20000;
  cfg.trace_stride = 5;
  const SolveOutcome out = rrr_solve(inst.table.magnitudes(), 800, cfg);
  REQUIRE(out.report.solved);
  CHECK(out.report.final_ratio > 0.95);
  CHECK(out.report.trace.back().iteration == out.report.iterations);
  for (std::size_t i = 0; i + 1 < out.report.trace.size(); ++i) CHECK(out.report.trace[i].iteration % 5 == 0);
  REQUIRE(out.solution);
  const VerifyResult v = verify(inst.table, *out.solution, 100);
  CHECK(v.solved);

  const SolveOutcome again = rrr_solve(inst.table.magnitudes(), 800, cfg);
  CHECK(again.report.iterations == out.report.iterations);
  CHECK(again.report.final_ratio == out.report.final_ratio);

  const std::string csv = trace_csv(out.report);
  CHECK(csv.rfind("iteration,power_ratio\n", 0) == 0);
  CHECK(reports_json({out.report}).find("\"solved\": true") != std::string::npos);
}

TEST_CASE("alternating projections stall on an easy instance") {
  const Instance& inst = easy100();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SolverConfig cfg;
    cfg.seed = seed;
    cfg.max_iterations = 5000;
    const SolveReport r = alternating_solve(inst.table.magnitudes(), 800, cfg).report;
    CHECK_FALSE(r.solved);
    CHECK(r.stalled);
    CHECK(r.final_ratio < 0.95);
  }
}

TEST_CASE("iteration limit is a report state") {
  SolverConfig cfg;
  cfg.max_iterations = 3;
  const SolveOutcome out = charge_flip_solve(easy100().table.magnitudes(), 800, cfg);
  CHECK_FALSE(out.report.solved);
  CHECK(out.report.iterations == 3);
  CHECK_FALSE(out.solution);
}

TEST_CASE("zero data surfaces ZeroPower") {
  const MagnitudeField zero(128);
  const RealGrid start(128);
  CHECK_THROWS_AS(charge_flip_solve(zero, 10, {}, &start), ZeroPower);
}

TEST_CASE("random initial grid is seeded") {
  const RealGrid a = random_initial_grid(16, 3), b = random_initial_grid(16, 3), c = random_initial_grid(16, 4);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}
