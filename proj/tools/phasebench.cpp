// phasebench command-line front end.
//
// Exit codes: 0 ok / solved, 2 unsolved, 3 input error, 1 anything else.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phasebench/campaign.hpp"
#include "phasebench/errors.hpp"
#include "phasebench/generic.hpp"
#include "phasebench/hardness.hpp"
#include "phasebench/instance.hpp"
#include "phasebench/projections.hpp"
#include "phasebench/solvers.hpp"

namespace fs = std::filesystem;
using namespace phasebench;

namespace {

constexpr int kExitUnsolved = 2;
constexpr int kExitInput = 3;

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

int n_from(const std::string& data_path, std::optional<int> n) {
  if (n) return *n;
  const std::string manifest = manifest_path_for(data_path);
  if (!fs::exists(manifest)) throw MissingN("N unknown; pass --n or provide " + manifest);
  return parse_manifest_json(read_text(manifest)).n;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::vector<int> n{100};
  std::vector<std::string> grades{"E"};
  std::uint64_t seed = 0;
  double ppa = kDefaultPhotonsPerAtom;
  std::string out = ".";
  bool truth = false;
};

int run_generate(const GenerateArgs& a) {
  fs::create_directories(a.out);
  for (int n : a.n)
    for (const std::string& g : a.grades) {
      InstanceSpec spec{n, parse_grade(g), a.seed, a.ppa, default_filter_b()};
      const Instance inst = generate(spec);
      const std::string base = (fs::path(a.out) / data_file_name(n, spec.grade)).string();
      write_table_file(base, inst.table);
      write_text(manifest_path_for(base), manifest_json(inst));
      write_text(base + ".atoms.json", atoms_json(inst.truth.atoms));
      if (a.truth)
        write_solution_file(base + ".truth", PhaseSolution::from_spectrum(forward_transform(inst.truth.density)));
      std::cout << base << " i2=" << inst.truth.achieved_i2 << " photons=" << inst.table.field_total() << '\n';
    }
  return 0;
}

// ------------------------------------------------------------------- solve

struct SolveArgs {
  std::string data;
  std::optional<int> n;
  std::string solver = "rrr";
  SolverConfig cfg;
  std::string solution_out;
  std::string trace_out;
  std::string report_out;
};

int run_solve(SolveArgs a) {
  const PhotonHalfTable table = read_table_file(a.data);
  const int n = n_from(a.data, a.n);
  if (a.trace_out.empty()) a.cfg.trace_stride = 0;
  else if (a.cfg.trace_stride == 0) a.cfg.trace_stride = 1;
  const SolveOutcome out = solve(parse_algorithm(a.solver), table.magnitudes(), 8 * static_cast<std::size_t>(n), a.cfg);
  const SolveReport& r = out.report;
  if (!a.trace_out.empty()) write_text(a.trace_out, trace_csv(r));
  if (!a.report_out.empty()) write_text(a.report_out, reports_json({r}));
  if (!a.solution_out.empty() && out.solution) write_solution_file(a.solution_out, *out.solution);
  std::cout << algorithm_name(r.algorithm) << " iterations=" << r.iterations << " ratio=" << num(r.final_ratio)
            << " solved=" << (r.solved ? "yes" : "no") << (r.stalled ? " (stalled)" : "")
            << " seconds=" << r.wall_seconds << '\n';
  if (r.solved && !out.solution)
    std::cerr << "note: certificate met by the negated density; no solution file written\n";
  return r.solved ? 0 : kExitUnsolved;
}

// ------------------------------------------------------------------ verify

int run_verify(const std::string& data, const std::string& solution, std::optional<int> n, double threshold) {
  const PhotonHalfTable table = read_table_file(data);
  const VerifyResult v = verify(table, read_solution_file(solution, kCoarseGrid), n_from(data, n), threshold);
  std::cout << "{\"N\": " << v.n << ", \"ratio\": " << num(v.ratio) << ", \"solved\": " << (v.solved ? "true" : "false")
            << "}\n";
  return v.solved ? 0 : kExitUnsolved;
}

// ---------------------------------------------------------------- campaign

struct CampaignArgs {
  std::string config;
  std::string preset;
  std::vector<int> n;
  std::vector<std::string> grades;
  std::optional<int> trials;
  std::optional<std::string> solver;
  std::optional<std::string> policy;
  std::optional<long> max_iter;
  std::optional<double> ppa;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
};

int run_campaign_cmd(const CampaignArgs& a) {
  CampaignSpec spec;
  if (!a.config.empty()) spec = parse_campaign_json(read_text(a.config));
  else if (!a.preset.empty()) spec = preset(a.preset);
  if (!a.n.empty()) {
    spec.cells.clear();
    const std::vector<std::string> grades = a.grades.empty() ? std::vector<std::string>{"E", "M", "H"} : a.grades;
    for (int n : a.n)
      for (const std::string& g : grades) spec.cells.push_back({n, parse_grade(g)});
  }
  if (a.config.empty()) spec.base_seed = a.seed;
  if (a.trials) spec.trials = *a.trials;
  if (a.solver) spec.solver = parse_algorithm(*a.solver);
  if (a.policy) spec.policy = parse_policy(*a.policy);
  if (a.max_iter) spec.config.max_iterations = *a.max_iter;
  if (a.ppa) spec.photons_per_atom = *a.ppa;
  spec.jobs = a.jobs;
  validate(spec);

  const CampaignResult r = run_campaign(spec);
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_text((fs::path(a.out) / "cells.csv").string(), cells_csv(r));
    write_text((fs::path(a.out) / "trials.csv").string(), trials_csv(r));
    write_text((fs::path(a.out) / "fits.csv").string(), fits_csv(r));
    write_text((fs::path(a.out) / "campaign.json").string(), campaign_json(r));
  }
  std::cout << cells_csv(r) << '\n' << fits_csv(r);
  return 0;
}

// ------------------------------------------------------------------ render

int run_render(const std::string& data, const std::string& solution, const std::string& out, std::size_t factor) {
  const PhotonHalfTable table = read_table_file(data);
  if (solution.empty()) {
    if (factor != 1) throw InvalidArgument("--upsample applies to densities; pass --solution");
    write_pgm(out, to_gray(table));
  } else {
    const RealGrid rho = read_solution_file(solution, kCoarseGrid).synthesize(table.magnitudes());
    write_pgm(out, to_gray(factor > 1 ? upsample(rho, factor) : rho));
  }
  return 0;
}

// -------------------------------------------------------------- appendices

int run_appendix_gaussian(std::size_t n, const std::vector<double>& ratios, int trials, std::uint64_t seed,
                          const GenericConfig& cfg, int jobs) {
  std::cout << "ratio,success_rate,time_per_success\n";
  for (double ratio : ratios) {
    const GaussianCell c = gaussian_campaign_cell(n, ratio, trials, seed, cfg, 1e-7, jobs);
    std::cout << num(ratio) << ',' << num(c.success_rate()) << ',' << num(c.time_per_success()) << '\n';
  }
  return 0;
}

int run_appendix_cdp(const std::string& image_path, std::size_t masks, const GenericConfig& cfg,
                     const std::string& trace_out, const std::string& image_out) {
  const Eigen::MatrixXd image = image_path.empty() ? synthetic_image() : read_pgm(image_path);
  const CdpExperiment e = cdp_experiment(image, masks, cfg);
  std::ostringstream csv;
  csv << "iteration,error\n";
  for (std::size_t i = 0; i < e.result.error_trace.size(); ++i) csv << i + 1 << ',' << num(e.result.error_trace[i]) << '\n';
  if (trace_out.empty()) std::cout << csv.str();
  else write_text(trace_out, csv.str());
  if (!image_out.empty()) write_pgm(image_out, e.reconstruction);
  std::cerr << "iterations=" << e.result.iterations << " error=" << num(e.result.error.value_or(NAN)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crystallographic phase-retrieval benchmark workbench"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "RNG seed")->envname("PHASEBENCH_SEED");
  };

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate benchmark instances");
  g->add_option("--n", gen.n, "Atom counts")->delimiter(',');
  g->add_option("--grade", gen.grades, "Grades E, M, H")->delimiter(',');
  g->add_option("--photons-per-atom", gen.ppa);
  g->add_option("--out", gen.out, "Output directory");
  g->add_flag("--truth", gen.truth, "Also write the ground-truth solution (<data>.truth)");
  add_seed(g);

  SolveArgs sol;
  long max_iter = 0;
  auto* s = app.add_subcommand("solve", "Run a solver on a data file");
  s->add_option("data", sol.data)->required();
  s->add_option("--n", sol.n, "Atom count (default: from the manifest)");
  s->add_option("--solver", sol.solver, "rrr, alternating or charge-flip");
  s->add_option("--beta", sol.cfg.beta);
  s->add_option("--max-iter", max_iter);
  s->add_option("--threshold", sol.cfg.check_threshold);
  s->add_option("--solution", sol.solution_out, "Write the solution file here on success");
  s->add_option("--trace", sol.trace_out, "Write the power-ratio trace CSV here");
  s->add_option("--trace-stride", sol.cfg.trace_stride);
  s->add_option("--report", sol.report_out, "Write the JSON report here");
  add_seed(s);

  std::string v_data, v_solution;
  std::optional<int> v_n;
  double v_threshold = 0.95;
  auto* v = app.add_subcommand("verify", "Check a solution against a data file");
  v->add_option("data", v_data)->required();
  v->add_option("solution", v_solution)->required();
  v->add_option("--n", v_n);
  v->add_option("--threshold", v_threshold);

  CampaignArgs camp;
  auto* c = app.add_subcommand("campaign", "Run a solver campaign over (N, grade) cells");
  c->add_option("--config", camp.config, "JSON campaign spec");
  c->add_option("--preset", camp.preset, "table1-small");
  c->add_option("--n", camp.n)->delimiter(',');
  c->add_option("--grades", camp.grades)->delimiter(',');
  c->add_option("--trials", camp.trials);
  c->add_option("--solver", camp.solver);
  c->add_option("--policy", camp.policy, "fresh or fixed");
  c->add_option("--max-iter", camp.max_iter);
  c->add_option("--photons-per-atom", camp.ppa);
  c->add_option("--jobs", camp.jobs);
  c->add_option("--out", camp.out, "Directory for cells.csv, trials.csv, fits.csv, campaign.json");
  add_seed(c);

  int mu_n = 100;
  double mu_b = default_filter_b();
  std::size_t mu_m = kCoarseGrid;
  int mu_z = 1;
  auto* m = app.add_subcommand("mu", "Print the hardness report");
  m->add_option("--n", mu_n)->required();
  m->add_option("--b", mu_b, "Filter constant");
  m->add_option("--m", mu_m, "Grid size");
  m->add_option("--z", mu_z, "Point-group order");

  std::string r_data, r_solution, r_out;
  std::size_t r_factor = 1;
  auto* r = app.add_subcommand("render", "Render a data table or a solved density as PGM");
  r->add_option("data", r_data)->required();
  r->add_option("--solution", r_solution, "Render the density synthesized from this solution");
  r->add_option("--out", r_out)->required();
  r->add_option("--upsample", r_factor, "Fourier zero-padding factor");

  std::size_t ag_n = 50;
  std::vector<double> ag_ratios{2, 3, 4, 5};
  int ag_trials = 100, ag_jobs = 1;
  GenericConfig ag_cfg;
  auto* ag = app.add_subcommand("appendix-gaussian", "Gaussian sensing success rates");
  ag->add_option("--n", ag_n);
  ag->add_option("--ratios", ag_ratios)->delimiter(',');
  ag->add_option("--trials", ag_trials);
  ag->add_option("--max-iter", ag_cfg.max_iterations);
  ag->add_option("--jobs", ag_jobs);
  add_seed(ag);

  std::string cdp_image, cdp_trace, cdp_out;
  std::size_t cdp_masks = 3;
  GenericConfig cdp_cfg;
  cdp_cfg.max_iterations = 500;
  auto* cd = app.add_subcommand("appendix-cdp", "Coded-diffraction image reconstruction");
  cd->add_option("--image", cdp_image, "PGM image (default: built-in 64x64 test image)");
  cd->add_option("--masks", cdp_masks);
  cd->add_option("--iterations", cdp_cfg.max_iterations);
  cd->add_option("--beta", cdp_cfg.beta);
  cd->add_option("--trace", cdp_trace, "Error trace CSV (default: stdout)");
  cd->add_option("--out", cdp_out, "Reconstructed image PGM");
  add_seed(cd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*g) {
      gen.seed = seed;
      return run_generate(gen);
    }
    if (*s) {
      sol.cfg.seed = seed;
      if (max_iter > 0) sol.cfg.max_iterations = max_iter;
      return run_solve(sol);
    }
    if (*v) return run_verify(v_data, v_solution, v_n, v_threshold);
    if (*c) {
      camp.seed = seed;
      return run_campaign_cmd(camp);
    }
    if (*m) {
      std::cout << to_json(hardness_report(mu_n, mu_b, mu_m, mu_z)) << '\n';
      return 0;
    }
    if (*r) return run_render(r_data, r_solution, r_out, r_factor);
    if (*ag) {
      ag_cfg.seed = seed;
      return run_appendix_gaussian(ag_n, ag_ratios, ag_trials, seed, ag_cfg, ag_jobs);
    }
    if (*cd) {
      cdp_cfg.seed = seed;
      return run_appendix_cdp(cdp_image, cdp_masks, cdp_cfg, cdp_trace, cdp_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
