#pragma once

// Solver campaigns over (N, grade) cells, solution verification, and PGM
// rendering.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "phasebench/grid.hpp"
#include "phasebench/instance.hpp"
#include "phasebench/projections.hpp"
#include "phasebench/solvers.hpp"

namespace phasebench {

// fresh: every trial gets a new instance and a new solver seed.
// fixed: one instance per cell, solver seed varies per trial.
enum class SeedPolicy { fresh, fixed };

std::string policy_name(SeedPolicy p);
SeedPolicy parse_policy(const std::string& s);

struct CampaignCell {
  int n = 100;
  Grade grade = Grade::easy;
};

struct CampaignSpec {
  std::vector<CampaignCell> cells;
  int trials = 20;
  Algorithm solver = Algorithm::rrr;
  SolverConfig config;
  SeedPolicy policy = SeedPolicy::fresh;
  std::uint64_t base_seed = 0;
  double photons_per_atom = kDefaultPhotonsPerAtom;
  double filter_b = default_filter_b();
  int jobs = 1;
};

void validate(const CampaignSpec& spec);

// Named presets; "table1-small" is every reference cell with N <= 200.
CampaignSpec preset(const std::string& name);

std::string campaign_spec_json(const CampaignSpec& spec);
// Keys mirror CampaignSpec; missing keys keep their defaults.
CampaignSpec parse_campaign_json(const std::string& text);

struct TrialRecord {
  std::size_t cell = 0;
  int trial = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t solver_seed = 0;
  SolveReport report;
  std::string error;  // non-empty when the trial threw
};

struct CellStats {
  CampaignCell cell;
  double mu = 0.0;        // N^2 / V for the campaign filter
  double mu_paper = 0.0;  // (N / 64.17)^2
  int trials = 0;         // completed trials (errors excluded)
  int errors = 0;
  int successes = 0;
  long total_iterations = 0;
  double mean_iterations = 0.0;  // arithmetic mean of raw counts
  double log10_mean = 0.0;
  double success_rate = 0.0;
  double total_wall_seconds = 0.0;
  double time_per_solution = 0.0;        // total wall / successes (inf if none)
  double iterations_per_solution = 0.0;  // total iterations / successes (inf if none)
};

// log10(mean iterations) = intercept + slope * mu_paper, per grade.
struct GrowthFit {
  Grade grade = Grade::easy;
  int points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double growth_factor = 0.0;  // 10^slope: growth of the mean per unit mu
};

struct CampaignResult {
  CampaignSpec spec;
  std::vector<TrialRecord> trials;  // sorted by (cell, trial)
  std::vector<CellStats> cells;
  std::vector<GrowthFit> fits;      // grades with at least two cells
};

CampaignResult run_campaign(const CampaignSpec& spec);

// Recomputes cell statistics and fits from trial records.
std::vector<CellStats> aggregate(const CampaignSpec& spec, const std::vector<TrialRecord>& trials);
std::vector<GrowthFit> fit_growth(const std::vector<CellStats>& cells);

std::string cells_csv(const CampaignResult& r);
std::string trials_csv(const CampaignResult& r);
std::string fits_csv(const CampaignResult& r);
std::string campaign_json(const CampaignResult& r);

// ----------------------------------------------------------------- verify

struct VerifyResult {
  int n = 0;
  double ratio = 0.0;
  bool solved = false;
};

VerifyResult verify(const PhotonHalfTable& table, const PhaseSolution& solution, int n, double threshold = 0.95);
// N comes from `n`, else from `<data_path>.manifest.json`; MissingN otherwise.
VerifyResult verify_files(const std::string& data_path, const std::string& solution_path, std::optional<int> n);

std::string manifest_path_for(const std::string& data_path);

// ----------------------------------------------------------------- render

struct GrayImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

// Linear min-max scaling to 0..255; a constant input maps to all black.
GrayImage to_gray(std::span<const double> values, std::size_t rows, std::size_t cols);
GrayImage to_gray(const RealGrid& g);
// sqrt of the counts, 128 rows x 64 columns.
GrayImage to_gray(const PhotonHalfTable& t);

void write_pgm(const std::string& path, const GrayImage& img);
// Binary (P5) or ASCII (P2) PGM with maxval <= 65535; values scaled to [0, 1].
Eigen::MatrixXd read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Eigen::MatrixXd& values);

// Fourier zero-padding onto a factor-times finer grid with the unitary
// normalization, so total power is unchanged when the Nyquist lines are zero.
// Nyquist coefficients are split evenly between +M/2 and -M/2.
RealGrid upsample(const RealGrid& g, std::size_t factor);

}  // namespace phasebench
