#include "phasebench/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "phasebench/errors.hpp"
#include "phasebench/hardness.hpp"
#include "phasebench/random.hpp"

namespace phasebench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::uint64_t instance_seed(const CampaignSpec& spec, const CampaignCell& c, int trial) {
  const std::uint64_t t = spec.policy == SeedPolicy::fixed ? 0 : static_cast<std::uint64_t>(trial);
  return derive_key(spec.base_seed, Stream::campaign,
                    {static_cast<std::uint64_t>(c.n), static_cast<std::uint64_t>(c.grade), t, 0});
}

std::uint64_t solver_seed(const CampaignSpec& spec, const CampaignCell& c, int trial) {
  return derive_key(spec.base_seed, Stream::campaign,
                    {static_cast<std::uint64_t>(c.n), static_cast<std::uint64_t>(c.grade),
                     static_cast<std::uint64_t>(trial), 1});
}

}  // namespace

std::string policy_name(SeedPolicy p) { return p == SeedPolicy::fresh ? "fresh" : "fixed"; }

SeedPolicy parse_policy(const std::string& s) {
  if (s == "fresh") return SeedPolicy::fresh;
  if (s == "fixed") return SeedPolicy::fixed;
  throw InvalidArgument("seed policy must be 'fresh' or 'fixed', got '" + s + "'");
}

void validate(const CampaignSpec& spec) {
  if (spec.cells.empty()) throw InvalidArgument("campaign: no cells");
  if (spec.trials < 1) throw InvalidArgument("campaign: trials must be >= 1");
  for (const CampaignCell& c : spec.cells)
    if (c.n < 1 || c.n > kMaxAtoms) throw InvalidArgument("campaign: N out of range in cell");
  if (!(spec.photons_per_atom > 0.0) || !(spec.filter_b > 0.0))
    throw InvalidArgument("campaign: photons_per_atom and filter_b must be positive");
  validate(spec.config);
}

CampaignSpec preset(const std::string& name) {
  if (name != "table1-small") throw InvalidArgument("unknown preset '" + name + "' (table1-small)");
  CampaignSpec s;
  for (int n : {100, 140, 175, 200})
    for (Grade g : {Grade::easy, Grade::medium, Grade::hard}) s.cells.push_back({n, g});
  return s;
}

std::string campaign_spec_json(const CampaignSpec& spec) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const CampaignCell& c : spec.cells) cells.push_back({{"N", c.n}, {"grade", std::string(1, grade_letter(c.grade))}});
  j["cells"] = cells;
  j["trials"] = spec.trials;
  j["solver"] = algorithm_name(spec.solver);
  j["config"] = {{"beta", spec.config.beta},
                 {"max_iterations", spec.config.max_iterations},
                 {"check_threshold", spec.config.check_threshold},
                 {"trace_stride", spec.config.trace_stride}};
  j["policy"] = policy_name(spec.policy);
  j["base_seed"] = spec.base_seed;
  j["photons_per_atom"] = spec.photons_per_atom;
  j["filter_b"] = spec.filter_b;
  j["jobs"] = spec.jobs;
  return j.dump(2);
}

CampaignSpec parse_campaign_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    CampaignSpec s;
    if (j.contains("preset")) s = preset(j.at("preset").get<std::string>());
    if (j.contains("cells")) {
      s.cells.clear();
      for (const auto& c : j.at("cells")) s.cells.push_back({c.at("N").get<int>(), parse_grade(c.at("grade").get<std::string>())});
    }
    s.trials = j.value("trials", s.trials);
    if (j.contains("solver")) s.solver = parse_algorithm(j.at("solver").get<std::string>());
    if (j.contains("config")) {
      const auto& c = j.at("config");
      s.config.beta = c.value("beta", s.config.beta);
      s.config.max_iterations = c.value("max_iterations", s.config.max_iterations);
      s.config.check_threshold = c.value("check_threshold", s.config.check_threshold);
      s.config.trace_stride = c.value("trace_stride", s.config.trace_stride);
    }
    if (j.contains("policy")) s.policy = parse_policy(j.at("policy").get<std::string>());
    s.base_seed = j.value("base_seed", s.base_seed);
    s.photons_per_atom = j.value("photons_per_atom", s.photons_per_atom);
    s.filter_b = j.value("filter_b", s.filter_b);
    s.jobs = j.value("jobs", s.jobs);
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("campaign config: ") + e.what());
  }
}

// ----------------------------------------------------------------- campaign

CampaignResult run_campaign(const CampaignSpec& spec) {
  validate(spec);
  const std::size_t total = spec.cells.size() * static_cast<std::size_t>(spec.trials);
  std::vector<TrialRecord> records(total);

  // Under the fixed policy each cell's instance is generated once, on demand.
  std::mutex cache_mu;
  std::map<std::size_t, std::shared_ptr<const Instance>> cache;
  auto instance_for = [&](std::size_t cell, std::uint64_t seed) -> std::shared_ptr<const Instance> {
    InstanceSpec is{spec.cells[cell].n, spec.cells[cell].grade, seed, spec.photons_per_atom, spec.filter_b};
    if (spec.policy == SeedPolicy::fresh) return std::make_shared<const Instance>(generate(is));
    {
      std::lock_guard lock(cache_mu);
      if (auto it = cache.find(cell); it != cache.end()) return it->second;
    }
    auto inst = std::make_shared<const Instance>(generate(is));
    std::lock_guard lock(cache_mu);
    return cache.emplace(cell, inst).first->second;
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      TrialRecord& rec = records[k];
      rec.cell = k / static_cast<std::size_t>(spec.trials);
      rec.trial = static_cast<int>(k % static_cast<std::size_t>(spec.trials));
      const CampaignCell& c = spec.cells[rec.cell];
      rec.instance_seed = instance_seed(spec, c, rec.trial);
      rec.solver_seed = solver_seed(spec, c, rec.trial);
      try {
        const auto inst = instance_for(rec.cell, rec.instance_seed);
        SolverConfig cfg = spec.config;
        cfg.seed = rec.solver_seed;
        rec.report = solve(spec.solver, inst->table.magnitudes(), 8 * static_cast<std::size_t>(c.n), cfg).report;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::max(1, spec.jobs); ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  CampaignResult r;
  r.spec = spec;
  r.trials = std::move(records);
  r.cells = aggregate(spec, r.trials);
  r.fits = fit_growth(r.cells);
  return r;
}

std::vector<CellStats> aggregate(const CampaignSpec& spec, const std::vector<TrialRecord>& trials) {
  std::vector<CellStats> cells(spec.cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CellStats& s = cells[i];
    s.cell = spec.cells[i];
    s.mu = mu(s.cell.n, effective_volume(spec.filter_b, kCoarseGrid));
    s.mu_paper = mu_paper_formula(s.cell.n);
  }
  for (const TrialRecord& t : trials) {
    CellStats& s = cells.at(t.cell);
    if (!t.error.empty()) {
      ++s.errors;
      continue;
    }
    ++s.trials;
    s.successes += t.report.solved;
    s.total_iterations += t.report.iterations;
    s.total_wall_seconds += t.report.wall_seconds;
  }
  for (CellStats& s : cells) {
    if (s.trials > 0) {
      s.mean_iterations = static_cast<double>(s.total_iterations) / s.trials;
      s.log10_mean = std::log10(s.mean_iterations);
      s.success_rate = static_cast<double>(s.successes) / s.trials;
    }
    s.time_per_solution = s.successes ? s.total_wall_seconds / s.successes : kInf;
    s.iterations_per_solution = s.successes ? static_cast<double>(s.total_iterations) / s.successes : kInf;
  }
  return cells;
}

std::vector<GrowthFit> fit_growth(const std::vector<CellStats>& cells) {
  std::vector<GrowthFit> fits;
  for (Grade g : {Grade::easy, Grade::medium, Grade::hard}) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const CellStats& c : cells) {
      if (c.cell.grade != g || c.trials == 0 || !(c.mean_iterations > 0.0)) continue;
      sx += c.mu_paper;
      sy += c.log10_mean;
      sxx += c.mu_paper * c.mu_paper;
      sxy += c.mu_paper * c.log10_mean;
      ++k;
    }
    const double denom = k * sxx - sx * sx;
    if (k < 2 || !(std::abs(denom) > 0.0)) continue;
    GrowthFit f;
    f.grade = g;
    f.points = k;
    f.slope = (k * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / k;
    f.growth_factor = std::pow(10.0, f.slope);
    fits.push_back(f);
  }
  return fits;
}

std::string cells_csv(const CampaignResult& r) {
  std::ostringstream os;
  os << "N,grade,mu,mu_paper,trials,errors,successes,success_rate,mean_iterations,log10_mean_iterations,"
        "total_iterations,iterations_per_solution,total_wall_seconds,time_per_solution,policy\n";
  for (const CellStats& c : r.cells)
    os << c.cell.n << ',' << grade_letter(c.cell.grade) << ',' << fmt(c.mu) << ',' << fmt(c.mu_paper) << ','
       << c.trials << ',' << c.errors << ',' << c.successes << ',' << fmt(c.success_rate) << ','
       << fmt(c.mean_iterations) << ',' << fmt(c.log10_mean) << ',' << c.total_iterations << ','
       << fmt(c.iterations_per_solution) << ',' << fmt(c.total_wall_seconds) << ',' << fmt(c.time_per_solution) << ','
       << policy_name(r.spec.policy) << '\n';
  return os.str();
}

std::string trials_csv(const CampaignResult& r) {
  std::ostringstream os;
  os << "N,grade,trial,instance_seed,solver_seed,iterations,solved,final_ratio,wall_seconds,error\n";
  for (const TrialRecord& t : r.trials) {
    const CampaignCell& c = r.spec.cells[t.cell];
    std::string err = t.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << c.n << ',' << grade_letter(c.grade) << ',' << t.trial << ',' << t.instance_seed << ',' << t.solver_seed << ','
       << t.report.iterations << ',' << (t.report.solved ? 1 : 0) << ',' << fmt(t.report.final_ratio) << ','
       << fmt(t.report.wall_seconds) << ',' << err << '\n';
  }
  return os.str();
}

std::string fits_csv(const CampaignResult& r) {
  std::ostringstream os;
  os << "grade,points,slope,intercept,growth_factor\n";
  for (const GrowthFit& f : r.fits)
    os << grade_letter(f.grade) << ',' << f.points << ',' << fmt(f.slope) << ',' << fmt(f.intercept) << ','
       << fmt(f.growth_factor) << '\n';
  return os.str();
}

std::string campaign_json(const CampaignResult& r) {
  nlohmann::ordered_json j;
  j["spec"] = nlohmann::ordered_json::parse(campaign_spec_json(r.spec));
  j["mean_statistic"] = "arithmetic mean of raw iteration counts";
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const CellStats& c : r.cells) {
    nlohmann::ordered_json e;
    e["N"] = c.cell.n;
    e["grade"] = std::string(1, grade_letter(c.cell.grade));
    e["mu"] = c.mu;
    e["mu_paper"] = c.mu_paper;
    e["trials"] = c.trials;
    e["errors"] = c.errors;
    e["successes"] = c.successes;
    e["success_rate"] = c.success_rate;
    e["mean_iterations"] = c.mean_iterations;
    e["log10_mean_iterations"] = c.log10_mean;
    e["total_iterations"] = c.total_iterations;
    e["iterations_per_solution"] = c.successes ? nlohmann::ordered_json(c.iterations_per_solution) : nullptr;
    e["total_wall_seconds"] = c.total_wall_seconds;
    e["time_per_solution"] = c.successes ? nlohmann::ordered_json(c.time_per_solution) : nullptr;
    cells.push_back(e);
  }
  j["cells"] = cells;
  nlohmann::ordered_json fits = nlohmann::ordered_json::array();
  for (const GrowthFit& f : r.fits)
    fits.push_back({{"grade", std::string(1, grade_letter(f.grade))},
                    {"points", f.points},
                    {"slope", f.slope},
                    {"intercept", f.intercept},
                    {"growth_factor", f.growth_factor}});
  j["fits"] = fits;
  return j.dump(2);
}

// ------------------------------------------------------------------- verify

VerifyResult verify(const PhotonHalfTable& table, const PhaseSolution& solution, int n, double threshold) {
  if (n < 1) throw InvalidArgument("verify: N must be positive");
  if (solution.size() != kCoarseGrid) throw InvalidArgument("verify: solution must be 128x128");
  const RealGrid rho = solution.synthesize(table.magnitudes());
  const std::size_t k = std::min<std::size_t>(8 * static_cast<std::size_t>(n), rho.pixel_count());
  VerifyResult v;
  v.n = n;
  v.ratio = power_ratio(rho, support_projection(rho, k).support);
  v.solved = v.ratio > threshold;
  return v;
}

std::string manifest_path_for(const std::string& data_path) { return data_path + ".manifest.json"; }

VerifyResult verify_files(const std::string& data_path, const std::string& solution_path, std::optional<int> n) {
  const PhotonHalfTable table = read_table_file(data_path);
  if (!n) {
    const std::string manifest = manifest_path_for(data_path);
    if (!std::filesystem::exists(manifest))
      throw MissingN("verify: N unknown; pass --n or provide " + manifest);
    n = parse_manifest_json(read_text(manifest)).n;
  }
  return verify(table, read_solution_file(solution_path, kCoarseGrid), *n);
}

// ------------------------------------------------------------------- render

GrayImage to_gray(std::span<const double> values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) throw InvalidArgument("to_gray: value count does not match shape");
  GrayImage img{rows, cols, std::vector<std::uint8_t>(rows * cols, 0)};
  if (values.empty()) return img;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return img;
  for (std::size_t i = 0; i < values.size(); ++i)
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (values[i] - *lo) / range));
  return img;
}

GrayImage to_gray(const RealGrid& g) { return to_gray(g.values(), g.size(), g.size()); }

GrayImage to_gray(const PhotonHalfTable& t) {
  std::vector<double> v(t.counts().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sqrt(static_cast<double>(t.counts()[i]));
  return to_gray(v, kTableRows, kTableColumns);
}

void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << "P5\n" << img.cols << ' ' << img.rows << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!f) throw IoError("write failed: " + path);
}

void write_pgm(const std::string& path, const Eigen::MatrixXd& values) {
  std::vector<double> v(static_cast<std::size_t>(values.size()));
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index c = 0; c < values.cols(); ++c) v[static_cast<std::size_t>(r * values.cols() + c)] = values(r, c);
  write_pgm(path, to_gray(v, static_cast<std::size_t>(values.rows()), static_cast<std::size_t>(values.cols())));
}

Eigen::MatrixXd read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  auto token = [&] {
    std::string t;
    while (f >> t) {
      if (t[0] != '#') return t;
      std::string rest;
      std::getline(f, rest);
    }
    throw ParseError(path + ": truncated PGM header");
  };
  const std::string magic = token();
  if (magic != "P5" && magic != "P2") throw ParseError(path + ": not a PGM file");
  long cols = 0, rows = 0, maxval = 0;
  try {
    cols = std::stol(token());
    rows = std::stol(token());
    maxval = std::stol(token());
  } catch (const std::logic_error&) {
    throw ParseError(path + ": bad PGM header");
  }
  if (cols <= 0 || rows <= 0 || maxval <= 0 || maxval > 65535) throw ParseError(path + ": bad PGM header");
  Eigen::MatrixXd img(rows, cols);
  if (magic == "P2") {
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) {
        long v = 0;
        if (!(f >> v)) throw ParseError(path + ": truncated PGM data");
        img(r, c) = static_cast<double>(v) / maxval;
      }
    return img;
  }
  f.get();  // single whitespace after maxval
  const int bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(static_cast<std::size_t>(rows * cols * bytes));
  if (!f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
    throw ParseError(path + ": truncated PGM data");
  for (long i = 0; i < rows * cols; ++i) {
    const double v = bytes == 1 ? raw[static_cast<std::size_t>(i)]
                                : raw[static_cast<std::size_t>(2 * i)] * 256.0 + raw[static_cast<std::size_t>(2 * i + 1)];
    img(i / cols, i % cols) = v / maxval;
  }
  return img;
}

RealGrid upsample(const RealGrid& g, std::size_t factor) {
  if (factor < 1) throw InvalidArgument("upsample: factor must be >= 1");
  const std::size_t m = g.size(), big = m * factor;
  require_supported_size(big);
  const ComplexSpectrum s = forward_transform(g);
  ComplexSpectrum padded(big, true);
  auto target = [&](long f) { return static_cast<std::size_t>((f % static_cast<long>(big) + static_cast<long>(big)) % static_cast<long>(big)); };
  const long half = static_cast<long>(m / 2);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) {
      const long ps = signed_frequency(p, m), qs = signed_frequency(q, m);
      const cdouble c = s(p, q);
      // A Nyquist coefficient is shared between +M/2 and -M/2 on the finer grid.
      const bool np = factor > 1 && ps == -half, nq = factor > 1 && qs == -half;
      const double w = (np ? 0.5 : 1.0) * (nq ? 0.5 : 1.0);
      for (long sp : np ? std::vector<long>{-half, half} : std::vector<long>{ps})
        for (long sq : nq ? std::vector<long>{-half, half} : std::vector<long>{qs}) padded(target(sp), target(sq)) += w * c;
    }
  return inverse_transform(padded);
}

}  // namespace phasebench
