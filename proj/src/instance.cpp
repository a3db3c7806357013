#include "phasebench/instance.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "phasebench/errors.hpp"
#include "phasebench/hardness.hpp"
#include "phasebench/projections.hpp"
#include "phasebench/random.hpp"

namespace phasebench {

namespace {

constexpr int kFineMask = kFineGrid - 1;
constexpr long kCoarse = static_cast<long>(kCoarseGrid);
constexpr long kNyquist = kCoarse / 2;

// exp(-2 pi i k / 512), built so that entry 512-k is exactly conj(entry k);
// structure factors are then exactly Hermitian.
const std::array<cdouble, kFineGrid>& fine_roots() {
  static const std::array<cdouble, kFineGrid> roots = [] {
    std::array<cdouble, kFineGrid> r{};
    for (int k = 0; k <= kFineGrid / 2; ++k)
      r[k] = std::polar(1.0, -2.0 * std::numbers::pi * k / kFineGrid);
    for (int k = kFineGrid / 2 + 1; k < kFineGrid; ++k) r[k] = std::conj(r[kFineGrid - k]);
    return r;
  }();
  return roots;
}

bool is_nyquist(long ps, long qs) { return ps == -kNyquist || qs == -kNyquist; }

// Structure factors over the half plane q = 0..63 (all rows), plus the
// per-entry weights that turn half-plane sums into full-plane averages.
class HalfPlaneTuner {
 public:
  HalfPlaneTuner(const AtomSet& atoms, double filter_b) {
    const std::size_t cells = kCoarseGrid * kTableColumns;
    factors_.assign(cells, cdouble{});
    scratch_.assign(cells, cdouble{});
    g1_.assign(cells, 0.0);
    g2_.assign(cells, 0.0);
    count_ = 0.0;
    for (std::size_t p = 0; p < kCoarseGrid; ++p) {
      const long ps = signed_frequency(p, kCoarseGrid);
      for (std::size_t q = 0; q < kTableColumns; ++q) {
        const std::size_t i = p * kTableColumns + q;
        if (ps == -kNyquist || (p == 0 && q == 0)) continue;
        const double w = q == 0 ? 1.0 : 2.0;
        const double f = gaussian_filter(ps, static_cast<long>(q), filter_b);
        g1_[i] = w * f;
        g2_[i] = w * f * f;
        count_ += w;
      }
    }
    const auto& roots = fine_roots();
    for (const Atom& a : atoms.atoms())
      for (std::size_t p = 0; p < kCoarseGrid; ++p) {
        const long ps = signed_frequency(p, kCoarseGrid);
        for (std::size_t q = 0; q < kTableColumns; ++q)
          factors_[p * kTableColumns + q] += static_cast<double>(a.weight) * roots[(ps * a.x + static_cast<long>(q) * a.y) & kFineMask];
      }
    recompute_sums();
  }

  double i2() const { return s2_ * count_ / (s1_ * s1_); }

  // i2 after moving an atom of `weight` from (x0,y0) to (x1,y1); the moved
  // factors are kept in scratch until commit().
  double propose(int weight, int x0, int y0, int x1, int y1) {
    const auto& roots = fine_roots();
    const double w = static_cast<double>(weight);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t p = 0; p < kCoarseGrid; ++p) {
      const long ps = signed_frequency(p, kCoarseGrid);
      const std::size_t row = p * kTableColumns;
      for (std::size_t q = 0; q < kTableColumns; ++q) {
        const long qs = static_cast<long>(q);
        const cdouble f = factors_[row + q] + w * (roots[(ps * x1 + qs * y1) & kFineMask] - roots[(ps * x0 + qs * y0) & kFineMask]);
        scratch_[row + q] = f;
        const double intensity = std::norm(f);
        s1 += g1_[row + q] * intensity;
        s2 += g2_[row + q] * intensity * intensity;
      }
    }
    pending_s1_ = s1;
    pending_s2_ = s2;
    return s2 * count_ / (s1 * s1);
  }

  void commit() {
    factors_.swap(scratch_);
    s1_ = pending_s1_;
    s2_ = pending_s2_;
  }

 private:
  void recompute_sums() {
    s1_ = s2_ = 0.0;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      const double intensity = std::norm(factors_[i]);
      s1_ += g1_[i] * intensity;
      s2_ += g2_[i] * intensity * intensity;
    }
  }

  std::vector<cdouble> factors_, scratch_;
  std::vector<double> g1_, g2_;
  double count_ = 0.0, s1_ = 0.0, s2_ = 0.0, pending_s1_ = 0.0, pending_s2_ = 0.0;
};

}  // namespace

double default_filter_b() { return std::log(25.0) / (64.0 * 64.0); }

char grade_letter(Grade g) {
  switch (g) {
    case Grade::easy: return 'E';
    case Grade::medium: return 'M';
    case Grade::hard: return 'H';
  }
  return '?';
}

Grade parse_grade(const std::string& s) {
  if (s.size() == 1) {
    switch (std::toupper(static_cast<unsigned char>(s[0]))) {
      case 'E': return Grade::easy;
      case 'M': return Grade::medium;
      case 'H': return Grade::hard;
    }
  }
  throw InvalidArgument("grade must be E, M or H, got '" + s + "'");
}

double grade_target_i2(Grade g) {
  switch (g) {
    case Grade::easy: return 4.5;
    case Grade::medium: return 4.0;
    case Grade::hard: return 3.5;
  }
  return 4.0;
}

int torus_distance_sq(int x1, int y1, int x2, int y2) {
  int dx = std::abs(x1 - x2), dy = std::abs(y1 - y2);
  dx = std::min(dx, kFineGrid - dx);
  dy = std::min(dy, kFineGrid - dy);
  return dx * dx + dy * dy;
}

// ------------------------------------------------------------------ AtomSet

AtomSet::AtomSet(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  std::size_t light = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    if (a.x < 0 || a.x >= kFineGrid || a.y < 0 || a.y >= kFineGrid)
      throw InvalidArgument("AtomSet: atom outside the 512x512 grid");
    if (a.weight != 1 && a.weight != 2) throw InvalidArgument("AtomSet: weights must be 1 or 2");
    light += a.weight == 1;
    for (std::size_t j = 0; j < i; ++j)
      if (torus_distance_sq(a.x, a.y, atoms_[j].x, atoms_[j].y) < kMinAtomDistance * kMinAtomDistance)
        throw InvalidArgument("AtomSet: atoms closer than the minimum distance");
  }
  if (light != atoms_.size() / 2)
    throw InvalidArgument("AtomSet: need floor(N/2) atoms of weight 1, the rest weight 2");
}

bool AtomSet::placement_ok(int x, int y, std::size_t skip) const {
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    if (j == skip) continue;
    if (torus_distance_sq(x, y, atoms_[j].x, atoms_[j].y) < kMinAtomDistance * kMinAtomDistance) return false;
  }
  return true;
}

AtomSet sample_atoms(int n, std::uint64_t seed) {
  if (n < 1 || n > kMaxAtoms) throw InvalidArgument("sample_atoms: N must lie in [1, " + std::to_string(kMaxAtoms) + "]");
  CounterRng rng(seed, Stream::atoms);
  std::vector<Atom> placed;
  placed.reserve(static_cast<std::size_t>(n));
  int rejections = 0;
  while (placed.size() < static_cast<std::size_t>(n)) {
    const int x = static_cast<int>(rng.uniform_int(0, kFineGrid - 1));
    const int y = static_cast<int>(rng.uniform_int(0, kFineGrid - 1));
    const bool ok = std::none_of(placed.begin(), placed.end(), [&](const Atom& a) {
      return torus_distance_sq(x, y, a.x, a.y) < kMinAtomDistance * kMinAtomDistance;
    });
    if (!ok) {
      if (++rejections >= 10000)
        throw PlacementFailure("sample_atoms: 10000 consecutive rejections after placing " +
                               std::to_string(placed.size()) + " atoms");
      continue;
    }
    rejections = 0;
    placed.push_back({x, y, 2});
  }
  // Fisher-Yates: the first N/2 of a random permutation get weight 1.
  std::vector<std::size_t> order(placed.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
  for (std::size_t i = 0; i < order.size() / 2; ++i) placed[order[i]].weight = 1;
  return AtomSet(std::move(placed));
}

// --------------------------------------------------------------- intensities

std::vector<cdouble> structure_factors(const AtomSet& atoms) {
  const auto& roots = fine_roots();
  std::vector<cdouble> f(kCoarseGrid * kCoarseGrid, cdouble{});
  for (std::size_t p = 0; p < kCoarseGrid; ++p) {
    const long ps = signed_frequency(p, kCoarseGrid);
    for (std::size_t q = 0; q < kCoarseGrid; ++q) {
      const long qs = signed_frequency(q, kCoarseGrid);
      if (is_nyquist(ps, qs)) continue;
      cdouble sum{};
      for (const Atom& a : atoms.atoms())
        sum += static_cast<double>(a.weight) * roots[(ps * a.x + qs * a.y) & kFineMask];
      f[p * kCoarseGrid + q] = sum;
    }
  }
  return f;
}

double gaussian_filter(long p, long q, double filter_b) {
  return std::exp(-filter_b * static_cast<double>(p * p + q * q));
}

MagnitudeField synthesize_intensities(const AtomSet& atoms, double filter_b) {
  if (!(filter_b > 0.0)) throw InvalidArgument("synthesize_intensities: filter_b must be positive");
  const std::vector<cdouble> f = structure_factors(atoms);
  std::vector<double> intensity(f.size());
  for (std::size_t p = 0; p < kCoarseGrid; ++p)
    for (std::size_t q = 0; q < kCoarseGrid; ++q)
      intensity[p * kCoarseGrid + q] =
          std::norm(f[p * kCoarseGrid + q]) *
          gaussian_filter(signed_frequency(p, kCoarseGrid), signed_frequency(q, kCoarseGrid), filter_b);
  return MagnitudeField::symmetric_from(kCoarseGrid, intensity);
}

double intensity_second_moment(std::span<const double> intensities) {
  if (intensities.empty()) throw InvalidArgument("intensity_second_moment: no intensities");
  double s1 = 0.0, s2 = 0.0;
  for (double v : intensities) {
    s1 += v;
    s2 += v * v;
  }
  if (!(s1 > 0.0)) throw InvalidArgument("intensity_second_moment: zero mean intensity");
  const double n = static_cast<double>(intensities.size());
  return (s2 / n) / ((s1 / n) * (s1 / n));
}

double intensity_second_moment(const MagnitudeField& intensities) {
  const std::size_t m = intensities.size();
  std::vector<double> values;
  values.reserve(m * m);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) {
      if (p == m / 2 || q == m / 2 || !intensities.measured(p, q)) continue;
      values.push_back(intensities.magnitude(p, q));
    }
  return intensity_second_moment(values);
}

TuneResult tune_i2(const AtomSet& atoms, double target, TuneDirection direction, double filter_b, std::uint64_t seed) {
  HalfPlaneTuner tuner(atoms, filter_b);
  TuneResult result{atoms, tuner.i2(), 0, 0};
  const bool up = direction == TuneDirection::increase;
  // Slack absorbs rounding differences between incremental and direct i2.
  const double slack = 1e-12 * std::abs(target);
  auto reached = [&](double v) { return up ? v >= target - slack : v <= target + slack; };
  if (reached(result.achieved_i2) || atoms.count() == 0) return result;

  std::vector<Atom> current(atoms.atoms().begin(), atoms.atoms().end());
  AtomSet view(current);
  CounterRng rng(seed, Stream::tuning);
  long failures = 0;
  while (true) {
    ++result.proposals;
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(current.size()) - 1));
    const int x = static_cast<int>(rng.uniform_int(0, kFineGrid - 1));
    const int y = static_cast<int>(rng.uniform_int(0, kFineGrid - 1));
    bool accepted = false;
    if (view.placement_ok(x, y, j)) {
      const double next = tuner.propose(current[j].weight, current[j].x, current[j].y, x, y);
      const bool toward = up ? next > result.achieved_i2 : next < result.achieved_i2;
      if (toward && (!reached(next) || std::abs(next - target) <= kTuneOvershoot)) {
        tuner.commit();
        current[j].x = x;
        current[j].y = y;
        view = AtomSet(current);
        result.achieved_i2 = next;
        ++result.accepted_moves;
        accepted = true;
      }
    }
    if (accepted) {
      failures = 0;
      if (reached(result.achieved_i2)) break;
    } else if (++failures >= 1000000) {
      throw TuningStall("tune_i2: 10^6 consecutive rejected proposals at i2 = " +
                        std::to_string(result.achieved_i2));
    }
  }
  result.atoms = view;
  return result;
}

// ------------------------------------------------------------------ photons

PhotonHalfTable::PhotonHalfTable() : counts_(kTableRows * kTableColumns, 0) {}

PhotonHalfTable::PhotonHalfTable(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
  if (counts_.size() != kTableRows * kTableColumns) throw InvalidArgument("PhotonHalfTable: need 128x64 counts");
  if (std::any_of(counts_.begin(), counts_.end(), [](std::int64_t c) { return c < 0; }))
    throw InvalidArgument("PhotonHalfTable: negative count");
}

std::int64_t PhotonHalfTable::total() const {
  std::int64_t t = 0;
  for (std::int64_t c : counts_) t += c;
  return t;
}

std::int64_t PhotonHalfTable::field_total() const {
  std::int64_t t = 0, column0 = 0;
  for (std::size_t p = 0; p < kTableRows; ++p) {
    column0 += (*this)(p, 0);
    for (std::size_t q = 1; q < kTableColumns; ++q) t += (*this)(p, q);
  }
  return t + column0 / 2;
}

MagnitudeField PhotonHalfTable::magnitudes() const {
  const std::size_t m = kCoarseGrid;
  std::vector<double> full(m * m, 0.0);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < kTableColumns; ++q) full[p * m + q] = std::sqrt(static_cast<double>((*this)(p, q)));
  // Columns q > 64 are filled by mirroring; column 64 stays zero.
  return MagnitudeField::symmetric_from(m, full);
}

PhotonSample sample_photons(const MagnitudeField& intensities, double photons_per_atom, int n, std::uint64_t seed) {
  if (intensities.size() != kCoarseGrid) throw InvalidArgument("sample_photons: intensity field must be 128x128");
  if (!(photons_per_atom > 0.0) || n <= 0) throw InvalidArgument("sample_photons: photons_per_atom and N must be positive");
  const std::size_t m = kCoarseGrid;
  const double measured_sum = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = 0; q < m; ++q)
        if (intensities.measured(p, q)) s += intensities.magnitude(p, q);
    return s;
  }();
  PhotonSample out;
  if (!(measured_sum > 0.0)) return out;
  out.photon_scale = photons_per_atom * static_cast<double>(n) / measured_sum;

  CounterRng rng(seed, Stream::photons);
  std::vector<std::int64_t> k(m * m, 0);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q)
      if (intensities.measured(p, q)) k[p * m + q] = rng.poisson(out.photon_scale * intensities.magnitude(p, q));

  std::vector<std::int64_t> counts(kTableRows * kTableColumns, 0);
  for (std::size_t p = 0; p < kTableRows; ++p)
    for (std::size_t q = 0; q < kTableColumns; ++q) {
      if (p == m / 2) continue;
      counts[p * kTableColumns + q] = k[p * m + q] + k[mirror(p, m) * m + mirror(q, m)];
    }
  counts[0] = 0;
  out.table = PhotonHalfTable(std::move(counts));
  return out;
}

// ----------------------------------------------------------------- generate

Instance generate(const InstanceSpec& spec) {
  if (!(spec.filter_b > 0.0)) throw InvalidArgument("generate: filter_b must be positive");
  Instance inst;
  inst.spec = spec;

  const AtomSet initial = sample_atoms(spec.n, spec.seed);
  const double target = grade_target_i2(spec.grade);
  TuneDirection direction = TuneDirection::increase;
  if (spec.grade == Grade::hard) {
    direction = TuneDirection::decrease;
  } else if (spec.grade == Grade::medium) {
    // Medium instances move toward 4.0 from wherever the untuned sample lands.
    const double start = intensity_second_moment(synthesize_intensities(initial, spec.filter_b));
    direction = start > target ? TuneDirection::decrease : TuneDirection::increase;
  }
  TuneResult tuned = tune_i2(initial, target, direction, spec.filter_b, spec.seed);

  const MagnitudeField intensities = synthesize_intensities(tuned.atoms, spec.filter_b);
  PhotonSample photons = sample_photons(intensities, spec.photons_per_atom, spec.n, spec.seed);
  inst.table = std::move(photons.table);

  GroundTruth& truth = inst.truth;
  truth.atoms = tuned.atoms;
  truth.achieved_i2 = intensity_second_moment(intensities);
  truth.photon_scale = photons.photon_scale;
  // Each table entry sums two independent draws, so its mean is 2 c I.
  const double amplitude_scale = std::sqrt(2.0 * photons.photon_scale);
  truth.true_magnitudes = intensities.sqrt().scaled(amplitude_scale);

  const std::vector<cdouble> f = structure_factors(tuned.atoms);
  FourierEngine engine(kCoarseGrid);
  const std::size_t h = engine.half_columns();
  std::vector<cdouble> half(engine.half_count());
  for (std::size_t p = 0; p < kCoarseGrid; ++p)
    for (std::size_t q = 0; q < h; ++q) {
      const double filt =
          gaussian_filter(signed_frequency(p, kCoarseGrid), signed_frequency(q, kCoarseGrid), spec.filter_b);
      half[p * h + q] = f[p * kCoarseGrid + q] * (amplitude_scale * std::sqrt(filt));
    }
  truth.density = RealGrid(kCoarseGrid);
  engine.inverse(half, truth.density.values());
  return inst;
}

double ground_truth_ratio(const Instance& inst) {
  const MagnitudeField data = inst.table.magnitudes();
  const PhaseSolution phases = PhaseSolution::from_spectrum(forward_transform(inst.truth.density));
  const RealGrid rho = phases.synthesize(data);
  return power_ratio(rho, support_projection(rho, 8 * static_cast<std::size_t>(inst.spec.n)).support);
}

// ----------------------------------------------------------------- file I/O

std::string data_file_name(int n, Grade g) { return "data" + std::to_string(n) + grade_letter(g); }

void write_table(std::ostream& out, const PhotonHalfTable& t) {
  for (std::size_t p = 0; p < kTableRows; ++p) {
    for (std::size_t q = 0; q < kTableColumns; ++q) {
      if (q) out << ' ';
      out << t(p, q);
    }
    out << '\n';
  }
}

void write_table_file(const std::string& path, const PhotonHalfTable& t) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  write_table(f, t);
  if (!f) throw IoError("write failed: " + path);
}

PhotonHalfTable read_table(std::istream& in) {
  std::vector<std::int64_t> counts;
  counts.reserve(kTableRows * kTableColumns);
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(token, &used);
    } catch (const std::exception&) {
      throw ParseError("data file: '" + token + "' is not an integer");
    }
    if (used != token.size()) throw ParseError("data file: '" + token + "' is not an integer");
    if (v < 0) throw ParseError("data file: negative photon count");
    counts.push_back(v);
    if (counts.size() > kTableRows * kTableColumns) throw ParseError("data file: more than 128x64 entries");
  }
  if (counts.size() != kTableRows * kTableColumns)
    throw ParseError("data file: expected 8192 entries, found " + std::to_string(counts.size()));
  return PhotonHalfTable(std::move(counts));
}

PhotonHalfTable read_table_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  return read_table(f);
}

std::string manifest_json(const Instance& inst) {
  const HardnessReport h = hardness_report(inst.spec.n, inst.spec.filter_b);
  nlohmann::ordered_json j;
  j["N"] = inst.spec.n;
  j["grade"] = std::string(1, grade_letter(inst.spec.grade));
  j["seed"] = inst.spec.seed;
  j["photons_per_atom"] = inst.spec.photons_per_atom;
  j["filter_b"] = inst.spec.filter_b;
  j["achieved_i2"] = inst.truth.achieved_i2;
  j["mu"] = h.mu;
  j["mu_paper_formula"] = h.mu_paper;
  j["photon_scale"] = inst.truth.photon_scale;
  j["total_photons"] = inst.table.field_total();
  return j.dump(2);
}

std::string atoms_json(const AtomSet& atoms) {
  nlohmann::json j = nlohmann::json::array();
  for (const Atom& a : atoms.atoms()) j.push_back({{"x", a.x}, {"y", a.y}, {"weight", a.weight}});
  return j.dump();
}

AtomSet parse_atoms_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    std::vector<Atom> atoms;
    for (const auto& e : j) atoms.push_back({e.at("x").get<int>(), e.at("y").get<int>(), e.at("weight").get<int>()});
    return AtomSet(std::move(atoms));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("atoms file: ") + e.what());
  }
}

Manifest parse_manifest_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    Manifest m;
    m.n = j.at("N").get<int>();
    m.grade = parse_grade(j.at("grade").get<std::string>());
    m.seed = j.value("seed", std::uint64_t{0});
    m.photons_per_atom = j.value("photons_per_atom", 0.0);
    m.filter_b = j.value("filter_b", 0.0);
    m.achieved_i2 = j.value("achieved_i2", 0.0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
}

}  // namespace phasebench
