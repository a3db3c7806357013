#include "phasebench/projections.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "phasebench/errors.hpp"

namespace phasebench {

// --------------------------------------------------------------- SupportSet

SupportSet::SupportSet(std::size_t m, std::vector<std::uint32_t> indices) : m_(m), indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
    throw InvalidArgument("SupportSet: duplicate pixel");
  if (!indices_.empty() && indices_.back() >= m * m) throw InvalidArgument("SupportSet: pixel outside grid");
}

bool SupportSet::contains(std::size_t x, std::size_t y) const {
  return std::binary_search(indices_.begin(), indices_.end(), static_cast<std::uint32_t>(x * m_ + y));
}

// --------------------------------------------------------------- projections

void select_top_values(std::span<const double> values, std::size_t k, std::vector<std::uint32_t>& out) {
  const std::size_t n = values.size();
  out.clear();
  if (k == 0) return;
  if (k >= n) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint32_t>(i);
    return;
  }
  thread_local std::vector<double> scratch;
  scratch.assign(values.begin(), values.end());
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end(),
                   std::greater<>());
  const double threshold = scratch[k - 1];

  std::size_t above = 0;
  for (double v : values) above += (v > threshold);
  std::size_t ties_allowed = k - above;
  out.reserve(k);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values[i];
    if (v > threshold) {
      out.push_back(static_cast<std::uint32_t>(i));
    } else if (v == threshold && ties_allowed > 0) {
      out.push_back(static_cast<std::uint32_t>(i));
      --ties_allowed;
    }
  }
}

SupportProjection support_projection(const RealGrid& g, std::size_t support_size) {
  if (support_size > g.pixel_count()) throw InvalidArgument("support_projection: support larger than grid");
  std::vector<std::uint32_t> idx;
  select_top_values(g.values(), support_size, idx);
  RealGrid out(g.size());
  for (std::uint32_t i : idx) out.values()[i] = g.values()[i];
  return {std::move(out), SupportSet(g.size(), std::move(idx))};
}

void apply_magnitudes(std::span<cdouble> half, const MagnitudeField& data) {
  const std::size_t m = data.size(), h = m / 2 + 1;
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t q = 0; q < h; ++q) {
      if (!data.measured(p, q)) continue;
      cdouble& c = half[p * h + q];
      const double target = data.magnitude(p, q);
      const double a = std::abs(c);
      c = a > 0.0 ? c * (target / a) : cdouble(target, 0.0);
    }
  }
}

RealGrid magnitude_projection(const RealGrid& g, const MagnitudeField& data) {
  if (g.size() != data.size()) throw InvalidArgument("magnitude_projection: size mismatch");
  FourierEngine engine(g.size());
  std::vector<cdouble> half(engine.half_count());
  engine.forward(g.values(), half);
  apply_magnitudes(half, data);
  RealGrid out(g.size());
  engine.inverse(half, out.values());
  return out;
}

double power_ratio(std::span<const double> values, std::span<const std::uint32_t> support) {
  double total = 0.0;
  for (double v : values) total += v * v;
  if (!(total > 0.0)) throw ZeroPower("power_ratio: signal has zero total power");
  double in_support = 0.0;
  for (std::uint32_t i : support) in_support += values[i] * values[i];
  return in_support / total;
}

double power_ratio(const RealGrid& g2, const SupportSet& s) {
  if (g2.size() != s.grid_size()) throw InvalidArgument("power_ratio: size mismatch");
  return power_ratio(g2.values(), s.indices());
}

// ------------------------------------------------------------ PhaseSolution

double wrap_phase(double phi) {
  constexpr double pi = std::numbers::pi;
  phi = std::remainder(phi, 2.0 * pi);  // [-pi, pi]
  if (phi <= -pi) phi += 2.0 * pi;
  return phi;
}

PhaseSolution::PhaseSolution(std::size_t m, double dc_amplitude, std::vector<double> phases, double tol)
    : m_(m), dc_(dc_amplitude), phases_(std::move(phases)) {
  require_supported_size(m);
  if (phases_.size() != m * m) throw InvalidArgument("PhaseSolution: phase count does not match size");
  if (!(dc_ > 0.0) || !std::isfinite(dc_)) throw InvalidArgument("PhaseSolution: dc amplitude must be positive");
  for (double& phi : phases_) {
    if (!std::isfinite(phi)) throw InvalidArgument("PhaseSolution: non-finite phase");
    phi = wrap_phase(phi);
  }
  if (std::abs(phases_[0]) > tol) throw AntisymmetryViolation("PhaseSolution: phi(0,0) must be 0");
  phases_[0] = 0.0;
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) {
      const double sum = wrap_phase(phases_[p * m + q] + phases_[mirror(p, m) * m + mirror(q, m)]);
      if (std::abs(sum) > tol)
        throw AntisymmetryViolation("PhaseSolution: phi(" + std::to_string(p) + "," + std::to_string(q) +
                                    ") != -phi(-p,-q)");
    }
}

PhaseSolution PhaseSolution::from_spectrum(const ComplexSpectrum& s) {
  const std::size_t m = s.size();
  std::vector<double> phases(m * m);
  for (std::size_t i = 0; i < m * m; ++i) phases[i] = std::arg(s.coefficients()[i]);
  phases[0] = 0.0;
  return PhaseSolution(m, s(0, 0).real(), std::move(phases));
}

RealGrid PhaseSolution::synthesize(const MagnitudeField& magnitudes) const {
  if (magnitudes.size() != m_) throw InvalidArgument("PhaseSolution::synthesize: size mismatch");
  FourierEngine engine(m_);
  const std::size_t h = engine.half_columns();
  std::vector<cdouble> half(engine.half_count());
  for (std::size_t p = 0; p < m_; ++p)
    for (std::size_t q = 0; q < h; ++q) half[p * h + q] = std::polar(magnitudes.magnitude(p, q), phase(p, q));
  half[0] = dc_;
  RealGrid out(m_);
  engine.inverse(half, out.values());
  return out;
}

// ------------------------------------------------------------ solution files

void write_solution(std::ostream& out, const PhaseSolution& s) {
  const std::size_t m = s.size();
  out << std::setprecision(17) << "dc " << s.dc_amplitude() << '\n';
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m / 2; ++q)
      if (is_canonical(p, q, m)) out << p << ' ' << q << ' ' << s.phase(p, q) << '\n';
}

void write_solution_file(const std::string& path, const PhaseSolution& s) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  write_solution(f, s);
  if (!f) throw IoError("write failed: " + path);
}

PhaseSolution read_solution(std::istream& in, std::size_t m) {
  require_supported_size(m);
  constexpr double tol = 1e-6;
  std::string tag;
  double dc = 0.0;
  if (!(in >> tag >> dc) || tag != "dc") throw ParseError("solution: expected header line 'dc <value>'");

  const double unset = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> phases(m * m, unset);
  std::vector<unsigned char> given(m * m, 0);
  std::string line;
  std::getline(in, line);  // rest of the header line
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    long p = 0, q = 0;
    double phi = 0.0;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!(ls >> p >> q >> phi)) throw ParseError("solution line " + std::to_string(line_no) + ": expected 'p q phase'");
    std::string extra;
    if (ls >> extra) throw ParseError("solution line " + std::to_string(line_no) + ": trailing characters");
    if (p < 0 || q < 0 || p >= static_cast<long>(m) || q >= static_cast<long>(m) || !std::isfinite(phi))
      throw ParseError("solution line " + std::to_string(line_no) + ": frequency or phase out of range");

    const std::size_t i = static_cast<std::size_t>(p) * m + static_cast<std::size_t>(q);
    const std::size_t j = mirror(static_cast<std::size_t>(p), m) * m + mirror(static_cast<std::size_t>(q), m);
    if (given[i] && std::abs(wrap_phase(phases[i] - phi)) > tol)
      throw ParseError("solution line " + std::to_string(line_no) + ": conflicting duplicate frequency");
    if (given[j] && std::abs(wrap_phase(phases[j] + phi)) > tol)
      throw AntisymmetryViolation("solution line " + std::to_string(line_no) + ": phase(" + std::to_string(p) + "," +
                                  std::to_string(q) + ") is not the negative of its mirror");
    if (i == 0 && std::abs(wrap_phase(phi)) > tol) throw AntisymmetryViolation("solution: phase(0,0) must be 0");
    phases[i] = phi;
    given[i] = 1;
    if (!given[j]) phases[j] = -phi;
  }
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) {
      double& phi = phases[p * m + q];
      if (!std::isnan(phi)) continue;
      if (is_canonical(p, q, m) && !(p == 0 && q == 0))
        throw ParseError("solution: missing phase for (" + std::to_string(p) + "," + std::to_string(q) + ")");
      phi = 0.0;  // (0,0) or Nyquist frequencies, which carry no magnitude
    }
  if (!(dc > 0.0) || !std::isfinite(dc)) throw ParseError("solution: dc amplitude must be positive");
  return PhaseSolution(m, dc, std::move(phases), tol);
}

PhaseSolution read_solution_file(const std::string& path, std::size_t m) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  return read_solution(f, m);
}

}  // namespace phasebench
