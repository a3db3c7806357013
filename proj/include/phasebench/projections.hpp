#pragma once

// The two constraint projections used by every crystallographic solver and
// the power-ratio certificate.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "phasebench/grid.hpp"

namespace phasebench {

// Pixels kept by the support-size projection, as sorted flat indices x*M + y.
class SupportSet {
 public:
  SupportSet() = default;
  SupportSet(std::size_t m, std::vector<std::uint32_t> indices);

  std::size_t grid_size() const { return m_; }
  std::size_t count() const { return indices_.size(); }
  std::span<const std::uint32_t> indices() const { return indices_; }
  bool contains(std::size_t x, std::size_t y) const;

 private:
  std::size_t m_ = 0;
  std::vector<std::uint32_t> indices_;
};

// Writes the indices of the `k` largest values into `out` (sorted ascending).
// Ties at the threshold keep the lowest row-major indices.
void select_top_values(std::span<const double> values, std::size_t k, std::vector<std::uint32_t>& out);

struct SupportProjection {
  RealGrid grid;
  SupportSet support;
};

SupportProjection support_projection(const RealGrid& g, std::size_t support_size);

// Replaces the Fourier magnitudes of `g` by `data` on measured frequencies and
// keeps its phases; unmeasured coefficients are copied. A zero coefficient
// with a positive target magnitude receives phase 0.
RealGrid magnitude_projection(const RealGrid& g, const MagnitudeField& data);

// In-place half-spectrum variant used inside solver loops.
void apply_magnitudes(std::span<cdouble> half, const MagnitudeField& data);

// I_S / I_F. Throws ZeroPower when the grid has no power.
double power_ratio(const RealGrid& g2, const SupportSet& s);
double power_ratio(std::span<const double> values, std::span<const std::uint32_t> support);

// Phases of a real signal plus its (0,0) amplitude.
class PhaseSolution {
 public:
  PhaseSolution() = default;
  // Throws InvalidArgument unless dc > 0, phases are finite and antisymmetric
  // to `tol` (mod 2 pi), and phi(0,0) == 0. Phases are wrapped into (-pi, pi].
  PhaseSolution(std::size_t m, double dc_amplitude, std::vector<double> phases, double tol = 1e-6);

  static PhaseSolution from_spectrum(const ComplexSpectrum& s);

  std::size_t size() const { return m_; }
  double dc_amplitude() const { return dc_; }
  double phase(std::size_t p, std::size_t q) const { return phases_[p * m_ + q]; }
  std::span<const double> phases() const { return phases_; }

  // rho(x,y) = M^-1 sum_pq |rho^(p,q)| exp(i phi(p,q)) exp(2 pi i (px+qy)/M),
  // with |rho^(0,0)| = dc_amplitude.
  RealGrid synthesize(const MagnitudeField& magnitudes) const;

 private:
  std::size_t m_ = 0;
  double dc_ = 0.0;
  std::vector<double> phases_;
};

// Wraps an angle into (-pi, pi].
double wrap_phase(double phi);

// Solution file: "dc <value>" then one "p q phase" line per canonical
// half-plane frequency (M*M/2 lines). Phases elsewhere follow by antisymmetry.
void write_solution(std::ostream& out, const PhaseSolution& s);
void write_solution_file(const std::string& path, const PhaseSolution& s);
// Accepts any set of "p q phase" lines that covers the canonical half-plane;
// lines for mirrored frequencies are checked for antisymmetry to 1e-6.
PhaseSolution read_solution(std::istream& in, std::size_t m);
PhaseSolution read_solution_file(const std::string& path, std::size_t m);

}  // namespace phasebench
