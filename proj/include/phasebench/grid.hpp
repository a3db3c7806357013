#pragma once

// Square periodic grids and their unitary discrete Fourier transforms.
//
// Conventions used by all crystallographic code:
//   * row index x (or frequency p), column index y (or q), flat index x*M + y;
//   * frequencies are stored in DFT order 0..M-1; the mirror of p is (M-p) mod M;
//   * forward:  c(p,q) = M^-1 sum_xy rho(x,y) exp(-2 pi i (px+qy)/M)
//     inverse:  rho(x,y) = M^-1 sum_pq c(p,q) exp(+2 pi i (px+qy)/M)
//     so that sum |c|^2 == sum rho^2.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace phasebench {

using cdouble = std::complex<double>;

// Grid sizes are powers of two between 4 and 512.
bool is_supported_size(std::size_t m);
void require_supported_size(std::size_t m);

inline std::size_t mirror(std::size_t p, std::size_t m) { return (m - p) % m; }

// Signed frequency of DFT index p: 0..M/2-1 -> itself, M/2.. -> p - M.
inline long signed_frequency(std::size_t p, std::size_t m) {
  return p < m / 2 ? static_cast<long>(p) : static_cast<long>(p) - static_cast<long>(m);
}

class RealGrid {
 public:
  RealGrid() = default;
  explicit RealGrid(std::size_t m);
  RealGrid(std::size_t m, std::vector<double> values);

  std::size_t size() const { return m_; }
  std::size_t pixel_count() const { return values_.size(); }

  // Torus-periodic access; arguments may be any integers.
  double at(long x, long y) const;
  double& operator()(std::size_t x, std::size_t y) { return values_[x * m_ + y]; }
  double operator()(std::size_t x, std::size_t y) const { return values_[x * m_ + y]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool all_finite() const;

 private:
  std::size_t m_ = 0;
  std::vector<double> values_;
};

class ComplexSpectrum {
 public:
  ComplexSpectrum() = default;
  explicit ComplexSpectrum(std::size_t m, bool hermitian = false);
  ComplexSpectrum(std::size_t m, std::vector<cdouble> coefficients, bool hermitian);

  std::size_t size() const { return m_; }
  bool hermitian() const { return hermitian_; }

  cdouble& operator()(std::size_t p, std::size_t q) { return coeffs_[p * m_ + q]; }
  cdouble operator()(std::size_t p, std::size_t q) const { return coeffs_[p * m_ + q]; }

  std::span<cdouble> coefficients() { return coeffs_; }
  std::span<const cdouble> coefficients() const { return coeffs_; }

 private:
  std::size_t m_ = 0;
  std::vector<cdouble> coeffs_;
  bool hermitian_ = false;
};

// Nonnegative Fourier magnitudes plus a measured mask. Both are symmetric
// under (p,q) -> (-p,-q); (0,0) is never measured.
class MagnitudeField {
 public:
  MagnitudeField() = default;
  explicit MagnitudeField(std::size_t m);

  // Mirrors `values` into a symmetric field: entry (p,q) and (-p,-q) are set
  // from whichever of the pair is canonical. All entries except (0,0) measured.
  static MagnitudeField symmetric_from(std::size_t m, std::span<const double> values);

  std::size_t size() const { return m_; }

  double magnitude(std::size_t p, std::size_t q) const { return mags_[p * m_ + q]; }
  bool measured(std::size_t p, std::size_t q) const { return measured_[p * m_ + q] != 0; }

  // Sets the pair (p,q), (-p,-q) together so the invariants always hold.
  void set_pair(std::size_t p, std::size_t q, double magnitude);
  void set_measured_pair(std::size_t p, std::size_t q, bool measured);

  std::span<const double> magnitudes() const { return mags_; }
  std::span<const unsigned char> measured_mask() const { return measured_; }

  // Elementwise sqrt / square; the mask is carried over.
  MagnitudeField sqrt() const;
  MagnitudeField squared() const;
  MagnitudeField scaled(double factor) const;

  // Sum of magnitude^2 over measured entries.
  double measured_power() const;

 private:
  std::size_t m_ = 0;
  std::vector<double> mags_;
  std::vector<unsigned char> measured_;
};

// Canonical half-plane: 1 <= q < M/2, or q == 0 and p < M/2.
inline bool is_canonical(std::size_t p, std::size_t q, std::size_t m) {
  return (q >= 1 && q < m / 2) || (q == 0 && p < m / 2);
}

// Real-to-half-complex unitary FFT workspace for one grid size. Owns its FFTW
// plans and buffers; one engine per thread. The half spectrum has M rows and
// M/2+1 columns (q = 0..M/2).
class FourierEngine {
 public:
  explicit FourierEngine(std::size_t m);
  ~FourierEngine();
  FourierEngine(const FourierEngine&) = delete;
  FourierEngine& operator=(const FourierEngine&) = delete;

  std::size_t size() const { return m_; }
  std::size_t half_columns() const { return m_ / 2 + 1; }
  std::size_t half_count() const { return m_ * (m_ / 2 + 1); }

  void forward(std::span<const double> grid, std::span<cdouble> half) const;
  // Assumes `half` is the half spectrum of a real grid.
  void inverse(std::span<const cdouble> half, std::span<double> grid) const;

 private:
  struct Impl;
  std::size_t m_;
  std::unique_ptr<Impl> impl_;
};

ComplexSpectrum forward_transform(const RealGrid& g);
// Throws HermitianViolation when the synthesized imaginary part exceeds
// 1e-8 * max|s|.
RealGrid inverse_transform(const ComplexSpectrum& s);

double total_power(const RealGrid& g);
double total_power(const ComplexSpectrum& s);

// c(p,q) == conj(c(-p,-q)) to `rel_tol` relative to max|c|.
bool is_hermitian(const ComplexSpectrum& s, double rel_tol = 1e-10);

// Full spectrum <-> half spectrum (columns 0..M/2).
ComplexSpectrum expand_half_spectrum(std::size_t m, std::span<const cdouble> half);
std::vector<cdouble> half_of(const ComplexSpectrum& s);

}  // namespace phasebench
