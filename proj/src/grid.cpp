#include "phasebench/grid.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "phasebench/errors.hpp"
#include "fftw_lock.hpp"

namespace phasebench {

std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

namespace {

struct Pair {
  std::size_t p, q;
};

// Representative of the Friedel pair containing (p,q).
Pair representative(std::size_t p, std::size_t q, std::size_t m) {
  if (is_canonical(p, q, m)) return {p, q};
  const std::size_t mp = mirror(p, m), mq = mirror(q, m);
  if (is_canonical(mp, mq, m)) return {mp, mq};
  return (p * m + q <= mp * m + mq) ? Pair{p, q} : Pair{mp, mq};
}

}  // namespace

bool is_supported_size(std::size_t m) {
  return m >= 4 && m <= 512 && (m & (m - 1)) == 0;
}

void require_supported_size(std::size_t m) {
  if (!is_supported_size(m))
    throw InvalidArgument("grid size must be a power of two in [4, 512], got " + std::to_string(m));
}

// ---------------------------------------------------------------- RealGrid

RealGrid::RealGrid(std::size_t m) : m_(m), values_(m * m, 0.0) { require_supported_size(m); }

RealGrid::RealGrid(std::size_t m, std::vector<double> values) : m_(m), values_(std::move(values)) {
  require_supported_size(m);
  if (values_.size() != m * m) throw InvalidArgument("RealGrid: value count does not match size");
  if (!all_finite()) throw InvalidArgument("RealGrid: non-finite value");
}

double RealGrid::at(long x, long y) const {
  const long m = static_cast<long>(m_);
  x %= m;
  y %= m;
  if (x < 0) x += m;
  if (y < 0) y += m;
  return values_[static_cast<std::size_t>(x * m + y)];
}

bool RealGrid::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------- ComplexSpectrum

ComplexSpectrum::ComplexSpectrum(std::size_t m, bool hermitian)
    : m_(m), coeffs_(m * m, cdouble{}), hermitian_(hermitian) {
  require_supported_size(m);
}

ComplexSpectrum::ComplexSpectrum(std::size_t m, std::vector<cdouble> coefficients, bool hermitian)
    : m_(m), coeffs_(std::move(coefficients)), hermitian_(hermitian) {
  require_supported_size(m);
  if (coeffs_.size() != m * m) throw InvalidArgument("ComplexSpectrum: coefficient count does not match size");
}

// ----------------------------------------------------------- MagnitudeField

MagnitudeField::MagnitudeField(std::size_t m) : m_(m), mags_(m * m, 0.0), measured_(m * m, 1) {
  require_supported_size(m);
  measured_[0] = 0;
}

MagnitudeField MagnitudeField::symmetric_from(std::size_t m, std::span<const double> values) {
  if (values.size() != m * m) throw InvalidArgument("MagnitudeField: value count does not match size");
  MagnitudeField f(m);
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t q = 0; q < m; ++q) {
      const Pair r = representative(p, q, m);
      const double v = values[r.p * m + r.q];
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("MagnitudeField: magnitudes must be finite and nonnegative");
      f.mags_[p * m + q] = v;
    }
  }
  return f;
}

void MagnitudeField::set_pair(std::size_t p, std::size_t q, double magnitude) {
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) throw InvalidArgument("MagnitudeField: magnitude must be finite and nonnegative");
  mags_[p * m_ + q] = magnitude;
  mags_[mirror(p, m_) * m_ + mirror(q, m_)] = magnitude;
}

void MagnitudeField::set_measured_pair(std::size_t p, std::size_t q, bool measured) {
  if (p == 0 && q == 0 && measured) throw InvalidArgument("MagnitudeField: (0,0) is never measured");
  measured_[p * m_ + q] = measured ? 1 : 0;
  measured_[mirror(p, m_) * m_ + mirror(q, m_)] = measured ? 1 : 0;
}

MagnitudeField MagnitudeField::sqrt() const {
  MagnitudeField f = *this;
  for (double& v : f.mags_) v = std::sqrt(v);
  return f;
}

MagnitudeField MagnitudeField::squared() const {
  MagnitudeField f = *this;
  for (double& v : f.mags_) v = v * v;
  return f;
}

MagnitudeField MagnitudeField::scaled(double factor) const {
  if (!(factor >= 0.0)) throw InvalidArgument("MagnitudeField: negative scale");
  MagnitudeField f = *this;
  for (double& v : f.mags_) v *= factor;
  return f;
}

double MagnitudeField::measured_power() const {
  double s = 0.0;
  for (std::size_t i = 0; i < mags_.size(); ++i)
    if (measured_[i]) s += mags_[i] * mags_[i];
  return s;
}

// ------------------------------------------------------------ FourierEngine

struct FourierEngine::Impl {
  double* real = nullptr;
  fftw_complex* half = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

FourierEngine::FourierEngine(std::size_t m) : m_(m), impl_(std::make_unique<Impl>()) {
  require_supported_size(m);
  const int n = static_cast<int>(m);
  impl_->real = fftw_alloc_real(m * m);
  impl_->half = fftw_alloc_complex(half_count());
  // FFTW_ESTIMATE plans are deterministic, so results are reproducible bit for bit.
  std::lock_guard lock(fftw_planner_mutex());
  impl_->r2c = fftw_plan_dft_r2c_2d(n, n, impl_->real, impl_->half, FFTW_ESTIMATE);
  impl_->c2r = fftw_plan_dft_c2r_2d(n, n, impl_->half, impl_->real, FFTW_ESTIMATE);
}

FourierEngine::~FourierEngine() {
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(impl_->r2c);
  fftw_destroy_plan(impl_->c2r);
  fftw_free(impl_->real);
  fftw_free(impl_->half);
}

void FourierEngine::forward(std::span<const double> grid, std::span<cdouble> half) const {
  const double scale = 1.0 / static_cast<double>(m_);
  std::copy(grid.begin(), grid.end(), impl_->real);
  fftw_execute(impl_->r2c);
  for (std::size_t i = 0; i < half_count(); ++i) half[i] = cdouble(impl_->half[i][0], impl_->half[i][1]) * scale;
}

void FourierEngine::inverse(std::span<const cdouble> half, std::span<double> grid) const {
  const double scale = 1.0 / static_cast<double>(m_);
  for (std::size_t i = 0; i < half_count(); ++i) {
    impl_->half[i][0] = half[i].real();
    impl_->half[i][1] = half[i].imag();
  }
  // c2r destroys its input; the copy above keeps `half` intact.
  fftw_execute(impl_->c2r);
  for (std::size_t i = 0; i < m_ * m_; ++i) grid[i] = impl_->real[i] * scale;
}

// --------------------------------------------------------------- transforms

ComplexSpectrum expand_half_spectrum(std::size_t m, std::span<const cdouble> half) {
  const std::size_t h = m / 2 + 1;
  ComplexSpectrum s(m, true);
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t q = 0; q < h; ++q) s(p, q) = half[p * h + q];
    for (std::size_t q = h; q < m; ++q) s(p, q) = std::conj(half[mirror(p, m) * h + (m - q)]);
  }
  return s;
}

std::vector<cdouble> half_of(const ComplexSpectrum& s) {
  const std::size_t m = s.size(), h = m / 2 + 1;
  std::vector<cdouble> half(m * h);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < h; ++q) half[p * h + q] = s(p, q);
  return half;
}

ComplexSpectrum forward_transform(const RealGrid& g) {
  FourierEngine engine(g.size());
  std::vector<cdouble> half(engine.half_count());
  engine.forward(g.values(), half);
  return expand_half_spectrum(g.size(), half);
}

RealGrid inverse_transform(const ComplexSpectrum& s) {
  const std::size_t m = s.size();
  const int n = static_cast<int>(m);
  fftw_complex* buf = fftw_alloc_complex(m * m);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  double max_abs = 0.0;
  for (std::size_t i = 0; i < m * m; ++i) {
    const cdouble c = s.coefficients()[i];
    buf[i][0] = c.real();
    buf[i][1] = c.imag();
    max_abs = std::max(max_abs, std::abs(c));
  }
  fftw_execute(plan);

  const double scale = 1.0 / static_cast<double>(m);
  std::vector<double> values(m * m);
  double max_imag = 0.0;
  for (std::size_t i = 0; i < m * m; ++i) {
    values[i] = buf[i][0] * scale;
    max_imag = std::max(max_imag, std::abs(buf[i][1] * scale));
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);

  if (max_imag > 1e-8 * max_abs)
    throw HermitianViolation("inverse_transform: imaginary residue " + std::to_string(max_imag) +
                             " exceeds 1e-8 * max|s|");
  return RealGrid(m, std::move(values));
}

double total_power(const RealGrid& g) {
  double s = 0.0;
  for (double v : g.values()) s += v * v;
  return s;
}

double total_power(const ComplexSpectrum& s) {
  double t = 0.0;
  for (const cdouble& c : s.coefficients()) t += std::norm(c);
  return t;
}

bool is_hermitian(const ComplexSpectrum& s, double rel_tol) {
  const std::size_t m = s.size();
  double max_abs = 0.0;
  for (const cdouble& c : s.coefficients()) max_abs = std::max(max_abs, std::abs(c));
  const double bound = rel_tol * max_abs;
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q)
      if (std::abs(s(p, q) - std::conj(s(mirror(p, m), mirror(q, m)))) > bound) return false;
  return true;
}

}  // namespace phasebench
