#include "phasebench/generic.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include <fftw3.h>

#include "fftw_lock.hpp"
#include "phasebench/errors.hpp"
#include "phasebench/grid.hpp"
#include "phasebench/random.hpp"

namespace phasebench {

namespace {

CMatrix random_gaussian_matrix(std::size_t m, std::size_t n, std::uint64_t seed, std::uint64_t attempt) {
  CounterRng rng(seed, Stream::gaussian, {attempt});
  CMatrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.complex_normal();
  return a;
}

CVector random_complex_vector(std::size_t n, CounterRng& rng) {
  CVector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.complex_normal();
  return v;
}

}  // namespace

// ------------------------------------------------------------ DenseSensing

DenseSensing::DenseSensing(CMatrix a) : a_(std::move(a)) {
  if (a_.rows() < a_.cols() || a_.cols() == 0) throw InvalidArgument("DenseSensing: need m >= n >= 1");
  const Eigen::HouseholderQR<CMatrix> qr(a_);
  const Eigen::Index m = a_.rows(), n = a_.cols();
  q_ = qr.householderQ() * CMatrix::Identity(m, n);
  r_ = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  const Eigen::VectorXd diag = r_.diagonal().cwiseAbs();
  if (!(diag.minCoeff() > 1e-10 * diag.maxCoeff())) throw RankDeficient("DenseSensing: matrix is rank deficient");
}

CVector DenseSensing::apply(const CVector& x) const { return a_ * x; }

CVector DenseSensing::pseudo_inverse(const CVector& y) const {
  return r_.triangularView<Eigen::Upper>().solve(q_.adjoint() * y);
}

CVector DenseSensing::range_projection(const CVector& y) const { return q_ * (q_.adjoint() * y); }

DenseSensing gaussian_sensing(std::size_t m, std::size_t n, std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    try {
      return DenseSensing(random_gaussian_matrix(m, n, seed, attempt));
    } catch (const RankDeficient&) {
      if (attempt >= 16) throw;
    }
  }
}

// -------------------------------------------------------------- CdpSensing

struct CdpSensing::Fft {
  fftw_complex* buf = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

CdpSensing::CdpSensing(std::size_t image_rows, std::size_t image_cols, std::vector<CMatrix> masks)
    : m_(image_rows), n_(image_cols), masks_(std::move(masks)), fft_(std::make_unique<Fft>()) {
  if (m_ == 0 || n_ == 0 || masks_.empty()) throw InvalidArgument("CdpSensing: need a nonempty image and L >= 1");
  for (const CMatrix& d : masks_) {
    if (static_cast<std::size_t>(d.rows()) != m_ || static_cast<std::size_t>(d.cols()) != n_)
      throw InvalidArgument("CdpSensing: mask shape does not match image");
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (std::abs(std::abs(d(i)) - 1.0) > 1e-12) throw InvalidArgument("CdpSensing: mask entries must be unimodular");
  }
  fft_->buf = fftw_alloc_complex(pixels());
  std::lock_guard lock(fftw_planner_mutex());
  const int r = static_cast<int>(m_), c = static_cast<int>(n_);
  fft_->forward = fftw_plan_dft_2d(r, c, fft_->buf, fft_->buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fft_->backward = fftw_plan_dft_2d(r, c, fft_->buf, fft_->buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

CdpSensing::~CdpSensing() {
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(fft_->forward);
  fftw_destroy_plan(fft_->backward);
  fftw_free(fft_->buf);
}

CVector CdpSensing::apply(const CVector& x) const {
  if (static_cast<std::size_t>(x.size()) != cols()) throw InvalidArgument("CdpSensing::apply: size mismatch");
  CVector y(static_cast<Eigen::Index>(rows()));
  const std::size_t px = pixels();
  for (std::size_t l = 0; l < masks_.size(); ++l) {
    const CMatrix& d = masks_[l];
    for (std::size_t s = 0; s < m_; ++s)
      for (std::size_t t = 0; t < n_; ++t) {
        const cdouble v = std::conj(d(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t))) * x[static_cast<Eigen::Index>(s * n_ + t)];
        fft_->buf[s * n_ + t][0] = v.real();
        fft_->buf[s * n_ + t][1] = v.imag();
      }
    fftw_execute(fft_->forward);
    for (std::size_t i = 0; i < px; ++i) y[static_cast<Eigen::Index>(l * px + i)] = cdouble(fft_->buf[i][0], fft_->buf[i][1]);
  }
  return y;
}

CVector CdpSensing::adjoint(const CVector& y) const {
  if (static_cast<std::size_t>(y.size()) != rows()) throw InvalidArgument("CdpSensing::adjoint: size mismatch");
  const std::size_t px = pixels();
  CVector x = CVector::Zero(static_cast<Eigen::Index>(px));
  for (std::size_t l = 0; l < masks_.size(); ++l) {
    for (std::size_t i = 0; i < px; ++i) {
      const cdouble v = y[static_cast<Eigen::Index>(l * px + i)];
      fft_->buf[i][0] = v.real();
      fft_->buf[i][1] = v.imag();
    }
    fftw_execute(fft_->backward);
    const CMatrix& d = masks_[l];
    for (std::size_t s = 0; s < m_; ++s)
      for (std::size_t t = 0; t < n_; ++t) {
        const std::size_t i = s * n_ + t;
        x[static_cast<Eigen::Index>(i)] += d(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) * cdouble(fft_->buf[i][0], fft_->buf[i][1]);
      }
  }
  return x;
}

CVector CdpSensing::pseudo_inverse(const CVector& y) const {
  return adjoint(y) / static_cast<double>(pixels() * masks_.size());
}

std::vector<CMatrix> random_cdp_masks(std::size_t image_rows, std::size_t image_cols, std::size_t count,
                                      std::uint64_t seed) {
  static const cdouble values[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  CounterRng rng(seed, Stream::cdp);
  std::vector<CMatrix> masks;
  for (std::size_t l = 0; l < count; ++l) {
    CMatrix d(static_cast<Eigen::Index>(image_rows), static_cast<Eigen::Index>(image_cols));
    for (Eigen::Index s = 0; s < d.rows(); ++s)
      for (Eigen::Index t = 0; t < d.cols(); ++t) d(s, t) = values[rng.uniform_int(0, 3)];
    masks.push_back(std::move(d));
  }
  return masks;
}

CMatrix materialize(const CdpSensing& sensing) {
  const std::size_t m = sensing.image_rows(), n = sensing.image_cols(), px = m * n;
  CMatrix a(static_cast<Eigen::Index>(sensing.rows()), static_cast<Eigen::Index>(px));
  for (std::size_t l = 0; l < sensing.mask_count(); ++l)
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = 0; q < n; ++q)
        for (std::size_t s = 0; s < m; ++s)
          for (std::size_t t = 0; t < n; ++t) {
            const double angle = -2.0 * std::numbers::pi *
                                 (static_cast<double>(p * s % m) / static_cast<double>(m) +
                                  static_cast<double>(q * t % n) / static_cast<double>(n));
            a(static_cast<Eigen::Index>(l * px + p * n + q), static_cast<Eigen::Index>(s * n + t)) =
                std::conj(sensing.masks()[l](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t))) *
                std::polar(1.0, angle);
          }
  return a;
}

// ------------------------------------------------------------- projections

CVector magnitude_projection_c(const CVector& y, const Eigen::VectorXd& target) {
  if (y.size() != target.size()) throw InvalidArgument("magnitude_projection_c: size mismatch");
  CVector out(y.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double a = std::abs(y[k]);
    out[k] = a > 0.0 ? y[k] * (target[k] / a) : cdouble(target[k], 0.0);
  }
  return out;
}

double phase_invariant_error(const CVector& rho, const CVector& rho0) {
  if (rho.size() != rho0.size()) throw InvalidArgument("phase_invariant_error: size mismatch");
  const double ref = rho0.norm();
  if (!(ref > 0.0)) throw ZeroReference("phase_invariant_error: reference signal is zero");
  const cdouble inner = rho0.dot(rho);  // sum conj(rho0) rho
  const cdouble align = std::abs(inner) > 0.0 ? inner / std::abs(inner) : cdouble(1.0, 0.0);
  return (rho - align * rho0).norm() / ref;
}

// --------------------------------------------------------------------- RRR

GenericResult rrr_generic(const Sensing& a, const Eigen::VectorXd& target, const GenericConfig& cfg,
                          const CVector* reference, const CVector* initial_signal) {
  if (static_cast<std::size_t>(target.size()) != a.rows()) throw InvalidArgument("rrr_generic: target size mismatch");
  if ((target.array() < 0.0).any()) throw InvalidArgument("rrr_generic: negative target magnitude");
  if (!(cfg.beta > 0.0 && cfg.beta < 2.0) || !(cfg.tolerance > 0.0) || cfg.max_iterations < 1)
    throw InvalidArgument("rrr_generic: invalid configuration");
  if (reference && static_cast<std::size_t>(reference->size()) != a.cols())
    throw InvalidArgument("rrr_generic: reference size mismatch");

  CVector y;
  if (initial_signal) {
    y = a.apply(*initial_signal);
  } else {
    CounterRng rng(cfg.seed, Stream::solver);
    y = random_complex_vector(a.rows(), rng);
  }

  GenericResult res;
  for (long it = 1; it <= cfg.max_iterations; ++it) {
    const CVector p1 = a.range_projection(y);
    const CVector p2 = magnitude_projection_c(2.0 * p1 - y, target);
    const CVector step = cfg.beta * (p2 - p1);
    const double y_norm = y.norm();
    y += step;
    res.iterations = it;
    if (cfg.record_error_trace && reference) res.error_trace.push_back(phase_invariant_error(a.pseudo_inverse(y), *reference));
    if (step.norm() < cfg.tolerance * y_norm || y_norm == 0.0) {
      res.converged = y_norm > 0.0;
      break;
    }
  }
  res.estimate = a.pseudo_inverse(y);
  if (reference) res.error = phase_invariant_error(res.estimate, *reference);
  return res;
}

// ------------------------------------------------------------- experiments

Eigen::MatrixXd synthetic_image(std::size_t rows, std::size_t cols) {
  struct Blob {
    double x, y, sigma, height;
  };
  static const Blob blobs[] = {
      {0.30, 0.35, 0.12, 1.0}, {0.70, 0.30, 0.08, 0.7}, {0.55, 0.72, 0.15, 0.9}, {0.20, 0.80, 0.06, 0.5}};
  Eigen::MatrixXd img(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t s = 0; s < rows; ++s)
    for (std::size_t t = 0; t < cols; ++t) {
      const double u = (static_cast<double>(s) + 0.5) / static_cast<double>(rows);
      const double v = (static_cast<double>(t) + 0.5) / static_cast<double>(cols);
      double value = 0.1 + 0.2 * u;
      for (const Blob& b : blobs)
        value += b.height * std::exp(-((u - b.x) * (u - b.x) + (v - b.y) * (v - b.y)) / (2.0 * b.sigma * b.sigma));
      img(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = value;
    }
  return img;
}

Eigen::MatrixXd decoy_image(std::size_t rows, std::size_t cols) {
  Eigen::MatrixXd img(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t s = 0; s < rows; ++s)
    for (std::size_t t = 0; t < cols; ++t) {
      const double u = (static_cast<double>(s) + 0.5) / static_cast<double>(rows);
      const double v = (static_cast<double>(t) + 0.5) / static_cast<double>(cols);
      img(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) =
          0.5 + 0.3 * v + 0.8 * std::exp(-((u - 0.6) * (u - 0.6) + (v - 0.5) * (v - 0.5)) / 0.02) +
          0.4 * std::exp(-((u - 0.2) * (u - 0.2) + (v - 0.25) * (v - 0.25)) / 0.005);
    }
  return img;
}

namespace {

CVector flatten(const Eigen::MatrixXd& img) {
  const Eigen::Index m = img.rows(), n = img.cols();
  CVector v(m * n);
  for (Eigen::Index s = 0; s < m; ++s)
    for (Eigen::Index t = 0; t < n; ++t) v[s * n + t] = img(s, t);
  return v;
}

}  // namespace

CdpExperiment cdp_experiment(const Eigen::MatrixXd& image, std::size_t masks, const GenericConfig& cfg,
                             const Eigen::MatrixXd* initial) {
  if (masks < 1) throw InvalidArgument("cdp_experiment: need at least one mask");
  const std::size_t m = static_cast<std::size_t>(image.rows()), n = static_cast<std::size_t>(image.cols());
  if (initial && (initial->rows() != image.rows() || initial->cols() != image.cols()))
    throw InvalidArgument("cdp_experiment: initial image shape does not match");
  CdpSensing sensing(m, n, random_cdp_masks(m, n, masks, cfg.seed));
  const CVector rho0 = flatten(image);
  const CVector start = flatten(initial ? *initial : decoy_image(m, n));
  const Eigen::VectorXd target = sensing.apply(rho0).cwiseAbs();

  GenericConfig run = cfg;
  run.record_error_trace = true;
  CdpExperiment out;
  out.result = rrr_generic(sensing, target, run, &rho0, &start);

  const cdouble inner = out.result.estimate.dot(rho0);  // aligns the estimate to rho0
  const cdouble align = std::abs(inner) > 0.0 ? inner / std::abs(inner) : cdouble(1.0, 0.0);
  out.reconstruction.resize(image.rows(), image.cols());
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t t = 0; t < n; ++t)
      out.reconstruction(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) =
          (align * out.result.estimate[static_cast<Eigen::Index>(s * n + t)]).real();
  return out;
}

double GaussianCell::time_per_success() const {
  return successes > 0 ? total_seconds / successes : std::numeric_limits<double>::infinity();
}

GaussianCell gaussian_campaign_cell(std::size_t n, double ratio, int trials, std::uint64_t seed,
                                    const GenericConfig& cfg, double success_error, int jobs) {
  if (n == 0 || !(ratio >= 1.0) || trials < 1) throw InvalidArgument("gaussian campaign: need n >= 1, m/n >= 1, trials >= 1");
  const std::size_t m = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::vector<char> success(static_cast<std::size_t>(trials), 0);
  std::vector<double> seconds(static_cast<std::size_t>(trials), 0.0);
  std::atomic<int> next{0};

  auto worker = [&] {
    for (int t = next++; t < trials; t = next++) {
      const std::uint64_t trial_seed = derive_key(seed, Stream::campaign, {n, m, static_cast<std::uint64_t>(t)});
      CounterRng signal_rng(trial_seed, Stream::gaussian, {~std::uint64_t{0}});
      const CVector rho0 = random_complex_vector(n, signal_rng);
      const auto start = std::chrono::steady_clock::now();
      const DenseSensing sensing = gaussian_sensing(m, n, trial_seed);
      GenericConfig run = cfg;
      run.seed = trial_seed;
      run.record_error_trace = false;
      const GenericResult r = rrr_generic(sensing, sensing.apply(rho0).cwiseAbs(), run, &rho0);
      seconds[static_cast<std::size_t>(t)] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      success[static_cast<std::size_t>(t)] = *r.error < success_error;
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  GaussianCell cell;
  cell.ratio = ratio;
  cell.trials = trials;
  for (int t = 0; t < trials; ++t) {
    cell.successes += success[static_cast<std::size_t>(t)];
    cell.total_seconds += seconds[static_cast<std::size_t>(t)];
  }
  return cell;
}

}  // namespace phasebench
