#pragma once

// Phase retrieval |y| = |A rho| without signal priors: dense complex Gaussian
// and coded-diffraction sensing, RRR on measurement space, and the
// global-phase-invariant error.
//
// CDP sensing uses the unnormalized DFT, y_l(p,q) = sum_st conj(d_l(s,t))
// rho(s,t) exp(-2 pi i (ps/M + qt/N)), unlike the unitary convention of the
// crystallographic code.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace phasebench {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

class Sensing {
 public:
  virtual ~Sensing() = default;
  virtual std::size_t rows() const = 0;  // m
  virtual std::size_t cols() const = 0;  // n
  virtual CVector apply(const CVector& x) const = 0;
  virtual CVector pseudo_inverse(const CVector& y) const = 0;  // (A*A)^-1 A* y
  // A A^+ y: orthogonal projection onto range(A).
  virtual CVector range_projection(const CVector& y) const { return apply(pseudo_inverse(y)); }
};

// Explicit matrix with a Householder QR computed once. Read-only after
// construction, so one instance may be shared across threads.
class DenseSensing final : public Sensing {
 public:
  // Throws RankDeficient when A does not have full column rank, and
  // InvalidArgument when m < n.
  explicit DenseSensing(CMatrix a);

  std::size_t rows() const override { return static_cast<std::size_t>(a_.rows()); }
  std::size_t cols() const override { return static_cast<std::size_t>(a_.cols()); }
  CVector apply(const CVector& x) const override;
  CVector pseudo_inverse(const CVector& y) const override;
  CVector range_projection(const CVector& y) const override;
  const CMatrix& matrix() const { return a_; }

 private:
  CMatrix a_;
  CMatrix q_;  // thin Q, m x n
  CMatrix r_;  // upper triangular, n x n
};

// Entries i.i.d. complex normal (variance 1/2 per component) from
// (seed, Stream::gaussian); redrawn with the next attempt index on the rare
// rank-deficient draw.
DenseSensing gaussian_sensing(std::size_t m, std::size_t n, std::uint64_t seed);

// L masks of M x N values in {1, -1, i, -i}. Owns FFT workspace, so an
// instance must not be used from two threads at once.
class CdpSensing final : public Sensing {
 public:
  CdpSensing(std::size_t image_rows, std::size_t image_cols, std::vector<CMatrix> masks);
  ~CdpSensing() override;
  CdpSensing(const CdpSensing&) = delete;
  CdpSensing& operator=(const CdpSensing&) = delete;

  std::size_t rows() const override { return masks_.size() * pixels(); }
  std::size_t cols() const override { return pixels(); }
  std::size_t image_rows() const { return m_; }
  std::size_t image_cols() const { return n_; }
  std::size_t mask_count() const { return masks_.size(); }
  const std::vector<CMatrix>& masks() const { return masks_; }

  // Vectors index pixels row-major (s*N + t) and measurements as
  // l*M*N + p*N + q.
  CVector apply(const CVector& x) const override;
  CVector adjoint(const CVector& y) const;  // A* y
  CVector pseudo_inverse(const CVector& y) const override;  // A* y / (M N L)

 private:
  std::size_t pixels() const { return m_ * n_; }
  struct Fft;
  std::size_t m_, n_;
  std::vector<CMatrix> masks_;
  std::unique_ptr<Fft> fft_;
};

std::vector<CMatrix> random_cdp_masks(std::size_t image_rows, std::size_t image_cols, std::size_t count,
                                      std::uint64_t seed);

// Dense matrix with the same action as `s` (for cross-checks on tiny images).
CMatrix materialize(const CdpSensing& s);

// |target_k| e^{i arg y_k}; where y_k == 0 the phase is taken as 0.
CVector magnitude_projection_c(const CVector& y, const Eigen::VectorXd& target);

// min over phi of ||rho - e^{i phi} rho0|| / ||rho0||. Throws ZeroReference
// when rho0 == 0.
double phase_invariant_error(const CVector& rho, const CVector& rho0);

struct GenericConfig {
  double beta = 0.5;
  double tolerance = 1e-8;
  long max_iterations = 10000;
  std::uint64_t seed = 0;
  bool record_error_trace = false;
};

struct GenericResult {
  CVector estimate;
  std::optional<double> error;  // present when a reference signal was given
  long iterations = 0;
  bool converged = false;
  std::vector<double> error_trace;  // error of A^+ y after each iteration
};

// y <- y + beta (P2(2 P1(y) - y) - P1(y)) with P1 = range projection and
// P2 = magnitude projection. y starts complex normal from cfg.seed, or at
// A * initial_signal when one is given.
GenericResult rrr_generic(const Sensing& a, const Eigen::VectorXd& target, const GenericConfig& cfg,
                          const CVector* reference = nullptr, const CVector* initial_signal = nullptr);

// 64x64 smooth nonnegative test image (sum of a few broad Gaussian blobs).
Eigen::MatrixXd synthetic_image(std::size_t rows = 64, std::size_t cols = 64);

// A different smooth image used as the starting signal, so the solver does not
// begin near the answer.
Eigen::MatrixXd decoy_image(std::size_t rows = 64, std::size_t cols = 64);

struct CdpExperiment {
  GenericResult result;
  Eigen::MatrixXd reconstruction;  // real part, after global-phase alignment
};

// Starts from `initial` (same shape as `image`), or from decoy_image() when null.
CdpExperiment cdp_experiment(const Eigen::MatrixXd& image, std::size_t masks, const GenericConfig& cfg,
                             const Eigen::MatrixXd* initial = nullptr);

struct GaussianCell {
  double ratio = 0.0;  // m / n
  int trials = 0;
  int successes = 0;
  double total_seconds = 0.0;
  double success_rate() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
  // Total time / successes; infinite when nothing succeeded.
  double time_per_success() const;
};

// Trial t draws its sensing matrix, signal and start from (seed, n, m, t).
GaussianCell gaussian_campaign_cell(std::size_t n, double ratio, int trials, std::uint64_t seed,
                                    const GenericConfig& cfg = {}, double success_error = 1e-7, int jobs = 1);

}  // namespace phasebench
