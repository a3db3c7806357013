#pragma once

#include <cstddef>
#include <string>

namespace phasebench {

// Constant in mu = (N / 64.17)^2, the reference hardness axis for the
// benchmark filter.
inline constexpr double kReferenceMuScale = 64.17;

struct HardnessReport {
  int n = 0;
  double volume = 0.0;     // effective Fourier sample count V
  double mu = 0.0;         // N^2 / (V Z)
  double mu_paper = 0.0;   // (N / 64.17)^2
  int z = 1;               // point-group order
};

// V = sum over p,q in {-M/2, ..., M/2-1} of exp(-b (p^2 + q^2)).
double effective_volume(double b, std::size_t m);

// Autocorrelation sparsity with point-group rescaling: (N/Z)^2 / (V/Z).
double mu(double n, double volume, int z = 1);
double mu_paper_formula(double n);

// Integral approximation (6 pi / B)^{3/2} vol in three dimensions (b = B/6).
double wilson_volume_3d(double b_factor, double cell_volume);

HardnessReport hardness_report(int n, double filter_b, std::size_t m = 128, int z = 1);
std::string to_json(const HardnessReport& r);

}  // namespace phasebench
