#include "phasebench/hardness.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "phasebench/errors.hpp"

namespace phasebench {

double effective_volume(double b, std::size_t m) {
  if (!(b > 0.0)) throw InvalidArgument("effective_volume: b must be positive");
  // The 2-D sum factorizes into the square of a 1-D sum.
  const long half = static_cast<long>(m / 2);
  double line = 0.0;
  for (long p = -half; p < half; ++p) line += std::exp(-b * static_cast<double>(p * p));
  return line * line;
}

double mu(double n, double volume, int z) {
  if (!(n > 0.0) || !(volume > 0.0) || z <= 0) throw InvalidArgument("mu: N, V and Z must be positive");
  const double zn = static_cast<double>(z);
  return (n / zn) * (n / zn) / (volume / zn);
}

double mu_paper_formula(double n) { return (n / kReferenceMuScale) * (n / kReferenceMuScale); }

double wilson_volume_3d(double b_factor, double cell_volume) {
  if (!(b_factor > 0.0) || !(cell_volume > 0.0))
    throw InvalidArgument("wilson_volume_3d: B and cell volume must be positive");
  return std::pow(6.0 * std::numbers::pi / b_factor, 1.5) * cell_volume;
}

HardnessReport hardness_report(int n, double filter_b, std::size_t m, int z) {
  HardnessReport r;
  r.n = n;
  r.z = z;
  r.volume = effective_volume(filter_b, m);
  r.mu = mu(n, r.volume, z);
  r.mu_paper = mu_paper_formula(n);
  return r;
}

std::string to_json(const HardnessReport& r) {
  nlohmann::json j{{"N", r.n}, {"V", r.volume}, {"mu", r.mu}, {"mu_paper_formula", r.mu_paper}, {"Z", r.z}};
  return j.dump(2);
}

}  // namespace phasebench
