#include <doctest.h>

#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "phasebench/errors.hpp"
#include "phasebench/projections.hpp"

using namespace phasebench;

namespace {

MagnitudeField magnitudes_of(const RealGrid& g) {
  const ComplexSpectrum s = forward_transform(g);
  std::vector<double> mags(s.coefficients().size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(s.coefficients()[i]);
  return MagnitudeField::symmetric_from(g.size(), mags);
}

}  // namespace

TEST_CASE("top-k selection by value") {
  std::vector<std::uint32_t> idx;
  const std::vector<double> v{3, 1, 2};
  select_top_values(v, 1, idx);
  CHECK(idx == std::vector<std::uint32_t>{0});
  select_top_values(v, 2, idx);
  CHECK(idx == std::vector<std::uint32_t>{0, 2});

  // Ties at the threshold keep the lower index.
  const std::vector<double> tie{5, 1, 2, 2, 2, 0};
  select_top_values(tie, 2, idx);
  CHECK(idx == std::vector<std::uint32_t>{0, 2});
  select_top_values(tie, 3, idx);
  CHECK(idx == std::vector<std::uint32_t>{0, 2, 3});

  // Value, not absolute value.
  const std::vector<double> neg{-9, 1, 0};
  select_top_values(neg, 1, idx);
  CHECK(idx == std::vector<std::uint32_t>{1});
}

TEST_CASE("support projection") {
  for (std::size_t m : {4, 8, 16}) {
    const RealGrid g = oracle::random_grid(m, m);
    for (std::size_t k : {std::size_t{1}, m, m * m / 3, m * m}) {
      const SupportProjection p = support_projection(g, k);
      CHECK(p.support.count() == k);
      CHECK(total_power(p.grid) <= total_power(g));
      // Idempotent, and the support never holds a value below an excluded one.
      const SupportProjection again = support_projection(p.grid, k);
      CHECK(oracle::max_abs_diff(again.grid.values(), p.grid.values()) == 0.0);
      double lowest_in = 1e300, highest_out = -1e300;
      for (std::size_t x = 0; x < m; ++x)
        for (std::size_t y = 0; y < m; ++y) {
          if (p.support.contains(x, y)) {
            lowest_in = std::min(lowest_in, g(x, y));
            CHECK(p.grid(x, y) == g(x, y));
          } else {
            highest_out = std::max(highest_out, g(x, y));
            CHECK(p.grid(x, y) == 0.0);
          }
        }
      if (k < m * m) CHECK(lowest_in >= highest_out);
    }
  }
  CHECK_THROWS_AS(support_projection(RealGrid(4), 17), InvalidArgument);

  // A kept negative pixel loses to the zeros on a second pass.
  RealGrid neg(4, std::vector<double>(16, -1.0));
  neg(0, 0) = 2.0;
  const RealGrid once = support_projection(neg, 2).grid;
  CHECK(once(0, 1) == -1.0);
  CHECK(support_projection(once, 2).grid(0, 1) == 0.0);
}

TEST_CASE("magnitude projection imposes the data and is idempotent") {
  for (std::size_t m : {4, 8, 16, 128}) {
    const int seeds = m == 128 ? 3 : 5;
    for (int seed = 0; seed < seeds; ++seed) {
      const MagnitudeField data = magnitudes_of(oracle::random_grid(m, 100 + seed));
      const RealGrid g = oracle::random_grid(m, 200 + seed);
      const RealGrid out = magnitude_projection(g, data);
      const ComplexSpectrum s = forward_transform(out);
      const ComplexSpectrum sg = forward_transform(g);
      double measured = 0.0;
      for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q) {
          if (data.measured(p, q)) {
            CHECK(std::abs(s(p, q)) == doctest::Approx(data.magnitude(p, q)).epsilon(1e-9));
            measured += std::norm(s(p, q));
          } else {
            CHECK(std::abs(s(p, q) - sg(p, q)) < 1e-10);  // (0,0) copied
          }
        }
      CHECK(measured == doctest::Approx(data.measured_power()).epsilon(1e-9));
      const RealGrid twice = magnitude_projection(out, data);
      CHECK(oracle::max_abs_diff(twice.values(), out.values()) < 1e-9 * oracle::max_abs(out.values()));
    }
  }
}

TEST_CASE("magnitude projection of zero gives the positive-phase synthesis") {
  const MagnitudeField data = magnitudes_of(oracle::random_grid(8, 5));
  const ComplexSpectrum s = forward_transform(magnitude_projection(RealGrid(8), data));
  for (std::size_t p = 0; p < 8; ++p)
    for (std::size_t q = 0; q < 8; ++q) {
      if (!data.measured(p, q)) continue;
      CHECK(std::abs(s(p, q)) == doctest::Approx(data.magnitude(p, q)));
      CHECK(std::abs(s(p, q).imag()) < 1e-12);
    }
  // Canonical half carries phase 0.
  CHECK(s(1, 1).real() > 0.0);
  CHECK(s(3, 0).real() > 0.0);
}

TEST_CASE("power ratio") {
  RealGrid uniform(8, std::vector<double>(64, 1.0));
  std::vector<std::uint32_t> half_pixels(32);
  for (std::uint32_t i = 0; i < 32; ++i) half_pixels[i] = i;
  CHECK(power_ratio(uniform, SupportSet(8, half_pixels)) == doctest::Approx(0.5));

  const SupportProjection p = support_projection(oracle::random_grid(8, 3), 10);
  CHECK(power_ratio(p.grid, p.support) == doctest::Approx(1.0));
  CHECK_THROWS_AS(power_ratio(RealGrid(8), p.support), ZeroPower);

  for (int seed = 0; seed < 20; ++seed) {
    const RealGrid g = oracle::random_grid(16, seed);
    const double r = power_ratio(g, support_projection(g, 40).support);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("support set validation") {
  CHECK_THROWS_AS(SupportSet(4, {1, 1}), InvalidArgument);
  CHECK_THROWS_AS(SupportSet(4, {16}), InvalidArgument);
  CHECK(SupportSet(4, {5, 2}).contains(1, 1));
}

TEST_CASE("phase wrapping lands in (-pi, pi]") {
  constexpr double pi = std::numbers::pi;
  CHECK(wrap_phase(pi) == doctest::Approx(pi));
  CHECK(wrap_phase(-pi) == doctest::Approx(pi));
  CHECK(wrap_phase(3 * pi) == doctest::Approx(pi));
  CHECK(wrap_phase(0.5 + 4 * pi) == doctest::Approx(0.5));
  for (double phi = -20; phi < 20; phi += 0.37) {
    const double w = wrap_phase(phi);
    CHECK(w > -pi);
    CHECK(w <= pi);
  }
}

TEST_CASE("phase solution synthesizes its source grid") {
  for (std::size_t m : {4, 8, 16, 128}) {
    RealGrid g = m == 128 ? oracle::band_limited_grid(m, 4) : oracle::random_grid(m, 4);
    for (double& v : g.values()) v += 10.0;  // positive DC
    const PhaseSolution sol = PhaseSolution::from_spectrum(forward_transform(g));
    const RealGrid back = sol.synthesize(magnitudes_of(g));
    CHECK(oracle::max_abs_diff(back.values(), g.values()) < 1e-10 * oracle::max_abs(g.values()));
  }
}

TEST_CASE("phase solution antisymmetry") {
  std::vector<double> phases(16, 0.0);
  phases[1 * 4 + 2] = 0.3;
  CHECK_THROWS_AS(PhaseSolution(4, 1.0, phases), AntisymmetryViolation);
  phases[3 * 4 + 2] = -0.3;
  CHECK_NOTHROW(PhaseSolution(4, 1.0, phases));
  phases[0] = 0.1;
  CHECK_THROWS_AS(PhaseSolution(4, 1.0, phases), AntisymmetryViolation);
  CHECK_THROWS_AS(PhaseSolution(4, 0.0, std::vector<double>(16, 0.0)), InvalidArgument);
}

TEST_CASE("solution files") {
  RealGrid g = oracle::random_grid(16, 8);
  for (double& v : g.values()) v += 5.0;
  const PhaseSolution sol = PhaseSolution::from_spectrum(forward_transform(g));

  std::stringstream buf;
  write_solution(buf, sol);
  const PhaseSolution back = read_solution(buf, 16);
  CHECK(back.dc_amplitude() == sol.dc_amplitude());
  for (std::size_t p = 0; p < 16; ++p)
    for (std::size_t q = 0; q < 16; ++q) {
      if (p == 8 || q == 8) continue;  // Nyquist phases are not stored
      CHECK(std::abs(wrap_phase(back.phase(p, q) - sol.phase(p, q))) < 1e-12);
    }

  std::istringstream missing("dc 1.0\n0 1 0.5\n");
  CHECK_THROWS_AS(read_solution(missing, 4), ParseError);
  std::istringstream header("phase 1.0\n");
  CHECK_THROWS_AS(read_solution(header, 4), ParseError);
  std::istringstream garbage("dc 1.0\n0 1 x\n");
  CHECK_THROWS_AS(read_solution(garbage, 4), ParseError);
  std::istringstream clash("dc 1.0\n0 1 0.5\n0 3 0.5\n1 0 0\n1 1 0\n2 1 0\n3 1 0\n");
  CHECK_THROWS_AS(read_solution(clash, 4), AntisymmetryViolation);
  std::istringstream both("dc 1.0\n0 1 0.5\n0 3 -0.5\n1 0 0\n1 1 0\n2 1 0\n3 1 0\n");
  CHECK(read_solution(both, 4).phase(0, 3) == doctest::Approx(-0.5));
}
