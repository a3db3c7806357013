#pragma once

// Benchmark instance construction: atoms on a 512x512 fine grid, intensity
// statistic tuning, band-limited Gaussian-filtered intensities on the 128x128
// coarse grid, Poisson photon counts, and the 128x64 half-table file format.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "phasebench/grid.hpp"

namespace phasebench {

inline constexpr int kFineGrid = 512;
inline constexpr std::size_t kCoarseGrid = 128;
inline constexpr int kMinAtomDistance = 12;  // fine-grid pixels, torus metric
inline constexpr int kMaxAtoms = 1200;
inline constexpr std::size_t kTableRows = 128;
inline constexpr std::size_t kTableColumns = 64;

// Photon budget per atom; see README ("Instance calibration").
inline constexpr double kDefaultPhotonsPerAtom = 10000.0;
// A move that crosses the tuning target is accepted only if it lands this close.
inline constexpr double kTuneOvershoot = 0.02;

// ln(25) / 64^2: intensities at |q| = 64 are attenuated 25-fold.
double default_filter_b();

enum class Grade { easy, medium, hard };

char grade_letter(Grade g);
Grade parse_grade(const std::string& s);  // "E", "M", "H" (case-insensitive)
double grade_target_i2(Grade g);          // 4.5, 4.0, 3.5

struct Atom {
  int x = 0;
  int y = 0;
  int weight = 1;
  bool operator==(const Atom&) const = default;
};

int torus_distance_sq(int x1, int y1, int x2, int y2);

class AtomSet {
 public:
  AtomSet() = default;
  // Throws InvalidArgument unless positions are on the fine grid, pairwise at
  // torus distance >= 12, and floor(N/2) atoms have weight 1, the rest 2.
  explicit AtomSet(std::vector<Atom> atoms);

  std::size_t count() const { return atoms_.size(); }
  std::span<const Atom> atoms() const { return atoms_; }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }
  bool operator==(const AtomSet&) const = default;

  // True when `a` could replace atom `skip` (or be added, skip = npos).
  bool placement_ok(int x, int y, std::size_t skip = static_cast<std::size_t>(-1)) const;

 private:
  std::vector<Atom> atoms_;
};

struct InstanceSpec {
  int n = 100;
  Grade grade = Grade::easy;
  std::uint64_t seed = 0;
  double photons_per_atom = kDefaultPhotonsPerAtom;
  double filter_b = default_filter_b();
};

class PhotonHalfTable {
 public:
  PhotonHalfTable();
  explicit PhotonHalfTable(std::vector<std::int64_t> counts);

  std::int64_t operator()(std::size_t p, std::size_t q) const { return counts_[p * kTableColumns + q]; }
  std::span<const std::int64_t> counts() const { return counts_; }
  std::int64_t total() const;  // sum of the stored entries
  // Photons over the full measured field: column 0 stores both members of
  // each Friedel pair, so it is counted once.
  std::int64_t field_total() const;
  bool operator==(const PhotonHalfTable&) const = default;

  // sqrt of the counts, mirrored over the full 128x128 plane; (0,0) unmeasured.
  MagnitudeField magnitudes() const;

 private:
  std::vector<std::int64_t> counts_;
};

struct GroundTruth {
  AtomSet atoms;
  // Band-limited signal in data units: its Fourier magnitudes are the
  // expected sqrt(photon counts) of the half table.
  RealGrid density;
  MagnitudeField true_magnitudes;
  double achieved_i2 = 0.0;
  double photon_scale = 0.0;  // c such that the mean count at (p,q) is c I(p,q)
};

struct Instance {
  InstanceSpec spec;
  PhotonHalfTable table;
  GroundTruth truth;
};

AtomSet sample_atoms(int n, std::uint64_t seed);

// Unfiltered structure factors sum_j w_j exp(-2 pi i (p x_j + q y_j)/512) on
// the 128x128 coarse frequency grid in DFT order; Nyquist lines are zero.
std::vector<cdouble> structure_factors(const AtomSet& atoms);

double gaussian_filter(long p, long q, double filter_b);

// Filtered noise-free intensities |F|^2 exp(-b (p^2 + q^2)) as a field whose
// values are intensities (not magnitudes).
MagnitudeField synthesize_intensities(const AtomSet& atoms, double filter_b);

// <I^2> / <I>^2.
double intensity_second_moment(std::span<const double> intensities);
// Over measured frequencies off the Nyquist lines, both Friedel members.
double intensity_second_moment(const MagnitudeField& intensities);

enum class TuneDirection { increase, decrease };

struct TuneResult {
  AtomSet atoms;
  double achieved_i2 = 0.0;
  long accepted_moves = 0;
  long proposals = 0;
};

// Greedy Monte Carlo on atom positions until i2 crosses `target`, landing within
// kTuneOvershoot of it.
TuneResult tune_i2(const AtomSet& atoms, double target, TuneDirection direction, double filter_b,
                   std::uint64_t seed);

struct PhotonSample {
  PhotonHalfTable table;
  double photon_scale = 0.0;
};

PhotonSample sample_photons(const MagnitudeField& intensities, double photons_per_atom, int n, std::uint64_t seed);

Instance generate(const InstanceSpec& spec);

// Power ratio of the ground-truth phases applied to the noisy data.
double ground_truth_ratio(const Instance& inst);

// ----------------------------------------------------------------- file I/O

std::string data_file_name(int n, Grade g);  // "data100E"
void write_table(std::ostream& out, const PhotonHalfTable& t);
void write_table_file(const std::string& path, const PhotonHalfTable& t);
// Any whitespace-separated block of exactly 128x64 nonnegative integers.
PhotonHalfTable read_table(std::istream& in);
PhotonHalfTable read_table_file(const std::string& path);

std::string manifest_json(const Instance& inst);
std::string atoms_json(const AtomSet& atoms);
AtomSet parse_atoms_json(const std::string& text);

struct Manifest {
  int n = 0;
  Grade grade = Grade::easy;
  std::uint64_t seed = 0;
  double photons_per_atom = 0.0;
  double filter_b = 0.0;
  double achieved_i2 = 0.0;
};
Manifest parse_manifest_json(const std::string& text);

}  // namespace phasebench
