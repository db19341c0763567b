#pragma once

#include <span>
#include <string>
#include <vector>

#include "amc/signals.hpp"
#include "amc/types.hpp"

namespace amc {

enum class FeatureKind { Magnitude, PhaseDiff };

const char* feature_kind_name(FeatureKind k);

// Magnitude feature classifies QAM levels, phase difference classifies PSK.
inline FeatureKind feature_kind_for(ModClass m) {
  return m == ModClass::Qam ? FeatureKind::Magnitude : FeatureKind::PhaseDiff;
}

// Magnitude -> |y(i)|, length M; PhaseDiff -> consecutive phase differences
// wrapped into [-pi, pi), length M-1.
std::vector<double> extract_feature(std::span<const cxd> y, FeatureKind kind);

// ECDF value (1/M) sum 1{sample <= t}.
double ecdf_at(std::span<const double> samples, double t);

// Tabulated theoretical CDF of the feature of s_l + g, g ~ CN(0, sigma2_g).
struct FeatureCdfTable {
  int level = 0;
  double snr_db = 0.0;
  FeatureKind kind = FeatureKind::Magnitude;
  std::string method;          // "ncx2" or "phase-conv"
  std::vector<double> grid;    // strictly increasing
  std::vector<double> values;  // nondecreasing, within [0,1]

  // Linear interpolation on the grid, clamped at the ends.
  double value_at(double t) const;
};

// Mixture CDF of |c_i + g| over the alphabet, evaluated through the
// noncentral chi-squared distribution; sigma2_g is the total complex noise
// variance.
double magnitude_mixture_cdf(const Constellation& c, double sigma2_g, double tau);

// Density of arg(1 + g) at phi for g ~ CN(0, 1/gamma).
double phase_error_density(double gamma, double phi);

// Build one CDF table at an SNR grid point. For Magnitude the grid spans
// [0, grid_upper] (0 -> max|c_i| + 5 sigma_g of this constellation); for
// PhaseDiff it spans [-pi, pi).
FeatureCdfTable theoretical_cdf(const Constellation& c, double snr_db, FeatureKind kind,
                                int grid_size = 4096, double grid_upper = 0.0);

struct Testpoint {
  int level_l = 0;
  int level_p = 0;
  int delta = 0;  // 0: positive deviation, 1: negative
  double tau = 0.0;
};

// Testpoints t_lp^(delta) = argmax_tau (-1)^delta (F0_l - F0_p); ties go to
// the smallest grid tau. Entries are stored once per unordered pair
// (l < p, both deltas): 2 * C(K,2) per SNR point.
struct TestpointTable {
  double snr_db = 0.0;
  FeatureKind kind = FeatureKind::Magnitude;
  std::vector<int> levels;
  std::vector<Testpoint> entries;

  double at(int level_l, int level_p, int delta) const;
};

// All tables must share one grid and SNR point.
TestpointTable compute_testpoints(std::span<const FeatureCdfTable> tables);

struct TableGrid {
  double snr_min_db = -5.0;
  double snr_max_db = 25.0;
  double snr_step_db = 1.0;
  int grid_size = 4096;

  int size() const;
  double snr_at(int idx) const { return snr_min_db + idx * snr_step_db; }
};

// Offline tables for one candidate level set over the SNR grid. Tables at a
// given SNR share a common feature grid so that testpoints line up.
struct TableSet {
  ModClass mod_class = ModClass::Qam;
  FeatureKind kind = FeatureKind::Magnitude;
  std::vector<int> levels;  // ascending
  TableGrid grid;
  std::vector<std::vector<FeatureCdfTable>> cdfs;  // [snr][level]
  std::vector<TestpointTable> testpoints;          // [snr]

  int nearest_snr_index(double gamma_db) const;
};

TableSet build_table_set(const std::vector<Constellation>& constellations,
                         const TableGrid& grid = {}, bool parallel = true);

}  // namespace amc
