#include "amc/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/distributions/non_central_chi_squared.hpp>

namespace amc {

const char* feature_kind_name(FeatureKind k) {
  return k == FeatureKind::Magnitude ? "magnitude" : "phase-diff";
}

std::vector<double> extract_feature(std::span<const cxd> y, FeatureKind kind) {
  if (y.empty()) throw std::invalid_argument("extract_feature: empty input");
  std::vector<double> f;
  if (kind == FeatureKind::Magnitude) {
    f.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) f[i] = std::abs(y[i]);
  } else {
    if (y.size() < 2) throw std::invalid_argument("extract_feature: phase diff needs >= 2 samples");
    f.resize(y.size() - 1);
    for (std::size_t i = 1; i < y.size(); ++i) f[i - 1] = wrap_phase(std::arg(y[i]) - std::arg(y[i - 1]));
  }
  return f;
}

double ecdf_at(std::span<const double> samples, double t) {
  if (samples.empty()) throw std::invalid_argument("ecdf_at: empty sample set");
  std::size_t count = 0;
  for (double s : samples) count += (s <= t) ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(samples.size());
}

double FeatureCdfTable::value_at(double t) const {
  if (t <= grid.front()) return values.front();
  if (t >= grid.back()) return values.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - grid.begin());
  const double x0 = grid[j - 1], x1 = grid[j];
  const double w = (t - x0) / (x1 - x0);
  return values[j - 1] + w * (values[j] - values[j - 1]);
}

double magnitude_mixture_cdf(const Constellation& c, double sigma2_g, double tau) {
  if (tau <= 0.0) return 0.0;
  // Degenerate noise: step mixture at the alphabet magnitudes.
  if (sigma2_g < 1e-300) {
    std::size_t count = 0;
    for (const auto& p : c.points) count += (std::abs(p) <= tau) ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(c.points.size());
  }

  // |c_i + g| with per-dimension variance sigma2_g/2: scaled noncentral
  // chi-squared with 2 dof. Group points by squared magnitude.
  std::map<long long, int> radii;  // quantized |c|^2 -> multiplicity
  for (const auto& p : c.points) {
    const long long key = llround(std::norm(p) * 1e12);
    ++radii[key];
  }
  const double sd2 = sigma2_g / 2.0;
  const double x = tau * tau / sd2;
  double acc = 0.0;
  for (const auto& [key, mult] : radii) {
    const double lambda = (static_cast<double>(key) * 1e-12) / sd2;
    const boost::math::non_central_chi_squared dist(2.0, lambda);
    acc += mult * boost::math::cdf(dist, x);
  }
  return acc / static_cast<double>(c.points.size());
}

double phase_error_density(double gamma, double phi) {
  // p(phi) = e^-g / 2pi + (1/2) sqrt(g/pi) cos(phi) e^{-g sin^2 phi} (1 + erf(sqrt(g) cos(phi)))
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double base = std::exp(-gamma) / (2.0 * kPi);
  const double body =
      0.5 * std::sqrt(gamma / kPi) * c * std::exp(-gamma * s * s) * (1.0 + std::erf(std::sqrt(gamma) * c));
  return base + body;
}

namespace {

FeatureCdfTable magnitude_table(const Constellation& c, double snr_db, int grid_size, double grid_upper) {
  const double sigma2_g = db_to_lin(-snr_db);
  const double upper = grid_upper > 0.0 ? grid_upper : c.max_magnitude() + 5.0 * std::sqrt(sigma2_g);

  FeatureCdfTable t;
  t.level = c.order;
  t.snr_db = snr_db;
  t.kind = FeatureKind::Magnitude;
  t.method = "ncx2";
  t.grid.resize(grid_size);
  t.values.resize(grid_size);
  for (int j = 0; j < grid_size; ++j) {
    t.grid[j] = upper * static_cast<double>(j) / static_cast<double>(grid_size - 1);
    t.values[j] = magnitude_mixture_cdf(c, sigma2_g, t.grid[j]);
  }
  return t;
}

// Phase-difference CDF: the single-symbol phase-error density is correlated
// with itself (consecutive outputs use disjoint blocks, hence independent),
// then mixed over the uniform symbol-phase offsets 2 pi m / M.
FeatureCdfTable phase_diff_table(const Constellation& c, double snr_db, int grid_size) {
  const double gamma = db_to_lin(snr_db);
  const int n = 2 * grid_size;  // internal lattice
  const double step = 2.0 * kPi / n;

  std::vector<double> p(n);
  for (int k = 0; k < n; ++k) p[k] = phase_error_density(gamma, -kPi + (k + 0.5) * step);

  // f_D(d*step) for the difference of two independent phase errors; the
  // density is even in phi, so only half the lags are computed.
  std::vector<double> diff(n, 0.0);
  for (int d = 0; d <= n / 2; ++d) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const int j = k - d >= 0 ? k - d : k - d + n;
      acc += p[k] * p[j];
    }
    diff[d] = acc * step;
    if (d != 0 && d != n / 2) diff[n - d] = diff[d];
  }

  // Mix over symbol-phase offsets; n is a multiple of the PSK order.
  const int m_levels = c.order;
  const int shift = n / m_levels;
  std::vector<double> mix(n, 0.0);
  for (int m = 0; m < m_levels; ++m) {
    const int off = m * shift;
    for (int d = 0; d < n; ++d) {
      int j = d - off;
      if (j < 0) j += n;
      mix[d] += diff[j];
    }
  }
  for (auto& v : mix) v /= m_levels;

  // mix[d] is the density at wrapped lattice value d*step; reorder onto
  // [-pi, pi) and integrate (trapezoid over the circular lattice).
  std::vector<double> dens(n);
  for (int i = 0; i < n; ++i) {
    // value -pi + i*step  ==  wrap(d*step) with d = i - n/2 (mod n)
    int d = i - n / 2;
    if (d < 0) d += n;
    dens[i] = mix[d];
  }
  std::vector<double> cum(n, 0.0);
  for (int i = 1; i < n; ++i) cum[i] = cum[i - 1] + 0.5 * (dens[i - 1] + dens[i]) * step;
  const double total = cum[n - 1] + 0.5 * (dens[n - 1] + dens[0]) * step;
  for (auto& v : cum) v /= total;

  FeatureCdfTable t;
  t.level = c.order;
  t.snr_db = snr_db;
  t.kind = FeatureKind::PhaseDiff;
  t.method = "phase-conv";
  t.grid.resize(grid_size);
  t.values.resize(grid_size);
  for (int j = 0; j < grid_size; ++j) {
    t.grid[j] = -kPi + j * (2.0 * kPi / grid_size);
    t.values[j] = cum[2 * j];
  }
  return t;
}

void check_table(const FeatureCdfTable& t) {
  if (t.values.front() < -1e-12 || t.values.back() > 1.0 + 1e-12)
    throw std::logic_error("CDF table out of [0,1]");
  for (std::size_t j = 1; j < t.values.size(); ++j) {
    if (t.values[j] < t.values[j - 1] - 1e-12) throw std::logic_error("CDF table not monotone");
    if (t.grid[j] <= t.grid[j - 1]) throw std::logic_error("CDF grid not increasing");
  }
}

}  // namespace

FeatureCdfTable theoretical_cdf(const Constellation& c, double snr_db, FeatureKind kind,
                                int grid_size, double grid_upper) {
  if (grid_size < 256) throw std::invalid_argument("theoretical_cdf: grid_size must be >= 256");
  if (!std::isfinite(snr_db)) throw std::invalid_argument("theoretical_cdf: snr must be finite");
  FeatureCdfTable t = kind == FeatureKind::Magnitude ? magnitude_table(c, snr_db, grid_size, grid_upper)
                                                     : phase_diff_table(c, snr_db, grid_size);
  check_table(t);
  return t;
}

double TestpointTable::at(int level_l, int level_p, int delta) const {
  int l = level_l, p = level_p, d = delta;
  if (l > p) {
    std::swap(l, p);
    d = 1 - d;
  }
  for (const auto& e : entries)
    if (e.level_l == l && e.level_p == p && e.delta == d) return e.tau;
  throw std::invalid_argument("testpoint not found for level pair");
}

TestpointTable compute_testpoints(std::span<const FeatureCdfTable> tables) {
  if (tables.size() < 2) throw std::invalid_argument("compute_testpoints: need at least two levels");
  const auto& ref = tables.front();
  for (const auto& t : tables) {
    if (t.grid.size() != ref.grid.size() || t.kind != ref.kind || t.snr_db != ref.snr_db)
      throw std::invalid_argument("compute_testpoints: mismatched tables");
    for (std::size_t j = 0; j < t.grid.size(); ++j)
      if (std::abs(t.grid[j] - ref.grid[j]) > 1e-12)
        throw std::invalid_argument("compute_testpoints: mismatched grids");
  }

  TestpointTable out;
  out.snr_db = ref.snr_db;
  out.kind = ref.kind;
  for (const auto& t : tables) out.levels.push_back(t.level);

  const std::size_t n = ref.grid.size();
  for (std::size_t a = 0; a < tables.size(); ++a) {
    for (std::size_t b = a + 1; b < tables.size(); ++b) {
      std::size_t j_pos = 0, j_neg = 0;
      double best_pos = tables[a].values[0] - tables[b].values[0];
      double best_neg = -best_pos;
      for (std::size_t j = 1; j < n; ++j) {
        const double d = tables[a].values[j] - tables[b].values[j];
        if (d > best_pos) {
          best_pos = d;
          j_pos = j;
        }
        if (-d > best_neg) {
          best_neg = -d;
          j_neg = j;
        }
      }
      out.entries.push_back({tables[a].level, tables[b].level, 0, ref.grid[j_pos]});
      out.entries.push_back({tables[a].level, tables[b].level, 1, ref.grid[j_neg]});
    }
  }
  return out;
}

int TableGrid::size() const {
  return static_cast<int>(std::floor((snr_max_db - snr_min_db) / snr_step_db + 0.5)) + 1;
}

int TableSet::nearest_snr_index(double gamma_db) const {
  const double clamped = std::clamp(gamma_db, grid.snr_min_db, grid.snr_max_db);
  const int idx = static_cast<int>(std::lround((clamped - grid.snr_min_db) / grid.snr_step_db));
  return std::clamp(idx, 0, grid.size() - 1);
}

TableSet build_table_set(const std::vector<Constellation>& constellations, const TableGrid& grid,
                         bool parallel) {
  if (constellations.empty()) throw std::invalid_argument("build_table_set: no levels");
  const ModClass mod = constellations.front().mod_class;
  for (const auto& c : constellations)
    if (c.mod_class != mod) throw std::invalid_argument("build_table_set: mixed modulation classes");

  std::vector<Constellation> sorted = constellations;
  std::sort(sorted.begin(), sorted.end(),
            [](const Constellation& a, const Constellation& b) { return a.order < b.order; });

  TableSet set;
  set.mod_class = mod;
  set.kind = feature_kind_for(mod);
  set.grid = grid;
  for (const auto& c : sorted) set.levels.push_back(c.order);

  double max_mag = 0.0;
  for (const auto& c : sorted) max_mag = std::max(max_mag, c.max_magnitude());

  const int n_snr = grid.size();
  set.cdfs.resize(n_snr);
  set.testpoints.resize(n_snr);

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int si = 0; si < n_snr; ++si) {
    const double snr_db = grid.snr_at(si);
    const double upper = set.kind == FeatureKind::Magnitude
                             ? max_mag + 5.0 * std::sqrt(db_to_lin(-snr_db))
                             : 0.0;
    auto& tables = set.cdfs[si];
    tables.reserve(sorted.size());
    for (const auto& c : sorted)
      tables.push_back(theoretical_cdf(c, snr_db, set.kind, grid.grid_size, upper));
    set.testpoints[si] = compute_testpoints(tables);
  }
  return set;
}

}  // namespace amc
