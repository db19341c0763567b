#include "amc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amc {

ClassificationResult rck_classify(std::span<const cxd> y_eq, FeatureKind kind, double gamma_hat,
                                  const TableSet& tables) {
  if (y_eq.size() < 50) throw std::invalid_argument("rck_classify: need at least 50 samples");
  if (tables.kind != kind) throw std::invalid_argument("rck_classify: table kind mismatch");

  const std::vector<double> feats = extract_feature(y_eq, kind);

  const double gamma = std::clamp(gamma_hat, kGammaFloor, kGammaCeil);
  const int si = tables.nearest_snr_index(lin_to_db(gamma));
  const auto& cdfs = tables.cdfs[si];
  const auto& tps = tables.testpoints[si];
  const int k_levels = static_cast<int>(tables.levels.size());

  ClassificationResult res;
  res.gamma_used_db = tables.grid.snr_at(si);
  res.low_confidence = gamma_hat <= kGammaFloor * (1.0 + 1e-9);
  res.distances.resize(k_levels);

  for (int li = 0; li < k_levels; ++li) {
    const int l = tables.levels[li];
    double d_pos = -2.0, d_neg = -2.0;
    for (int pi = 0; pi < k_levels; ++pi) {
      if (pi == li) continue;
      const int p = tables.levels[pi];
      const double t0 = tps.at(l, p, 0);
      const double t1 = tps.at(l, p, 1);
      d_pos = std::max(d_pos, ecdf_at(feats, t0) - cdfs[li].value_at(t0));
      d_neg = std::max(d_neg, cdfs[li].value_at(t1) - ecdf_at(feats, t1));
    }
    res.distances[li] = std::abs(d_pos + d_neg);
  }

  int best = 0;
  for (int li = 1; li < k_levels; ++li)
    if (res.distances[li] < res.distances[best]) best = li;  // ties keep the lower order
  res.chosen_level = tables.levels[best];
  return res;
}

namespace {

struct ComplexMoments {
  cxd m11, m22, m33;  // E|y|^2, E|y|^4, E|y|^6
  cxd m20, m02;       // E[y^2], E[y*^2]
  cxd m30, m03;       // E[y^3], E[y*^3]
  cxd m21, m12;       // E[y^2 y*], E[y y*^2]
  cxd m31, m13;       // E[y^3 y*], E[y y*^3]
};

// C63 from the zero-mean moment-to-cumulant expansion (all partitions of
// {y,y,y,y*,y*,y*} into blocks of size >= 2).
double c63_from_moments(const ComplexMoments& m) {
  const cxd c = m.m33 - 3.0 * m.m20 * m.m13 - 3.0 * m.m02 * m.m31 - 9.0 * m.m11 * m.m22 -
                m.m30 * m.m03 - 9.0 * m.m21 * m.m12 + 12.0 * m.m11 * m.m11 * m.m11 +
                18.0 * m.m20 * m.m02 * m.m11;
  return c.real();
}

template <typename Iter>
ComplexMoments accumulate_moments(Iter begin, Iter end, double scale) {
  ComplexMoments m{};
  std::size_t n = 0;
  for (Iter it = begin; it != end; ++it, ++n) {
    const cxd y = *it * scale;
    const cxd yc = std::conj(y);
    const cxd y2 = y * y;
    const cxd yc2 = yc * yc;
    const double p = std::norm(y);
    m.m11 += p;
    m.m22 += p * p;
    m.m33 += p * p * p;
    m.m20 += y2;
    m.m02 += yc2;
    m.m30 += y2 * y;
    m.m03 += yc2 * yc;
    m.m21 += y2 * yc;
    m.m12 += y * yc2;
    m.m31 += y2 * p;
    m.m13 += yc2 * p;
  }
  const double inv = 1.0 / static_cast<double>(n);
  m.m11 *= inv; m.m22 *= inv; m.m33 *= inv;
  m.m20 *= inv; m.m02 *= inv;
  m.m30 *= inv; m.m03 *= inv;
  m.m21 *= inv; m.m12 *= inv;
  m.m31 *= inv; m.m13 *= inv;
  return m;
}

}  // namespace

double cumulant_c63(std::span<const cxd> x) {
  if (x.size() < 1000) throw std::invalid_argument("cumulant_c63: need at least 1000 samples");
  double pow = 0.0;
  for (const auto& v : x) pow += std::norm(v);
  pow /= static_cast<double>(x.size());
  if (pow <= 0.0) throw std::invalid_argument("cumulant_c63: zero-power input");
  const ComplexMoments m = accumulate_moments(x.begin(), x.end(), 1.0 / std::sqrt(pow));
  return c63_from_moments(m);
}

double c63_theoretical(const Constellation& c) {
  const ComplexMoments m = accumulate_moments(c.points.begin(), c.points.end(), 1.0);
  return c63_from_moments(m);
}

ClassificationResult cumulant_classify(std::span<const cxd> x,
                                       const std::vector<Constellation>& levels) {
  if (levels.empty()) throw std::invalid_argument("cumulant_classify: no candidate levels");
  for (const auto& c : levels)
    if (c.mod_class == ModClass::Psk)
      throw std::invalid_argument("cumulant_classify: PSK levels unsupported (C63 cannot separate them)");

  const double est = cumulant_c63(x);
  ClassificationResult res;
  res.distances.resize(levels.size());
  int best = 0;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    res.distances[li] = std::abs(est - c63_theoretical(levels[li]));
    if (res.distances[li] < res.distances[best]) best = static_cast<int>(li);
  }
  res.chosen_level = levels[best].order;
  return res;
}

ClassificationResult zf_rck_classify(std::span<const cxd> x, const ChannelRealization& h,
                                     double noise_variance, const CmaConfig& cfg,
                                     const TableSet& tables, const ZfOptions& zf_opt) {
  ZfOptions opt = zf_opt;
  if (opt.fallback_len == 0) opt.fallback_len = cfg.length;
  const ZfEqualizer zf = zf_taps(h, opt);
  std::vector<cxd> y_raw = zf_equalize(x, zf, cfg.length);
  NormalizedRun run = normalize_equalized(std::move(y_raw), zf.energy(cfg.length), noise_variance);
  return rck_classify(run.y, tables.kind, run.gamma_hat, tables);
}

}  // namespace amc
