#include "amc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "amc/classifier.hpp"
#include "amc/rng.hpp"

namespace amc {

double emse_term(const Constellation& c, double mu, const Eigen::MatrixXcd& H) {
  const double numer = c.e6 - 2.0 * c.e4 + c.e2;
  const double denom = 4.0 * c.e2 - 2.0;
  return mu * numer / denom * H.squaredNorm();
}

double residual_isi_term(const ZfEqualizer& zf, int length, const ChannelRealization& h) {
  const int l_zf = static_cast<int>(zf.taps.size());
  if (length >= l_zf) return 0.0;  // nothing truncated

  const int rows = l_zf - length + 1;  // includes the implicit zero tap at index L_zf
  Eigen::VectorXcd w_tail = Eigen::VectorXcd::Zero(rows);
  for (int r = 0; r < l_zf - length; ++r) w_tail(r) = zf.taps[length + r];

  const Eigen::MatrixXcd h_tail = toeplitz_channel_matrix(h, rows);
  return (w_tail.adjoint() * h_tail).squaredNorm();
}

double noise_enhancement_term(const Eigen::MatrixXcd& H, double noise_variance, int delay) {
  const int rows = static_cast<int>(H.rows());
  if (delay < 0 || delay >= rows) throw std::invalid_argument("noise_enhancement_term: delay out of range");

  const Eigen::MatrixXcd gram = H * H.adjoint();
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(rows);
  e(delay) = cxd{1.0, 0.0};
  const Eigen::VectorXcd x = ldlt.solve(e);
  const double diag = std::real(x(delay));
  if (ldlt.info() != Eigen::Success || !std::isfinite(diag)) {
    const double cond = gram.norm() * x.norm();
    throw std::runtime_error("noise_enhancement_term: singular Gram matrix (cond ~ " +
                             std::to_string(cond) + ")");
  }
  return noise_variance * diag;
}

VarianceBreakdown error_variance(const Constellation& c, double mu, const ChannelRealization& h,
                                 int length, double noise_variance, const ZfOptions& zf_opt) {
  const ZfEqualizer zf = zf_taps(h, zf_opt);
  const Eigen::MatrixXcd H = toeplitz_channel_matrix(h, length);
  const int delay = std::min(zf.delay, length - 1);

  VarianceBreakdown vb;
  vb.emse = emse_term(c, mu, H);
  vb.residual_isi = residual_isi_term(zf, length, h);
  vb.noise_enhancement = noise_enhancement_term(H, noise_variance, delay);
  vb.total = vb.emse + vb.residual_isi + vb.noise_enhancement;
  return vb;
}

AnalyticPcResult analytic_pc(const ChannelRealization& h, const std::vector<Constellation>& levels,
                             double noise_variance, double mu, int length, const TableSet& tables,
                             std::span<const double> priors, int n_batches, int batch_size,
                             std::uint64_t seed, bool parallel, const ZfOptions& zf_opt) {
  if (levels.empty()) throw std::invalid_argument("analytic_pc: no levels");
  if (priors.size() != levels.size()) throw std::invalid_argument("analytic_pc: priors size mismatch");
  double prior_sum = 0.0;
  for (double p : priors) prior_sum += p;
  if (std::abs(prior_sum - 1.0) > 1e-9) throw std::invalid_argument("analytic_pc: priors must sum to 1");

  AnalyticPcResult res;
  res.per_level.resize(levels.size());
  res.sigma2_eps.resize(levels.size());

  for (std::size_t k = 0; k < levels.size(); ++k) {
    const VarianceBreakdown vb = error_variance(levels[k], mu, h, length, noise_variance, zf_opt);
    res.sigma2_eps[k] = vb.total;
    const double gamma = 1.0 / vb.total;
    const double sigma = std::sqrt(vb.total);
    const Constellation& c = levels[k];

    long correct = 0;
#pragma omp parallel for schedule(static) reduction(+ : correct) if (parallel)
    for (int b = 0; b < n_batches; ++b) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k) * n_batches + b));
      std::vector<cxd> y(batch_size);
      for (auto& v : y) v = c.points[rng.index(c.points.size())] + sigma * rng.complex_normal();
      const ClassificationResult r = rck_classify(y, tables.kind, gamma, tables);
      if (r.chosen_level == c.order) ++correct;
    }
    res.per_level[k] = static_cast<double>(correct) / static_cast<double>(n_batches);
  }

  for (std::size_t k = 0; k < levels.size(); ++k) res.pc += priors[k] * res.per_level[k];
  return res;
}

}  // namespace amc
