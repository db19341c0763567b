#include "amc/equalizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace amc {

CmaDivergedError::CmaDivergedError(int iteration, double norm)
    : std::runtime_error("CMA diverged at iteration " + std::to_string(iteration) +
                         " (||w|| = " + std::to_string(norm) + ")"),
      iteration_(iteration) {}

NormalizedRun normalize_equalized(std::vector<cxd> y_raw, double taps_energy, double noise_variance) {
  double mean_pow = 0.0;
  for (const auto& y : y_raw) mean_pow += std::norm(y);
  mean_pow /= static_cast<double>(y_raw.size());

  const double noise_out = taps_energy * noise_variance;
  double gamma = noise_out > 0.0 ? mean_pow / noise_out - 1.0 : kGammaCeil;
  gamma = std::clamp(gamma, kGammaFloor, kGammaCeil);

  NormalizedRun out;
  out.gamma_hat = gamma;
  out.gain = std::sqrt(std::max(mean_pow - noise_out, 1e-30));
  out.y = std::move(y_raw);
  for (auto& y : out.y) y /= out.gain;
  return out;
}

EqualizerRun cma_run(std::span<const cxd> x, double noise_variance, const CmaConfig& cfg,
                     std::vector<double>* cost_trace) {
  const int L = cfg.length;
  const int M = cfg.updates;
  if (L < 1 || M < 1 || cfg.mu <= 0.0) throw std::invalid_argument("cma_run: bad config");
  if (x.size() < static_cast<std::size_t>(M) * static_cast<std::size_t>(L))
    throw std::invalid_argument("cma_run: need at least M*L input samples");

  std::vector<cxd> w;
  if (cfg.w0.empty()) {
    w.assign(L, cxd{0.0, 0.0});
    w[0] = cxd{1.0, 0.0};
  } else {
    if (static_cast<int>(cfg.w0.size()) != L) throw std::invalid_argument("cma_run: w0 length != L");
    w = cfg.w0;
    double n0 = 0.0;
    for (const auto& c : w) n0 += std::norm(c);
    if (n0 == 0.0) throw std::invalid_argument("cma_run: w0 is all zero");
  }
  if (cost_trace) {
    cost_trace->clear();
    cost_trace->reserve(M);
  }

  // Adaptation pass; strictly sequential, each update depends on the last.
  for (int i = 1; i <= M; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * L - 1;
    cxd y{0.0, 0.0};
    for (int l = 0; l < L; ++l) y += std::conj(w[l]) * x[base - l];

    const double err = std::norm(y) - 1.0;
    if (cost_trace) cost_trace->push_back(err * err);
    const cxd step = cfg.mu * err * std::conj(y);
    double wnorm2 = 0.0;
    for (int l = 0; l < L; ++l) {
      w[l] -= step * x[base - l];
      wnorm2 += std::norm(w[l]);
    }
    if (wnorm2 > kTapNormLimit * kTapNormLimit) throw CmaDivergedError(i, std::sqrt(wnorm2));
  }

  // Re-equalize the same blocks with the frozen taps.
  std::vector<cxd> y_raw(M);
  for (int i = 1; i <= M; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * L - 1;
    cxd y{0.0, 0.0};
    for (int l = 0; l < L; ++l) y += std::conj(w[l]) * x[base - l];
    y_raw[i - 1] = y;
  }

  double wnorm2 = 0.0;
  for (const auto& c : w) wnorm2 += std::norm(c);
  NormalizedRun norm = normalize_equalized(std::move(y_raw), wnorm2, noise_variance);

  EqualizerRun run;
  run.taps = std::move(w);
  run.y_eq = std::move(norm.y);
  run.gamma_hat = norm.gamma_hat;
  run.gain = norm.gain;
  return run;
}

double ZfEqualizer::energy(int first_n) const {
  double e = 0.0;
  const int n = std::min<int>(first_n, static_cast<int>(taps.size()));
  for (int l = 0; l < n; ++l) e += std::norm(taps[l]);
  return e;
}

namespace {

// Combined response c(m) = sum_l conj(w(l)) h(m-l); its peak defines D, theta.
std::vector<cxd> combined_response(const std::vector<cxd>& taps, const ChannelRealization& h) {
  const int n = static_cast<int>(taps.size());
  const int q_len = h.length();
  std::vector<cxd> c(n + q_len - 1, cxd{0.0, 0.0});
  for (int l = 0; l < n; ++l)
    for (int q = 0; q < q_len; ++q) c[l + q] += std::conj(taps[l]) * h.taps[q];
  return c;
}

void set_delay_phase(ZfEqualizer& zf, const ChannelRealization& h) {
  const auto c = combined_response(zf.taps, h);
  int best = 0;
  double best_mag = 0.0;
  for (int m = 0; m < static_cast<int>(c.size()); ++m) {
    const double mag = std::abs(c[m]);
    if (mag > best_mag) {
      best_mag = mag;
      best = m;
    }
  }
  zf.delay = best;
  zf.phase = std::arg(c[best]);
}

// Length-`len` least-squares equalizer min_w ||w^H H - e_D|| over all delays.
ZfEqualizer least_squares_equalizer(const ChannelRealization& h, int len) {
  const Eigen::MatrixXcd H = toeplitz_channel_matrix(h, len);
  const Eigen::MatrixXcd gram = H * H.adjoint();
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("least_squares_equalizer: Gram factorization failed");

  // w_d = gram^-1 H e_d; residual 1 - Re(e_d^H H^H w_d) is minimized over d.
  const Eigen::MatrixXcd solved = ldlt.solve(H);
  int best_d = 0;
  double best_score = -1.0;
  for (int d = 0; d < H.cols(); ++d) {
    const double score = std::real(H.col(d).dot(solved.col(d)));
    if (score > best_score) {
      best_score = score;
      best_d = d;
    }
  }

  ZfEqualizer zf;
  zf.approximate = true;
  const Eigen::VectorXcd w = solved.col(best_d);
  zf.taps.assign(w.data(), w.data() + w.size());
  set_delay_phase(zf, h);
  return zf;
}

}  // namespace

ZfEqualizer zf_taps(const ChannelRealization& h, const ZfOptions& opt) {
  const int q_len = h.length();
  if (q_len < 1) throw std::invalid_argument("zf_taps: empty channel");
  const int fallback_len = opt.forced_len.value_or(
      opt.fallback_len > 0 ? opt.fallback_len : std::min(128, opt.max_len));

  const cxd h0 = h.taps[0];
  if (std::abs(h0) == 0.0) return least_squares_equalizer(h, fallback_len);

  const int horizon = opt.forced_len.value_or(opt.max_len);
  if (horizon < 1) throw std::invalid_argument("zf_taps: bad length");

  // Power-series inverse g of H(z): g(0) = 1/h(0),
  // g(n) = -(1/h(0)) sum_{q=1..min(n,Q-1)} h(q) g(n-q).
  std::vector<cxd> g(horizon);
  g[0] = cxd{1.0, 0.0} / h0;
  const double g0_mag = std::abs(g[0]);
  bool diverged = false;
  for (int n = 1; n < horizon; ++n) {
    cxd acc{0.0, 0.0};
    for (int q = 1; q < std::min(n + 1, q_len); ++q) acc += h.taps[q] * g[n - q];
    g[n] = -acc / h0;
    if (std::abs(g[n]) > 1e6 * std::max(1.0, g0_mag)) {
      diverged = true;
      break;
    }
  }
  if (!diverged && horizon >= 64) {
    // Growth across the horizon also signals a non-invertible channel.
    double head = 0.0, tail = 0.0;
    for (int n = 0; n < 32; ++n) head = std::max(head, std::abs(g[n]));
    for (int n = horizon - 32; n < horizon; ++n) tail = std::max(tail, std::abs(g[n]));
    if (tail > head) diverged = true;
  }
  if (diverged) return least_squares_equalizer(h, fallback_len);

  int l_zf = horizon;
  if (!opt.forced_len) {
    // Smallest length whose trailing energy ratio is below tolerance.
    std::vector<double> suffix(horizon + 1, 0.0);
    for (int n = horizon - 1; n >= 0; --n) suffix[n] = suffix[n + 1] + std::norm(g[n]);
    const double total = suffix[0];
    for (int n = 1; n <= horizon; ++n) {
      if (suffix[n] <= opt.tolerance * total) {
        l_zf = n;
        break;
      }
    }
  }

  ZfEqualizer zf;
  zf.taps.resize(l_zf);
  // Stored so that w^H applied to the received block deconvolves the channel.
  for (int n = 0; n < l_zf; ++n) zf.taps[n] = std::conj(g[n]);
  set_delay_phase(zf, h);
  return zf;
}

std::vector<cxd> zf_equalize(std::span<const cxd> x, const ZfEqualizer& zf, int length) {
  if (length < 1) throw std::invalid_argument("zf_equalize: bad length");
  const int l_use = std::min<int>(length, static_cast<int>(zf.taps.size()));
  const std::size_t blocks = x.size() / static_cast<std::size_t>(length);
  std::vector<cxd> y(blocks);
  for (std::size_t i = 1; i <= blocks; ++i) {
    const std::size_t base = i * static_cast<std::size_t>(length) - 1;
    cxd acc{0.0, 0.0};
    for (int l = 0; l < l_use; ++l) acc += std::conj(zf.taps[l]) * x[base - l];
    y[i - 1] = acc;
  }
  return y;
}

}  // namespace amc
