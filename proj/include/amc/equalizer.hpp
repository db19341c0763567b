#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "amc/channel.hpp"
#include "amc/types.hpp"

namespace amc {

inline constexpr double kGammaFloor = 1e-3;   // ~-30 dB clamp on the SNR estimate
inline constexpr double kGammaCeil = 1e12;
inline constexpr double kTapNormLimit = 1e6;  // divergence guard on ||w||

struct CmaConfig {
  int length = 20;      // L
  double mu = 1e-4;     // step size
  int updates = 200;    // M tap updates (and equalized outputs)
  std::vector<cxd> w0;  // empty -> unit spike [1, 0, ..., 0]
};

class CmaDivergedError : public std::runtime_error {
 public:
  CmaDivergedError(int iteration, double norm);
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

struct EqualizerRun {
  std::vector<cxd> taps;   // w_M
  std::vector<cxd> y_eq;   // second-pass outputs w_M^H x_i, gain-normalized
  double gamma_hat = 0.0;  // clamped output-SNR estimate
  double gain = 1.0;       // divisor applied to the raw outputs
};

struct NormalizedRun {
  std::vector<cxd> y;
  double gamma_hat = 0.0;
  double gain = 1.0;
};

// gamma_hat = mean|y|^2 / (taps_energy * sigma2_v) - 1, clamped to
// [kGammaFloor, kGammaCeil]; y is rescaled to unit signal power by dividing
// out sqrt(mean|y|^2 - taps_energy * sigma2_v).
NormalizedRun normalize_equalized(std::vector<cxd> y_raw, double taps_energy, double noise_variance);

// Block-processing CMA with R = 1: for i = 1..M the input block is
// x_i = [x(iL-1), ..., x(iL-L)] (disjoint consecutive blocks), the update
// w_i = w_{i-1} - mu (|y(i)|^2 - 1) y*(i) x_i, then a second pass with the
// frozen taps produces y_eq(i) = w_M^H x_i over the same blocks.
// Throws CmaDivergedError when ||w_i|| exceeds kTapNormLimit.
EqualizerRun cma_run(std::span<const cxd> x, double noise_variance, const CmaConfig& cfg,
                     std::vector<double>* cost_trace = nullptr);

struct ZfOptions {
  double tolerance = 1e-4;        // trailing-tap energy ratio for auto length
  int max_len = 512;              // cap on L_zf
  std::optional<int> forced_len;  // pin L_zf exactly
  int fallback_len = 0;           // LS design length on fallback; 0 -> min(128, max_len)
};

struct ZfEqualizer {
  std::vector<cxd> taps;     // w_zf, applied as w^H on newest-first blocks
  int delay = 0;             // D: peak of the combined response w_zf^H H
  double phase = 0.0;        // theta = arg of the peak
  bool approximate = false;  // true when the least-squares fallback was used

  double energy(int first_n) const;  // sum |taps|^2 over the first n taps
};

// ZF inverse of the channel by power-series inversion of 1/H(z), truncated at
// the smallest length whose trailing-tap energy ratio drops below
// opt.tolerance (capped at opt.max_len, or pinned by opt.forced_len). When
// the series diverges (non-minimum-phase draw), falls back to the
// least-squares equalizer over all delays and marks the result approximate.
ZfEqualizer zf_taps(const ChannelRealization& h, const ZfOptions& opt = {});

// Block outputs w_zf^H x_i over the same blocking as cma_run, using the
// first `length` taps.
std::vector<cxd> zf_equalize(std::span<const cxd> x, const ZfEqualizer& zf, int length);

}  // namespace amc
