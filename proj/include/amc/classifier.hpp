#pragma once

#include <span>
#include <vector>

#include "amc/channel.hpp"
#include "amc/distributions.hpp"
#include "amc/equalizer.hpp"
#include "amc/signals.hpp"

namespace amc {

struct ClassificationResult {
  int chosen_level = 0;
  std::vector<double> distances;  // V_l (or cumulant distances) per candidate, levels order
  double gamma_used_db = 0.0;     // SNR grid point applied (rcK only)
  bool low_confidence = false;    // gamma_hat hit the clamp floor
};

// Reduced-complexity Kuiper rule: per candidate l,
//   D_l^(d) = max_{p != l} (-1)^d (F_emp(t_lp^(d)) - F0_l(t_lp^(d))),
//   V_l = |D_l^(0) + D_l^(1)|,
// decided at the SNR grid point nearest gamma_hat; ties toward lower order.
ClassificationResult rck_classify(std::span<const cxd> y_eq, FeatureKind kind, double gamma_hat,
                                  const TableSet& tables);

// Sixth-order three-conjugate cumulant of the power-normalized sequence
// (zero-mean moment expansion); returns the real part.
double cumulant_c63(std::span<const cxd> x);

// Same expansion over the exact alphabet.
double c63_theoretical(const Constellation& c);

// Nearest theoretical C63; QAM level sets only.
ClassificationResult cumulant_classify(std::span<const cxd> x,
                                       const std::vector<Constellation>& levels);

// Genie baseline: ZF-equalize with the true channel taps (first cfg.length
// taps), estimate gamma from the truncated taps, then apply the rcK rule.
ClassificationResult zf_rck_classify(std::span<const cxd> x, const ChannelRealization& h,
                                     double noise_variance, const CmaConfig& cfg,
                                     const TableSet& tables, const ZfOptions& zf_opt = {});

}  // namespace amc
