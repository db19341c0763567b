#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "amc/channel.hpp"
#include "amc/distributions.hpp"
#include "amc/equalizer.hpp"
#include "amc/signals.hpp"

namespace amc {

// sigma2_eps decomposition: EMSE + residual ISI + noise enhancement.
struct VarianceBreakdown {
  double emse = 0.0;
  double residual_isi = 0.0;
  double noise_enhancement = 0.0;
  double total = 0.0;
};

// mu (E|s|^6 - 2 E|s|^4 + E|s|^2) / (4 E|s|^2 - 2) * Tr(H H^H).
double emse_term(const Constellation& c, double mu, const Eigen::MatrixXcd& H);

// ||w'^H H'||^2 with w' the ZF taps beyond the first `length` and H' the
// (L_zf - L + 1) x (L_zf - L + Q) Toeplitz channel matrix.
double residual_isi_term(const ZfEqualizer& zf, int length, const ChannelRealization& h);

// sigma2_v e_D^H (H H^H)^-1 e_D via a linear solve.
double noise_enhancement_term(const Eigen::MatrixXcd& H, double noise_variance, int delay);

VarianceBreakdown error_variance(const Constellation& c, double mu, const ChannelRealization& h,
                                 int length, double noise_variance, const ZfOptions& zf_opt = {});

struct AnalyticPcResult {
  double pc = 0.0;
  std::vector<double> per_level;   // Pr(correct | level), levels order
  std::vector<double> sigma2_eps;  // model variance per level
};

// Semi-analytic P_c(h): per true level, gamma = 1/sigma2_eps parameterizes
// the s_k + eps model; correct-classification probability is estimated by
// running the rcK rule on synthetic batches, then weighted by the priors.
AnalyticPcResult analytic_pc(const ChannelRealization& h, const std::vector<Constellation>& levels,
                             double noise_variance, double mu, int length, const TableSet& tables,
                             std::span<const double> priors, int n_batches = 10000,
                             int batch_size = 200, std::uint64_t seed = 1, bool parallel = true,
                             const ZfOptions& zf_opt = {});

}  // namespace amc
