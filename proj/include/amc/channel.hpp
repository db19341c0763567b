#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "amc/rng.hpp"
#include "amc/types.hpp"

namespace amc {

enum class ChannelModel { Ch1, Ch2, Ch3, Custom };

const char* channel_model_name(ChannelModel m);

struct ChannelRealization {
  std::vector<cxd> taps;  // h(0)..h(Q-1)
  ChannelModel model_id = ChannelModel::Custom;

  int length() const { return static_cast<int>(taps.size()); }
  double energy() const;  // sum |h(q)|^2
};

// Known noise variance carried alongside every received block.
struct NoiseSpec {
  double variance = 0.0;  // total complex variance sigma2_v
};

// ch-1: Q=4, h(0)=1, h(1..3) ~ CN(0, 0.05)
// ch-2: Q=3, tap variances (0.95, 0.28, 0.11), EVA at symbol rate
// ch-3: constant taps [1, 0, 0.9]
ChannelRealization sample_channel(ChannelModel model, Rng& rng);

// Plain-text taps, one "re im" pair per line.
ChannelRealization load_channel_file(const std::string& path);

struct ReceivedBlock {
  std::vector<cxd> x;        // noisy received samples
  std::vector<cxd> x_clean;  // noise-free x'
  double noise_variance = 0.0;
};

// x(n) = sum_q h(q) s(n-q) + v(n), v ~ CN(0, sigma2_v), fully loaded:
// the first Q-1 entries of s act as the warm-up prefix, so the output has
// s.size() - (Q-1) samples. Noise variates are drawn even when variance is
// zero, keeping streams aligned across noise levels under one seed.
ReceivedBlock transmit(std::span<const cxd> s, const ChannelRealization& h, NoiseSpec noise, Rng& rng);

// Toeplitz channel matrix, rows x (rows+Q-1), first row [h(0)..h(Q-1) 0 ..];
// row r has h(q) at column r+q.
Eigen::MatrixXcd toeplitz_channel_matrix(const ChannelRealization& h, int rows);

}  // namespace amc
