#include "amc/channel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace amc {

const char* channel_model_name(ChannelModel m) {
  switch (m) {
    case ChannelModel::Ch1: return "ch1";
    case ChannelModel::Ch2: return "ch2";
    case ChannelModel::Ch3: return "ch3";
    default: return "custom";
  }
}

double ChannelRealization::energy() const {
  double e = 0.0;
  for (const auto& t : taps) e += std::norm(t);
  return e;
}

ChannelRealization sample_channel(ChannelModel model, Rng& rng) {
  ChannelRealization h;
  h.model_id = model;
  switch (model) {
    case ChannelModel::Ch1:
      h.taps = {cxd{1.0, 0.0}, 0.0, 0.0, 0.0};
      for (int q = 1; q < 4; ++q) h.taps[q] = std::sqrt(0.05) * rng.complex_normal();
      break;
    case ChannelModel::Ch2: {
      const double var[3] = {0.95, 0.28, 0.11};
      h.taps.resize(3);
      for (int q = 0; q < 3; ++q) h.taps[q] = std::sqrt(var[q]) * rng.complex_normal();
      break;
    }
    case ChannelModel::Ch3:
      h.taps = {cxd{1.0, 0.0}, cxd{0.0, 0.0}, cxd{0.9, 0.0}};
      break;
    default:
      throw std::invalid_argument("sample_channel: custom channels come from load_channel_file");
  }
  return h;
}

ChannelRealization load_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open channel file: " + path);
  ChannelRealization h;
  h.model_id = ChannelModel::Custom;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    double re, im;
    if (ls >> re >> im) h.taps.emplace_back(re, im);
  }
  if (h.taps.empty()) throw std::runtime_error("channel file has no taps: " + path);
  return h;
}

ReceivedBlock transmit(std::span<const cxd> s, const ChannelRealization& h, NoiseSpec noise, Rng& rng) {
  const int q_len = h.length();
  if (q_len < 1) throw std::invalid_argument("transmit: empty channel");
  if (noise.variance < 0.0) throw std::invalid_argument("transmit: negative noise variance");
  if (static_cast<int>(s.size()) < q_len)
    throw std::invalid_argument("transmit: need at least Q symbols");

  const std::size_t n_out = s.size() - static_cast<std::size_t>(q_len - 1);
  ReceivedBlock out;
  out.noise_variance = noise.variance;
  out.x_clean.resize(n_out);
  out.x.resize(n_out);

  for (std::size_t n = 0; n < n_out; ++n) {
    cxd acc{0.0, 0.0};
    for (int q = 0; q < q_len; ++q) acc += h.taps[q] * s[n + q_len - 1 - q];
    out.x_clean[n] = acc;
  }
  const double sigma = std::sqrt(noise.variance);
  for (std::size_t n = 0; n < n_out; ++n) out.x[n] = out.x_clean[n] + sigma * rng.complex_normal();
  return out;
}

Eigen::MatrixXcd toeplitz_channel_matrix(const ChannelRealization& h, int rows) {
  if (rows < 1) throw std::invalid_argument("toeplitz_channel_matrix: rows must be >= 1");
  const int q_len = h.length();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, rows + q_len - 1);
  for (int r = 0; r < rows; ++r)
    for (int q = 0; q < q_len; ++q) m(r, r + q) = h.taps[q];
  return m;
}

}  // namespace amc
