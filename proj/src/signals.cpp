#include "amc/signals.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace amc {

const char* mod_class_name(ModClass m) { return m == ModClass::Qam ? "qam" : "psk"; }

ModClass mod_class_from_name(const std::string& name) {
  if (name == "qam" || name == "QAM") return ModClass::Qam;
  if (name == "psk" || name == "PSK") return ModClass::Psk;
  throw std::invalid_argument("unknown modulation class: " + name);
}

double Constellation::max_magnitude() const {
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, std::abs(p));
  return m;
}

namespace {

Constellation build_square_qam(int order) {
  int side = 0;
  while (side * side < order) ++side;
  if (side * side != order || side % 2 != 0)
    throw std::invalid_argument("unsupported QAM order " + std::to_string(order));

  // Odd-integer grid; exact integer moment sums before unit-power scaling.
  std::vector<std::pair<int, int>> coords;
  coords.reserve(order);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j)
      coords.emplace_back(2 * i - (side - 1), 2 * j - (side - 1));

  std::int64_t s2 = 0, s4 = 0, s6 = 0;
  for (auto [x, y] : coords) {
    const std::int64_t r2 = std::int64_t(x) * x + std::int64_t(y) * y;
    s2 += r2;
    s4 += r2 * r2;
    s6 += r2 * r2 * r2;
  }

  Constellation c;
  c.mod_class = ModClass::Qam;
  c.order = order;
  const double scale = std::sqrt(double(order) / double(s2));
  c.points.reserve(order);
  for (auto [x, y] : coords) c.points.emplace_back(x * scale, y * scale);
  c.e2 = 1.0;
  c.e4 = double(s4 * order) / (double(s2) * double(s2));
  c.e6 = double(s6 * order) * double(order) / (double(s2) * double(s2) * double(s2));
  return c;
}

Constellation build_psk(int order) {
  if (order != 2 && order != 4 && order != 8)
    throw std::invalid_argument("unsupported PSK order " + std::to_string(order));

  Constellation c;
  c.mod_class = ModClass::Psk;
  c.order = order;
  c.points.reserve(order);
  for (int m = 0; m < order; ++m) {
    const double th = 2.0 * kPi * m / order;
    double re = std::cos(th);
    double im = std::sin(th);
    // Snap axis points to their exact values.
    if (std::abs(re) < 1e-12) re = 0.0;
    if (std::abs(im) < 1e-12) im = 0.0;
    if (std::abs(re - 1.0) < 1e-12) re = 1.0;
    if (std::abs(re + 1.0) < 1e-12) re = -1.0;
    if (std::abs(im - 1.0) < 1e-12) im = 1.0;
    if (std::abs(im + 1.0) < 1e-12) im = -1.0;
    c.points.emplace_back(re, im);
  }
  c.e2 = c.e4 = c.e6 = 1.0;
  return c;
}

void check_invariants(const Constellation& c) {
  cxd mean{0.0, 0.0};
  double pow = 0.0;
  for (const auto& p : c.points) {
    mean += p;
    pow += std::norm(p);
  }
  mean /= double(c.points.size());
  pow /= double(c.points.size());
  if (std::abs(mean) > 1e-12) throw std::logic_error("constellation not zero mean");
  if (std::abs(pow - 1.0) > 1e-12) throw std::logic_error("constellation not unit power");
  if (c.mod_class == ModClass::Psk)
    for (const auto& p : c.points)
      if (std::abs(std::abs(p) - 1.0) > 1e-12) throw std::logic_error("PSK point off the unit circle");
}

}  // namespace

Constellation build_constellation(ModClass mod_class, int order) {
  Constellation c = mod_class == ModClass::Qam ? build_square_qam(order) : build_psk(order);
  check_invariants(c);
  return c;
}

std::vector<cxd> draw_symbols(const Constellation& c, std::size_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("draw_symbols: n must be >= 1");
  std::vector<cxd> out(n);
  const std::size_t m = c.points.size();
  for (auto& s : out) s = c.points[rng.index(m)];
  return out;
}

}  // namespace amc
