#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace amc {

using cxd = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

// SNR convention: unit transmit power, snr = 1/sigma2_v.
inline double noise_var_for_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

// Wrap an angle into [-pi, pi).
inline double wrap_phase(double x) {
  double y = std::remainder(x, 2.0 * kPi);
  if (y >= kPi) y -= 2.0 * kPi;
  if (y < -kPi) y += 2.0 * kPi;
  return y;
}

}  // namespace amc
