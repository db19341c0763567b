#pragma once

#include <string>
#include <vector>

#include "amc/rng.hpp"
#include "amc/types.hpp"

namespace amc {

enum class ModClass { Qam, Psk };

const char* mod_class_name(ModClass m);
ModClass mod_class_from_name(const std::string& name);

// Unit-power symbol alphabet with exact even-order moments.
//
// Moments are evaluated over the integer grid (QAM) or set to their exact
// values (PSK) rather than re-estimated from the scaled points; the EMSE
// expression is sensitive to them and its numerator must vanish exactly for
// constant-modulus alphabets.
struct Constellation {
  ModClass mod_class = ModClass::Qam;
  int order = 0;                // M_k
  std::vector<cxd> points;      // zero mean, E|c|^2 = 1
  double e2 = 1.0;              // E|s|^2
  double e4 = 1.0;              // E|s|^4
  double e6 = 1.0;              // E|s|^6

  double max_magnitude() const;
};

// Supported levels: QAM 4/16/64 (square Gray grids), PSK 2/4/8.
// Throws std::invalid_argument on any other (mod_class, order) pair.
Constellation build_constellation(ModClass mod_class, int order);

// n i.i.d. symbols drawn uniformly from c.points; deterministic per seed.
std::vector<cxd> draw_symbols(const Constellation& c, std::size_t n, Rng& rng);

}  // namespace amc
