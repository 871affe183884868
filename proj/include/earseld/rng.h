// earseld/rng.h
//
// Copyright 2026  EarSELD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef EARSELD_RNG_H_
#define EARSELD_RNG_H_

#include <cmath>
#include <cstdint>
#include <string>

namespace earseld {

// Deterministic RNG with hand-rolled distributions. std:: distributions are
// implementation-defined, so every draw here is specified exactly; identical
// seeds give identical streams on any platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {
    // splitmix warm-up so that small seeds diverge immediately.
    NextU64();
    NextU64();
  }

  uint64_t NextU64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). Modulo bias is below 1e-15 for any n we use.
  int64_t UniformInt(int64_t n) {
    return static_cast<int64_t>(NextU64() % static_cast<uint64_t>(n));
  }

  // Standard normal via Box-Muller, one cached value.
  double Normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = Uniform();
    double u2 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

// FNV-1a over a tag string and integer parts; used to derive independent
// per-purpose seeds (split, clip index, ...) from one master seed.
inline uint64_t DeriveSeed(uint64_t master, const std::string &tag,
                           uint64_t a = 0, uint64_t b = 0) {
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  mix(master);
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  mix(a);
  mix(b);
  return h;
}

}  // namespace earseld

#endif  // EARSELD_RNG_H_
