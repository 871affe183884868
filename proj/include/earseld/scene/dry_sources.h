// earseld/scene/dry_sources.h
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
//
// Procedural dry source bank: 12 sound event classes x 20 variations,
// synthesized from five timbre families (tonal, chirp, noise burst,
// amplitude-modulated, impact train) with class-specific frequency ranges.

#ifndef EARSELD_SCENE_DRY_SOURCES_H_
#define EARSELD_SCENE_DRY_SOURCES_H_

#include <cmath>
#include <vector>

#include "earseld/common.h"
#include "earseld/rng.h"

namespace earseld {

struct DrySource {
  int class_id = 0;      // [0, 12)
  int variation_id = 0;  // [0, 20)
  int sample_rate = kSampleRate;
  std::vector<float> samples;  // mono, peak-normalized

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

namespace dry_detail {

// Log-spaced base frequency so classes occupy distinct spectral regions.
inline double ClassBaseHz(int class_id) {
  return 200.0 * std::pow(6000.0 / 200.0, class_id / 11.0);
}

inline void ApplyAttackDecay(std::vector<float> *x, double attack_s,
                             double release_s, int fs) {
  const int64_t n = static_cast<int64_t>(x->size());
  const int64_t a = std::max<int64_t>(1, static_cast<int64_t>(attack_s * fs));
  const int64_t r = std::max<int64_t>(1, static_cast<int64_t>(release_s * fs));
  for (int64_t i = 0; i < n; ++i) {
    double g = 1.0;
    if (i < a) g = static_cast<double>(i) / a;
    if (n - 1 - i < r) g = std::min(g, static_cast<double>(n - 1 - i) / r);
    (*x)[i] = static_cast<float>((*x)[i] * g);
  }
}

inline void PeakNormalize(std::vector<float> *x) {
  float peak = 0;
  for (float v : *x) peak = std::max(peak, std::abs(v));
  if (peak > 0)
    for (float &v : *x) v /= peak;
}

}  // namespace dry_detail

// Deterministic given (master_seed, class, variation). Durations lie in
// [0.3 s, 4 s]; every sample is peak-normalized.
inline DrySource MakeDrySource(uint64_t master_seed, int class_id,
                               int variation_id, int fs = kSampleRate) {
  using namespace dry_detail;
  EARSELD_CHECK(class_id >= 0 && class_id < kNumClasses, ConfigError,
                "class_id out of range: " << class_id);
  EARSELD_CHECK(variation_id >= 0 && variation_id < kNumVariations,
                ConfigError, "variation_id out of range: " << variation_id);

  Rng rng(DeriveSeed(master_seed, "dry", class_id, variation_id));
  const double base = ClassBaseHz(class_id) * std::pow(2.0, rng.Uniform(-0.2, 0.2));
  const int family = class_id % 5;

  double dur;
  std::vector<float> x;
  switch (family) {
    case 0: {  // tonal: harmonic stack with vibrato
      dur = rng.Uniform(0.5, 2.5);
      const int64_t n = static_cast<int64_t>(dur * fs);
      x.assign(n, 0.0f);
      const int harmonics = 3 + static_cast<int>(rng.UniformInt(4));
      const double vib_hz = rng.Uniform(3.0, 7.0);
      const double vib_depth = rng.Uniform(0.0, 0.01);
      double phase[8] = {};
      for (int64_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / fs;
        double f0 = base * (1.0 + vib_depth * std::sin(2 * M_PI * vib_hz * t));
        double v = 0;
        for (int h = 1; h <= harmonics; ++h) {
          phase[h - 1] += 2 * M_PI * f0 * h / fs;
          v += std::sin(phase[h - 1]) / h;
        }
        x[i] = static_cast<float>(v);
      }
      ApplyAttackDecay(&x, 0.03, 0.15, fs);
      break;
    }
    case 1: {  // chirp: exponential sweep within the class band
      dur = rng.Uniform(0.4, 1.5);
      const int64_t n = static_cast<int64_t>(dur * fs);
      x.assign(n, 0.0f);
      double f_lo = base * 0.5, f_hi = base * rng.Uniform(2.0, 4.0);
      if (rng.Uniform() < 0.5) std::swap(f_lo, f_hi);
      const double lr = std::log(f_hi / f_lo);
      for (int64_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / fs;
        double ph = 2 * M_PI * f_lo * dur / lr * (std::exp(t / dur * lr) - 1.0);
        x[i] = static_cast<float>(std::sin(ph));
      }
      ApplyAttackDecay(&x, 0.02, 0.08, fs);
      break;
    }
    case 2: {  // band-limited noise burst
      dur = rng.Uniform(0.3, 1.2);
      const int64_t n = static_cast<int64_t>(dur * fs);
      x.assign(n, 0.0f);
      const double w0 = 2 * M_PI * std::min(base, fs * 0.45) / fs;
      const double q = rng.Uniform(2.0, 6.0);
      const double alpha = std::sin(w0) / (2 * q);
      const double a0 = 1 + alpha;
      double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
      for (int64_t i = 0; i < n; ++i) {
        double w = rng.Normal();
        double y = (alpha / a0) * (w - x2) - (-2 * std::cos(w0) / a0) * y1 -
                   ((1 - alpha) / a0) * y2;
        x2 = x1; x1 = w;
        y2 = y1; y1 = y;
        x[i] = static_cast<float>(y);
      }
      ApplyAttackDecay(&x, 0.01, 0.2, fs);
      break;
    }
    case 3: {  // amplitude-modulated tone
      dur = rng.Uniform(0.8, 3.0);
      const int64_t n = static_cast<int64_t>(dur * fs);
      x.assign(n, 0.0f);
      const double am_hz = rng.Uniform(4.0, 16.0);
      const double depth = rng.Uniform(0.5, 1.0);
      double phase = 0;
      for (int64_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / fs;
        phase += 2 * M_PI * base / fs;
        double am = 1.0 - depth * 0.5 * (1.0 - std::cos(2 * M_PI * am_hz * t));
        x[i] = static_cast<float>(am * std::sin(phase));
      }
      ApplyAttackDecay(&x, 0.05, 0.1, fs);
      break;
    }
    default: {  // impact train: decaying resonant hits
      dur = rng.Uniform(0.6, 2.5);
      const int64_t n = static_cast<int64_t>(dur * fs);
      x.assign(n, 0.0f);
      const double rate = rng.Uniform(2.0, 8.0);
      const double decay = rng.Uniform(20.0, 60.0);
      double t_hit = 0.0;
      while (t_hit < dur) {
        const int64_t start = static_cast<int64_t>(t_hit * fs);
        const double f = base * rng.Uniform(0.9, 1.1);
        for (int64_t i = start; i < n; ++i) {
          double dt = static_cast<double>(i - start) / fs;
          double v = std::exp(-decay * dt) * std::sin(2 * M_PI * f * dt);
          if (std::abs(v) < 1e-4 && dt > 0.05) break;
          x[i] += static_cast<float>(v);
        }
        t_hit += 1.0 / rate * rng.Uniform(0.7, 1.3);
      }
      break;
    }
  }
  PeakNormalize(&x);

  DrySource src;
  src.class_id = class_id;
  src.variation_id = variation_id;
  src.sample_rate = fs;
  src.samples = std::move(x);
  return src;
}

// Full 12 x 20 bank.
class DrySourceBank {
 public:
  explicit DrySourceBank(uint64_t master_seed, int fs = kSampleRate)
      : master_seed_(master_seed), fs_(fs) {
    sources_.resize(kNumClasses * kNumVariations);
  }

  const DrySource &Get(int class_id, int variation_id) {
    auto &slot = sources_[class_id * kNumVariations + variation_id];
    if (slot.samples.empty())
      slot = MakeDrySource(master_seed_, class_id, variation_id, fs_);
    return slot;
  }

 private:
  uint64_t master_seed_;
  int fs_;
  std::vector<DrySource> sources_;
};

}  // namespace earseld

#endif  // EARSELD_SCENE_DRY_SOURCES_H_
