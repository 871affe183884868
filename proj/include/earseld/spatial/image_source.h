// earseld/spatial/image_source.h
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

#ifndef EARSELD_SPATIAL_IMAGE_SOURCE_H_
#define EARSELD_SPATIAL_IMAGE_SOURCE_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "earseld/common.h"
#include "earseld/geometry.h"
#include "earseld/io/wav.h"
#include "earseld/spatial/foa.h"

namespace earseld {

struct EnvironmentSpec {
  std::string env_id;
  bool is_anechoic = false;
  Vec3 room_dims = {0, 0, 0};             // meters; unused when anechoic
  std::array<double, 6> absorption = {};  // walls x0,x1,y0,y1,z0,z1 in (0,1]
  Vec3 mic_position = {0, 0, 0};
  uint64_t noise_seed = 0;

  void Validate() const {
    if (is_anechoic) return;
    for (int i = 0; i < 3; ++i) {
      EARSELD_CHECK(room_dims[i] > 1.0, ConfigError,
                    env_id << ": room dimension " << i << " must exceed 1 m");
      EARSELD_CHECK(mic_position[i] >= 0.3 &&
                        mic_position[i] <= room_dims[i] - 0.3,
                    ConfigError,
                    env_id << ": mic closer than 0.3 m to a wall");
    }
    for (double a : absorption)
      EARSELD_CHECK(a > 0.0 && a <= 1.0, ConfigError,
                    env_id << ": absorption must lie in (0, 1]");
  }
};

struct SourcePlacement {
  double azimuth_deg = 0;    // [-180, 180)
  double elevation_deg = 0;  // [-90, 90)
  int distance_cm = 150;     // {75, 150}

  double distance_m() const { return distance_cm / 100.0; }
  Vec3 unit_direction() const {
    return UnitVectorFromAngles(azimuth_deg, elevation_deg);
  }
};

struct ImpulseResponse {
  AudioBuffer audio;  // 4 channels, ACN (W, Y, Z, X)
  SourcePlacement placement;
  std::string env_id;
};

// One wavefront of the image-source expansion.
struct ImageArrival {
  double delay_samples;
  double amplitude;  // reflection product / distance
  Vec3 direction;    // unit vector, mic -> image
  int order;
};

namespace ism_detail {

// Per-axis image coordinate and reflection bookkeeping for integer index
// (n, q): position (1-2q)*src + 2n*L, order |2n - q|, hitting wall-0
// |n - q| times and wall-1 |n| times (Allen-Berkley expansion).
struct AxisImage {
  double coord;
  int order;
  double refl;
};

inline double WindowedSinc(double t, int taps) {
  // Hann-windowed full-band sinc over [-taps/2, taps/2].
  double half = taps / 2.0;
  if (t <= -half || t >= half) return 0.0;
  double w = 0.5 * (1.0 + std::cos(M_PI * t / half));
  double s = (t == 0.0) ? 1.0 : std::sin(M_PI * t) / (M_PI * t);
  return w * s;
}

}  // namespace ism_detail

// Enumerates all image sources up to max_order (sum of per-axis reflection
// counts). Anechoic environments emit only the direct path.
inline std::vector<ImageArrival> EnumerateImageSources(
    const EnvironmentSpec &env, const SourcePlacement &placement,
    int max_order, int sample_rate = kSampleRate) {
  env.Validate();
  EARSELD_CHECK(max_order >= 0, ConfigError, "max_order must be >= 0");

  const Vec3 dir = placement.unit_direction();
  const double dist = placement.distance_m();
  EARSELD_CHECK(dist > 1e-6, GeometryError, "source coincides with mic");

  std::vector<ImageArrival> arrivals;
  if (env.is_anechoic) {
    arrivals.push_back({dist / kSpeedOfSound * sample_rate, 1.0 / dist, dir,
                        0});
    return arrivals;
  }

  Vec3 src;
  for (int i = 0; i < 3; ++i) {
    src[i] = env.mic_position[i] + dist * dir[i];
    EARSELD_CHECK(src[i] > 0.0 && src[i] < env.room_dims[i], GeometryError,
                  env.env_id << ": source outside room on axis " << i);
  }

  // Reflection coefficients: sqrt(1 - absorption) per wall.
  std::array<double, 6> beta;
  for (int i = 0; i < 6; ++i) beta[i] = std::sqrt(1.0 - env.absorption[i]);

  std::array<std::vector<ism_detail::AxisImage>, 3> axis_images;
  for (int axis = 0; axis < 3; ++axis) {
    const double L = env.room_dims[axis];
    const double s = src[axis];
    const int n_max = max_order / 2 + 1;
    for (int n = -n_max; n <= n_max; ++n) {
      for (int q = 0; q <= 1; ++q) {
        int order = std::abs(2 * n - q);
        if (order > max_order) continue;
        double coord = (1 - 2 * q) * s + 2.0 * n * L;
        double refl = std::pow(beta[2 * axis], std::abs(n - q)) *
                      std::pow(beta[2 * axis + 1], std::abs(n));
        axis_images[axis].push_back({coord, order, refl});
      }
    }
  }

  for (const auto &ix : axis_images[0]) {
    for (const auto &iy : axis_images[1]) {
      if (ix.order + iy.order > max_order) continue;
      for (const auto &iz : axis_images[2]) {
        int order = ix.order + iy.order + iz.order;
        if (order > max_order) continue;
        Vec3 rel = {ix.coord - env.mic_position[0],
                    iy.coord - env.mic_position[1],
                    iz.coord - env.mic_position[2]};
        double d = Norm(rel);
        if (d < 1e-9) continue;
        Vec3 u = {rel[0] / d, rel[1] / d, rel[2] / d};
        double refl = ix.refl * iy.refl * iz.refl;
        if (refl == 0.0 && order > 0) continue;
        arrivals.push_back(
            {d / kSpeedOfSound * sample_rate, refl / d, u, order});
      }
    }
  }
  std::sort(arrivals.begin(), arrivals.end(),
            [](const ImageArrival &a, const ImageArrival &b) {
              return a.delay_samples < b.delay_samples;
            });
  return arrivals;
}

// Synthesizes a 4-channel FOA impulse response with the image-source model.
// Fractional delays use a 64-tap Hann-windowed sinc.
inline ImpulseResponse SimulateIr(const EnvironmentSpec &env,
                                  const SourcePlacement &placement,
                                  int max_order,
                                  int sample_rate = kSampleRate) {
  constexpr int kSincTaps = 64;
  auto arrivals = EnumerateImageSources(env, placement, max_order,
                                        sample_rate);

  double max_delay = 0;
  for (const auto &a : arrivals) max_delay = std::max(max_delay, a.delay_samples);
  int64_t length = static_cast<int64_t>(std::ceil(max_delay)) + kSincTaps;

  ImpulseResponse ir;
  ir.placement = placement;
  ir.env_id = env.env_id;
  ir.audio.sample_rate = sample_rate;
  ir.audio.channels.assign(4, std::vector<float>(length, 0.0f));

  std::vector<std::vector<double>> acc(4, std::vector<double>(length, 0.0));
  for (const auto &a : arrivals) {
    const auto gains = FoaGains(a.direction);
    const int64_t center = static_cast<int64_t>(std::llround(a.delay_samples));
    for (int64_t n = center - kSincTaps / 2; n <= center + kSincTaps / 2;
         ++n) {
      if (n < 0 || n >= length) continue;
      double v = a.amplitude *
                 ism_detail::WindowedSinc(static_cast<double>(n) -
                                              a.delay_samples,
                                          kSincTaps);
      if (v == 0.0) continue;
      for (int c = 0; c < 4; ++c) acc[c][n] += gains[c] * v;
    }
  }
  for (int c = 0; c < 4; ++c)
    for (int64_t n = 0; n < length; ++n)
      ir.audio.channels[c][n] = static_cast<float>(acc[c][n]);
  return ir;
}

}  // namespace earseld

#endif  // EARSELD_SPATIAL_IMAGE_SOURCE_H_
