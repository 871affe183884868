// earseld/scene/synthesize.h
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
// Polyphonic scene and echo clip synthesis: dry sources convolved with FOA
// impulse responses, placed on a timeline with polyphony <= 2, mixed with
// diffuse noise at a requested clip-wise SNR.

#ifndef EARSELD_SCENE_SYNTHESIZE_H_
#define EARSELD_SCENE_SYNTHESIZE_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "earseld/common.h"
#include "earseld/features/fft.h"
#include "earseld/rng.h"
#include "earseld/scene/dry_sources.h"
#include "earseld/scene/labels.h"
#include "earseld/spatial/image_source.h"

namespace earseld {

struct EventInstance {
  int class_id = 0;
  int variation_id = 0;
  double onset_s = 0;
  double offset_s = 0;
  SourcePlacement placement;
  std::string env_id;
};

struct SceneClip {
  AudioBuffer audio;
  std::vector<EventInstance> events;
  double snr_db = kSnrClean;
  std::string split_name;
};

struct EchoClip {
  AudioBuffer audio;
  std::string env_id;
  double snr_db = kSnrClean;
};

// Keyed IR lookup for one environment.
class IrSet {
 public:
  void Add(const ImpulseResponse &ir) { irs_[Key(ir.placement)] = &ir; }

  const ImpulseResponse &Get(const SourcePlacement &p) const {
    auto it = irs_.find(Key(p));
    EARSELD_CHECK(it != irs_.end(), MissingIRError,
                  "no IR for az " << p.azimuth_deg << " el " << p.elevation_deg
                                  << " d " << p.distance_cm);
    return *it->second;
  }

  bool Has(const SourcePlacement &p) const { return irs_.count(Key(p)) > 0; }

 private:
  static std::string Key(const SourcePlacement &p) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f/%.3f/%d", p.azimuth_deg,
                  p.elevation_deg, p.distance_cm);
    return buf;
  }
  std::map<std::string, const ImpulseResponse *> irs_;
};

namespace scene_detail {

// Maximum number of simultaneously active events if `candidate` is added.
inline int MaxPolyphonyWith(const std::vector<EventInstance> &accepted,
                            double onset, double offset) {
  std::vector<std::pair<double, int>> edges;
  edges.emplace_back(onset, +1);
  edges.emplace_back(offset, -1);
  for (const auto &e : accepted) {
    if (e.offset_s <= onset || e.onset_s >= offset) continue;
    edges.emplace_back(std::max(e.onset_s, onset), +1);
    edges.emplace_back(std::min(e.offset_s, offset), -1);
  }
  std::sort(edges.begin(), edges.end());
  int live = 0, peak = 0;
  for (auto &[t, d] : edges) {
    live += d;
    peak = std::max(peak, live);
  }
  return peak;
}

inline double EnergyW(const AudioBuffer &audio) {
  double e = 0;
  for (float v : audio.channels[kW]) e += static_cast<double>(v) * v;
  return e;
}

}  // namespace scene_detail

// Rasterizes events into 100 ms label frames. An event is active in a frame
// when it covers at least half of it.
inline SELDReference RasterizeEvents(const std::vector<EventInstance> &events,
                                     double clip_len_s) {
  SELDReference ref;
  const int64_t n_frames = static_cast<int64_t>(std::llround(clip_len_s / kLabelFrameSec));
  ref.frames.resize(n_frames);
  for (const auto &e : events) {
    for (int64_t t = 0; t < n_frames; ++t) {
      double f0 = t * kLabelFrameSec, f1 = f0 + kLabelFrameSec;
      double overlap = std::min(e.offset_s, f1) - std::max(e.onset_s, f0);
      if (overlap >= 0.5 * kLabelFrameSec)
        ref.frames[t].push_back(
            {e.class_id, e.placement.azimuth_deg, e.placement.elevation_deg});
    }
  }
  return ref;
}

// Mixes events (dry sources convolved with their placement IR) with noise
// scaled so the clip-wise event-to-noise energy ratio on W equals snr_db.
// With no events the noise passes through unscaled and snr_db is ignored.
inline std::pair<SceneClip, SELDReference> SynthesizeScene(
    const std::vector<EventInstance> &events, const IrSet &irs,
    DrySourceBank &dry_bank, const AudioBuffer &noise, double snr_db,
    double clip_len_s = 20.0, int fs = kSampleRate) {
  const int64_t n = static_cast<int64_t>(std::llround(clip_len_s * fs));

  SceneClip clip;
  clip.snr_db = snr_db;
  clip.events = events;
  clip.audio.sample_rate = fs;
  clip.audio.channels.assign(4, std::vector<float>(n, 0.0f));

  for (const auto &e : events)
    EARSELD_CHECK(e.onset_s >= 0 && e.onset_s < e.offset_s &&
                      e.offset_s <= clip_len_s + 1e-9,
                  PolyphonyError, "event interval out of clip bounds");
  for (size_t i = 0; i < events.size(); ++i) {
    std::vector<EventInstance> others(events.begin(), events.begin() + i);
    if (scene_detail::MaxPolyphonyWith(others, events[i].onset_s,
                                       events[i].offset_s) > 2)
      throw PolyphonyError("more than 2 events active at once");
  }

  for (const auto &e : events) {
    const ImpulseResponse &ir = irs.Get(e.placement);
    const DrySource &dry = dry_bank.Get(e.class_id, e.variation_id);
    const int64_t start = static_cast<int64_t>(std::llround(e.onset_s * fs));
    for (int c = 0; c < 4; ++c) {
      auto conv = FftConvolve(dry.samples, ir.audio.channels[c]);
      const int64_t len = std::min<int64_t>(conv.size(), n - start);
      float *dst = clip.audio.channels[c].data() + start;
      for (int64_t k = 0; k < len; ++k) dst[k] += conv[k];
    }
  }

  SELDReference ref = RasterizeEvents(events, clip_len_s);

  if (!IsClean(snr_db) && !events.empty()) {
    EARSELD_CHECK(noise.num_samples() >= n, LengthMismatch,
                  "noise shorter than clip");
    const double e_sig = scene_detail::EnergyW(clip.audio);
    double e_noise = 0;
    for (int64_t t = 0; t < n; ++t)
      e_noise += static_cast<double>(noise.channels[kW][t]) * noise.channels[kW][t];
    if (e_noise > 0 && e_sig > 0) {
      const double scale =
          std::sqrt(e_sig / (e_noise * std::pow(10.0, snr_db / 10.0)));
      for (int c = 0; c < 4; ++c)
        for (int64_t t = 0; t < n; ++t)
          clip.audio.channels[c][t] += static_cast<float>(scale) * noise.channels[c][t];
    }
  } else if (!IsClean(snr_db) && events.empty()) {
    for (int c = 0; c < 4; ++c)
      for (int64_t t = 0; t < n; ++t)
        clip.audio.channels[c][t] = noise.channels[c][t];
  }
  return {std::move(clip), std::move(ref)};
}

// 20 ms exponential sine sweep, 100 Hz -> 8 kHz, 2 ms Hann fades.
inline std::vector<float> EchoExcitation(int fs = kSampleRate) {
  const double dur = 0.020, f_lo = 100.0, f_hi = 8000.0;
  const int64_t n = static_cast<int64_t>(std::llround(dur * fs));
  const double lr = std::log(f_hi / f_lo);
  std::vector<float> sweep(n);
  for (int64_t i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / fs;
    double ph = 2 * M_PI * f_lo * dur / lr * (std::exp(t / dur * lr) - 1.0);
    sweep[i] = static_cast<float>(std::sin(ph));
  }
  const int64_t fade = static_cast<int64_t>(0.002 * fs);
  for (int64_t i = 0; i < fade; ++i) {
    double g = 0.5 * (1.0 - std::cos(M_PI * i / fade));
    sweep[i] = static_cast<float>(sweep[i] * g);
    sweep[n - 1 - i] = static_cast<float>(sweep[n - 1 - i] * g);
  }
  return sweep;
}

constexpr double kEchoClipLenS = 2.5;
constexpr double kEchoOnsetS = 0.25;

// The echo observation: the sweep convolved with the environment's frontal
// echo IR at t = 0.25 s inside a 2.5 s buffer, plus independent noise.
inline EchoClip SynthesizeEcho(const std::string &env_id,
                               const ImpulseResponse &echo_ir, double snr_db,
                               const AudioBuffer *noise, int fs = kSampleRate) {
  const int64_t n = static_cast<int64_t>(std::llround(kEchoClipLenS * fs));
  const int64_t start = static_cast<int64_t>(std::llround(kEchoOnsetS * fs));

  EchoClip clip;
  clip.env_id = env_id;
  clip.snr_db = snr_db;
  clip.audio.sample_rate = fs;
  clip.audio.channels.assign(4, std::vector<float>(n, 0.0f));

  const auto sweep = EchoExcitation(fs);
  for (int c = 0; c < 4; ++c) {
    auto conv = FftConvolve(sweep, echo_ir.audio.channels[c]);
    const int64_t len = std::min<int64_t>(conv.size(), n - start);
    float *dst = clip.audio.channels[c].data() + start;
    for (int64_t k = 0; k < len; ++k) dst[k] += conv[k];
  }

  if (!IsClean(snr_db)) {
    EARSELD_CHECK(noise != nullptr && noise->num_samples() >= n,
                  LengthMismatch, "echo noise missing or too short");
    const double e_sig = scene_detail::EnergyW(clip.audio);
    double e_noise = 0;
    for (int64_t t = 0; t < n; ++t)
      e_noise += static_cast<double>(noise->channels[kW][t]) * noise->channels[kW][t];
    if (e_noise > 0 && e_sig > 0) {
      const double scale =
          std::sqrt(e_sig / (e_noise * std::pow(10.0, snr_db / 10.0)));
      for (int c = 0; c < 4; ++c)
        for (int64_t t = 0; t < n; ++t)
          clip.audio.channels[c][t] += static_cast<float>(scale) * noise->channels[c][t];
    }
  }
  return clip;
}

// Samples a random event script for one clip: 8 to 14 events, placements
// drawn from the environment's available grid, rejecting onsets that would
// exceed polyphony 2.
inline std::vector<EventInstance> SampleEvents(
    Rng &rng, const std::vector<SourcePlacement> &placements,
    DrySourceBank &dry_bank, const std::string &env_id,
    double clip_len_s = 20.0) {
  EARSELD_CHECK(!placements.empty(), ConfigError, "no placements available");
  const int target = 8 + static_cast<int>(rng.UniformInt(7));
  std::vector<EventInstance> events;
  for (int k = 0; k < target; ++k) {
    EventInstance e;
    e.class_id = static_cast<int>(rng.UniformInt(kNumClasses));
    e.variation_id = static_cast<int>(rng.UniformInt(kNumVariations));
    e.placement = placements[rng.UniformInt(placements.size())];
    e.env_id = env_id;
    const double dur =
        dry_bank.Get(e.class_id, e.variation_id).duration_s();
    bool placed = false;
    for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
      e.onset_s = rng.Uniform(0.0, clip_len_s - dur);
      e.offset_s = e.onset_s + dur;
      if (scene_detail::MaxPolyphonyWith(events, e.onset_s, e.offset_s) <= 2)
        placed = true;
    }
    if (placed) events.push_back(e);
  }
  return events;
}

}  // namespace earseld

#endif  // EARSELD_SCENE_SYNTHESIZE_H_
