// tests/test_features.cpp
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

#include <gtest/gtest.h>

#include <cmath>

#include "earseld/features/extract.h"
#include "earseld/rng.h"
#include "earseld/spatial/image_source.h"

namespace earseld {
namespace {

AudioBuffer Silence(int64_t n) {
  AudioBuffer buf;
  buf.channels.assign(4, std::vector<float>(n, 0.0f));
  return buf;
}

// Broadband plane wave from (az, el): a mono noise panned with ideal FOA
// gains. Through the per-bin formula the normalized intensity equals the
// unit direction vector exactly, which is the analytic oracle used here.
AudioBuffer PlaneWave(double az_deg, double el_deg, int64_t n,
                      uint64_t seed = 99) {
  auto g = FoaGains(az_deg, el_deg);
  AudioBuffer buf;
  buf.channels.assign(4, std::vector<float>(n));
  Rng rng(seed);
  for (int64_t t = 0; t < n; ++t) {
    float v = static_cast<float>(rng.Normal());
    for (int c = 0; c < 4; ++c)
      buf.channels[c][t] = static_cast<float>(g[c]) * v;
  }
  return buf;
}

Vec3 BandMeanIntensity(const FeatureMap &fm, int band_lo, int band_hi) {
  Vec3 acc = {0, 0, 0};
  int64_t count = 0;
  for (int64_t t = 0; t < fm.frames(); ++t)
    for (int b = band_lo; b <= band_hi; ++b) {
      acc[0] += fm.values.at(4, t, b);
      acc[1] += fm.values.at(5, t, b);
      acc[2] += fm.values.at(6, t, b);
      ++count;
    }
  for (auto &v : acc) v /= static_cast<double>(count);
  return acc;
}

// T = floor((960000 - 2048) / 960) + 1 = 998 and
// T = floor((120000 - 1024) / 512) + 1 = 233, by the frame-count formula.
TEST(StftLogmel, FrameCounts) {
  auto scene = ExtractFeatures(Silence(20 * kSampleRate), FeatureKind::kScene);
  EXPECT_EQ(scene.frames(), 998);
  EXPECT_NEAR(scene.frame_rate, 50.0, 1e-12);

  auto echo = ExtractFeatures(Silence(120000), FeatureKind::kEcho);
  EXPECT_EQ(echo.frames(), 233);
}

TEST(StftLogmel, SilenceHitsLogFloor) {
  auto fm = ExtractFeatures(Silence(3 * kSampleRate), FeatureKind::kScene);
  const float floor_db = std::log(1e-8f);
  for (int c = 0; c < 4; ++c)
    for (int64_t t = 0; t < fm.frames(); ++t)
      for (int b = 0; b < kNumMels; ++b)
        ASSERT_NEAR(fm.values.at(c, t, b), floor_db, 1e-5);
}

TEST(StftLogmel, TooShortInputThrows) {
  EXPECT_THROW(ExtractFeatures(Silence(1000), FeatureKind::kScene),
               InputTooShort);
}

TEST(IntensityVector, FrontalPlaneWave) {
  auto fm = ExtractFeatures(PlaneWave(0, 0, 2 * kSampleRate),
                            FeatureKind::kScene);
  Vec3 v = BandMeanIntensity(fm, 10, 50);
  EXPECT_NEAR(v[0], 1.0, 0.05);
  EXPECT_NEAR(v[1], 0.0, 0.05);
  EXPECT_NEAR(v[2], 0.0, 0.05);
}

TEST(IntensityVector, ZenithPlaneWave) {
  auto fm = ExtractFeatures(PlaneWave(0, 90, 2 * kSampleRate),
                            FeatureKind::kScene);
  Vec3 v = BandMeanIntensity(fm, 10, 50);
  EXPECT_NEAR(v[0], 0.0, 0.05);
  EXPECT_NEAR(v[1], 0.0, 0.05);
  EXPECT_NEAR(v[2], 1.0, 0.05);
}

TEST(IntensityVector, SilenceGivesZeros) {
  auto fm = ExtractFeatures(Silence(kSampleRate), FeatureKind::kScene);
  for (int c = 4; c < 7; ++c)
    for (int64_t t = 0; t < fm.frames(); ++t)
      for (int b = 0; b < kNumMels; ++b)
        ASSERT_EQ(fm.values.at(c, t, b), 0.0f);
}

TEST(IntensityVector, BoundedByOne) {
  Rng rng(4);
  AudioBuffer buf;
  buf.channels.assign(4, std::vector<float>(kSampleRate));
  for (auto &ch : buf.channels)
    for (auto &v : ch) v = static_cast<float>(rng.Normal());
  auto fm = ExtractFeatures(buf, FeatureKind::kScene);
  for (int c = 4; c < 7; ++c)
    for (int64_t t = 0; t < fm.frames(); ++t)
      for (int b = 0; b < kNumMels; ++b)
        ASSERT_LE(std::abs(fm.values.at(c, t, b)), 1.0 + 1e-6);
}

// DOA readback through the feature chain: anechoic IRs, bands 10-50.
TEST(IntensityVector, DoaReadbackFromAnechoicIrs) {
  EnvironmentSpec env;
  env.env_id = "anechoic";
  env.is_anechoic = true;
  for (double az = -180; az < 180; az += 40) {
    for (double el : {-20.0, 0.0, 20.0}) {
      SourcePlacement p{az, el, 150};
      auto ir = SimulateIr(env, p, 0);
      AudioBuffer padded;
      padded.channels.assign(4, std::vector<float>(4096, 0.0f));
      for (int c = 0; c < 4; ++c)
        std::copy(ir.audio.channels[c].begin(), ir.audio.channels[c].end(),
                  padded.channels[c].begin());
      auto fm = ExtractFeatures(padded, FeatureKind::kScene);
      Vec3 v = BandMeanIntensity(fm, 10, 50);
      double n = Norm(v);
      ASSERT_GT(n, 0.1);
      for (auto &x : v) x /= n;
      Vec3 truth = p.unit_direction();
      EXPECT_LT(AngularErrorDeg(v, truth), 5.0)
          << "az " << az << " el " << el;
    }
  }
}

TEST(Features, Deterministic) {
  auto audio = PlaneWave(45, 20, kSampleRate, 1234);
  auto a = ExtractFeatures(audio, FeatureKind::kScene);
  auto b = ExtractFeatures(audio, FeatureKind::kScene);
  for (int64_t i = 0; i < a.values.numel(); ++i)
    ASSERT_EQ(a.values[i], b.values[i]);
}

TEST(Normalize, SelfStatsGiveZeroMeanUnitStd) {
  std::vector<FeatureMap> maps;
  maps.push_back(
      ExtractFeatures(PlaneWave(30, 0, kSampleRate, 5), FeatureKind::kScene));
  maps.push_back(
      ExtractFeatures(PlaneWave(-60, 20, kSampleRate, 6), FeatureKind::kScene));
  auto stats = ComputeFeatureStats(maps);
  for (auto &fm : maps) NormalizeFeatures(&fm, stats);

  for (int c = 0; c < 4; ++c) {
    double sum = 0, sumsq = 0;
    int64_t n = 0;
    for (const auto &fm : maps) {
      const int64_t plane = fm.values.dim(1) * fm.values.dim(2);
      const float *p = fm.values.data() + c * plane;
      for (int64_t i = 0; i < plane; ++i) {
        sum += p[i];
        sumsq += static_cast<double>(p[i]) * p[i];
        ++n;
      }
    }
    double mean = sum / n;
    double stdv = std::sqrt(sumsq / n - mean * mean);
    EXPECT_LT(std::abs(mean), 1e-4) << "channel " << c;
    EXPECT_GT(stdv, 0.99);
    EXPECT_LT(stdv, 1.01);
  }
}

TEST(Normalize, DegenerateChannelIsGuarded) {
  std::vector<FeatureMap> maps;
  maps.push_back(ExtractFeatures(Silence(kSampleRate), FeatureKind::kScene));
  auto stats = ComputeFeatureStats(maps);
  for (int c = 0; c < 4; ++c) EXPECT_GE(stats.stddev[c], 1e-6);
  NormalizeFeatures(&maps[0], stats);
  for (int64_t i = 0; i < maps[0].values.numel(); ++i)
    ASSERT_TRUE(std::isfinite(maps[0].values[i]));
}

TEST(Normalize, MissingStatsThrows) {
  auto fm = ExtractFeatures(Silence(kSampleRate), FeatureKind::kScene);
  FeatureStats stats;
  EXPECT_THROW(NormalizeFeatures(&fm, stats), MissingStats);
}

// Train stats applied to other data stay finite and are not re-fit per clip.
TEST(Normalize, TrainStatsApplyToTestData) {
  std::vector<FeatureMap> train;
  train.push_back(
      ExtractFeatures(PlaneWave(0, 0, kSampleRate, 42), FeatureKind::kScene));
  auto stats = ComputeFeatureStats(train);
  auto test_fm =
      ExtractFeatures(PlaneWave(90, -20, kSampleRate, 43), FeatureKind::kScene);
  NormalizeFeatures(&test_fm, stats);
  for (int64_t i = 0; i < test_fm.values.numel(); ++i)
    ASSERT_TRUE(std::isfinite(test_fm.values[i]));
}

}  // namespace
}  // namespace earseld
