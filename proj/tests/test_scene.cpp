// tests/test_scene.cpp
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
#include <filesystem>
#include <set>

#include "earseld/scene/dataset.h"

namespace earseld {
namespace {

namespace fs = std::filesystem;

DatasetConfig TinyConfig() {
  DatasetConfig cfg;
  cfg.master_seed = 77;
  cfg.scale_denominator = 1920;  // one clip per train split
  cfg.num_reverb_s_envs = 2;
  cfg.num_test_envs = 1;
  cfg.num_reverb_c_envs = 1;
  cfg.max_order = 2;
  return cfg;
}

TEST(DrySources, BankShapeAndInvariants) {
  for (int c = 0; c < kNumClasses; ++c) {
    for (int v : {0, 7, 19}) {
      auto src = MakeDrySource(123, c, v);
      EXPECT_GE(src.duration_s(), 0.3);
      EXPECT_LE(src.duration_s(), 4.0);
      float peak = 0;
      for (float s : src.samples) peak = std::max(peak, std::abs(s));
      EXPECT_NEAR(peak, 1.0, 1e-6) << "class " << c << " var " << v;
    }
  }
  EXPECT_THROW(MakeDrySource(1, 12, 0), ConfigError);
  EXPECT_THROW(MakeDrySource(1, 0, 20), ConfigError);
}

TEST(DrySources, Deterministic) {
  auto a = MakeDrySource(9, 5, 3);
  auto b = MakeDrySource(9, 5, 3);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i)
    ASSERT_EQ(a.samples[i], b.samples[i]);
}

TEST(EnvironmentBank, GridAndEchoCounts) {
  auto m = PlanDataset(TinyConfig());
  EXPECT_EQ(m.irs.at("anechoic").size(), 216u);
  EXPECT_EQ(m.irs.at("test_00").size(), 216u);  // echo point is on the grid
  EXPECT_EQ(m.irs.at("revC_00").size(), 216u);

  // Sparse rooms: 3 grid points plus the frontal echo IR when the random
  // picks missed it.
  for (const auto &env_id : {"revS_00", "revS_01"}) {
    const auto &records = m.irs.at(env_id);
    int echo = 0, non_echo = 0;
    for (const auto &r : records) r.is_echo ? ++echo : ++non_echo;
    EXPECT_EQ(echo, 1) << env_id;
    EXPECT_GE(non_echo, 2) << env_id;
    EXPECT_LE(records.size(), 4u) << env_id;
  }

  // Echo subset size = |Reverb-S| + |Test|.
  int echo_irs = 0;
  for (const auto &[env_id, records] : m.irs)
    for (const auto &r : records) echo_irs += r.is_echo ? 1 : 0;
  EXPECT_EQ(echo_irs, 3);  // 2 + 1

  DatasetConfig desk;
  desk.num_reverb_s_envs = 8;
  desk.num_test_envs = 2;
  desk.plan_only = true;
  auto desk_m = PlanDataset(desk);
  int desk_echo = 0;
  for (const auto &[env_id, records] : desk_m.irs)
    for (const auto &r : records) desk_echo += r.is_echo ? 1 : 0;
  EXPECT_EQ(desk_echo, 10);  // 8 + 2
}

TEST(EnvironmentBank, PaperScaleCounts) {
  auto cfg = DatasetConfig::PaperScale();
  cfg.plan_only = true;
  auto m = PlanDataset(cfg);
  int echo_irs = 0;
  for (const auto &[env_id, records] : m.irs)
    for (const auto &r : records) echo_irs += r.is_echo ? 1 : 0;
  EXPECT_EQ(echo_irs, 101);  // 96 Reverb-S + 5 Test
  EXPECT_EQ(m.splits.at("Train-rev").clips.size(), 1920u);
  EXPECT_EQ(m.splits.at("Train-anec").clips.size(), 1920u);
  EXPECT_EQ(m.splits.at("Train-target").clips.size(), 1920u);
  EXPECT_EQ(m.splits.at("Train-base").clips.size(), 1920u);
  EXPECT_EQ(m.splits.at("Test").clips.size(), 300u);
  EXPECT_EQ(m.splits.at("Train-echo-rev").clips.size(), 1920u);
  EXPECT_EQ(m.splits.at("Train-echo-anec").clips.size(), 1u);
  EXPECT_EQ(m.splits.at("Test-echo").clips.size(), 5u);
}

TEST(Splits, DeskScaleCountsAndPairing) {
  DatasetConfig cfg;
  cfg.scale_denominator = 16;
  cfg.plan_only = true;
  auto m = PlanDataset(cfg);
  EXPECT_EQ(m.splits.at("Train-rev").clips.size(), 120u);
  EXPECT_EQ(m.splits.at("Test").clips.size(), 19u);
  EXPECT_EQ(m.splits.at("Test-echo").clips.size(), 2u);

  // Every Train-rev clip pairs with exactly one echo clip sharing env + SNR.
  const auto &rev = m.splits.at("Train-rev").clips;
  const auto &echo = m.splits.at("Train-echo-rev").clips;
  ASSERT_EQ(rev.size(), echo.size());
  std::set<std::string> used;
  for (size_t i = 0; i < rev.size(); ++i) {
    ASSERT_FALSE(rev[i].echo_clip_id.empty());
    EXPECT_TRUE(used.insert(rev[i].echo_clip_id).second);
    const ClipRecord *paired = nullptr;
    for (const auto &e : echo)
      if (e.clip_id == rev[i].echo_clip_id) paired = &e;
    ASSERT_NE(paired, nullptr);
    EXPECT_EQ(paired->env_id, rev[i].env_id);
    EXPECT_DOUBLE_EQ(paired->snr_db, rev[i].snr_db);
    EXPECT_NE(paired->noise_seed, rev[i].noise_seed);
  }

  // Train-anec is clean.
  for (const auto &c : m.splits.at("Train-anec").clips)
    EXPECT_TRUE(IsClean(c.snr_db));
  // Test is fixed 20 dB.
  for (const auto &c : m.splits.at("Test").clips)
    EXPECT_DOUBLE_EQ(c.snr_db, 20.0);
  // Noisy train SNRs lie in [6, 30].
  for (const auto &c : m.splits.at("Train-rev").clips) {
    EXPECT_GE(c.snr_db, 6.0);
    EXPECT_LE(c.snr_db, 30.0);
  }
}

class BuiltDataset : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = (fs::temp_directory_path() / "earseld_scene_test").string();
    fs::remove_all(root_);
    BuildDataset(TinyConfig(), root_);
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }
  static std::string root_;
};
std::string BuiltDataset::root_;

TEST_F(BuiltDataset, RerunVerifiesChecksums) {
  auto report = BuildDataset(TinyConfig(), root_);
  EXPECT_TRUE(report.verified_existing);
  EXPECT_GT(report.files_verified, 0);
  EXPECT_TRUE(report.mismatches.empty());
}

TEST_F(BuiltDataset, MeasuredSnrMatchesRequested) {
  auto m = LoadManifest(root_);
  const auto &clip = m.splits.at("Test").clips[0];
  ASSERT_FALSE(IsClean(clip.snr_db));

  // Re-synthesize the event-only part with the clip seeds.
  IrBank bank;
  bank.SimulateAll(m);
  DrySourceBank dry(m.config.master_seed);
  Rng event_rng(clip.event_seed);
  auto events = SampleEvents(event_rng, bank.EventPlacements(m, clip.env_id),
                             dry, clip.env_id, clip.clip_len_s);
  AudioBuffer silence_noise;
  silence_noise.channels.assign(
      4, std::vector<float>(
             static_cast<size_t>(clip.clip_len_s * kSampleRate), 0.0f));
  auto [clean_scene, ref] =
      SynthesizeScene(events, bank.Set(clip.env_id), dry, silence_noise,
                      kSnrClean, clip.clip_len_s);

  auto mixed = ReadWav(root_ + "/" + clip.wav_path);
  double e_sig = 0, e_noise = 0;
  for (int64_t t = 0; t < mixed.num_samples(); ++t) {
    double s = clean_scene.audio.channels[kW][t];
    double n = mixed.channels[kW][t] - s;
    e_sig += s * s;
    e_noise += n * n;
  }
  double snr = 10.0 * std::log10(e_sig / e_noise);
  EXPECT_NEAR(snr, clip.snr_db, 0.5);
}

TEST_F(BuiltDataset, LabelsStayOnGridAndWithinPolyphony) {
  auto m = LoadManifest(root_);
  for (const auto &name : {"Train-rev", "Train-base", "Test"}) {
    for (const auto &clip : m.splits.at(name).clips) {
      auto ref = ReadLabelsCsv(root_ + "/" + clip.labels_path, 200);
      for (const auto &frame : ref.frames) {
        EXPECT_LE(frame.size(), 2u);
        for (const auto &e : frame) {
          double az10 = e.azimuth_deg / 10.0;
          EXPECT_NEAR(az10, std::round(az10), 1e-9);
          EXPECT_TRUE(e.elevation_deg == -20.0 || e.elevation_deg == 0.0 ||
                      e.elevation_deg == 20.0);
          Vec3 u = e.unit();
          EXPECT_NEAR(Norm(u), 1.0, 1e-6);
        }
      }
    }
  }
}

TEST_F(BuiltDataset, FeatureCacheRoundTrip) {
  auto m = LoadManifest(root_);
  const auto &clip = m.splits.at("Test").clips[0];
  auto a = ClipFeatures(root_, clip, false);
  auto b = ClipFeatures(root_, clip, false);  // second call hits the cache
  ASSERT_TRUE(a.values.SameShape(b.values));
  for (int64_t i = 0; i < a.values.numel(); ++i)
    ASSERT_EQ(a.values[i], b.values[i]);
  EXPECT_EQ(a.frames(), 998);
}

TEST(SynthesizeScene, ZeroEventsPassesNoiseThrough) {
  DrySourceBank dry(3);
  IrSet irs;
  EnvironmentSpec env;
  env.env_id = "anechoic";
  env.is_anechoic = true;
  env.noise_seed = 5;
  auto noise = SimulateNoise(env, 2.0);
  auto [clip, ref] = SynthesizeScene({}, irs, dry, noise, 20.0, 2.0);
  EXPECT_EQ(ref.TotalEntries(), 0);
  for (int c = 0; c < 4; ++c)
    for (int64_t t = 0; t < clip.audio.num_samples(); ++t)
      ASSERT_EQ(clip.audio.channels[c][t], noise.channels[c][t]);
}

TEST(SynthesizeScene, SingleEventCleanIsPureConvolution) {
  EnvironmentSpec env;
  env.env_id = "anechoic";
  env.is_anechoic = true;
  auto ir = SimulateIr(env, {30.0, 0.0, 150}, 0);
  IrSet irs;
  irs.Add(ir);
  DrySourceBank dry(3);

  EventInstance e;
  e.class_id = 2;
  e.variation_id = 1;
  e.onset_s = 1.0;
  e.offset_s = 1.0 + dry.Get(2, 1).duration_s();
  e.placement = {30.0, 0.0, 150};
  e.env_id = "anechoic";

  AudioBuffer empty_noise;
  empty_noise.channels.assign(4, std::vector<float>(10 * kSampleRate, 0.0f));
  auto [clip, ref] =
      SynthesizeScene({e}, irs, dry, empty_noise, kSnrClean, 10.0);

  auto conv = FftConvolve(dry.Get(2, 1).samples, ir.audio.channels[kW]);
  const int64_t start =
      static_cast<int64_t>(std::llround(e.onset_s * kSampleRate));
  for (size_t k = 0; k < std::min<size_t>(conv.size(), 2000); ++k)
    ASSERT_NEAR(clip.audio.channels[kW][start + k], conv[k], 1e-6);

  // Active frames = ceil(duration / 0.1) +- 1.
  int64_t active = 0;
  for (const auto &f : ref.frames) active += f.empty() ? 0 : 1;
  int64_t expect = static_cast<int64_t>(
      std::ceil(dry.Get(2, 1).duration_s() / kLabelFrameSec));
  EXPECT_LE(std::abs(active - expect), 1);
}

// Two overlapping events of the same class at different DOAs: the reference
// carries the class twice with distinct vectors. Expected rows built by hand.
TEST(SynthesizeScene, SameClassTwiceWithDistinctDoas) {
  EnvironmentSpec env;
  env.env_id = "anechoic";
  env.is_anechoic = true;
  auto ir1 = SimulateIr(env, {0.0, 0.0, 150}, 0);
  auto ir2 = SimulateIr(env, {90.0, 0.0, 150}, 0);
  IrSet irs;
  irs.Add(ir1);
  irs.Add(ir2);
  DrySourceBank dry(3);

  EventInstance a, b;
  a.class_id = b.class_id = 4;
  a.variation_id = 0;
  b.variation_id = 1;
  a.onset_s = 1.0;
  a.offset_s = 1.0 + dry.Get(4, 0).duration_s();
  b.onset_s = 1.2;
  b.offset_s = 1.2 + dry.Get(4, 1).duration_s();
  a.placement = {0.0, 0.0, 150};
  b.placement = {90.0, 0.0, 150};

  AudioBuffer no_noise;
  no_noise.channels.assign(4, std::vector<float>(10 * kSampleRate, 0.0f));
  auto [clip, ref] =
      SynthesizeScene({a, b}, irs, dry, no_noise, kSnrClean, 10.0);

  double both_lo = std::max(a.onset_s, b.onset_s);
  double both_hi = std::min(a.offset_s, b.offset_s);
  ASSERT_GT(both_hi, both_lo);
  int64_t frame = static_cast<int64_t>((both_lo + 0.1) / kLabelFrameSec);
  ASSERT_LT(frame, ref.num_frames());
  const auto &entries = ref.frames[frame];
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].class_id, 4);
  EXPECT_EQ(entries[1].class_id, 4);
  std::set<double> azimuths = {entries[0].azimuth_deg, entries[1].azimuth_deg};
  EXPECT_TRUE(azimuths.count(0.0));
  EXPECT_TRUE(azimuths.count(90.0));
}

TEST(SynthesizeScene, PolyphonyViolationThrows) {
  DrySourceBank dry(3);
  EnvironmentSpec env;
  env.env_id = "anechoic";
  env.is_anechoic = true;
  auto ir = SimulateIr(env, {0.0, 0.0, 150}, 0);
  IrSet irs;
  irs.Add(ir);
  std::vector<EventInstance> events;
  for (int i = 0; i < 3; ++i) {
    EventInstance e;
    e.class_id = i;
    e.variation_id = 0;
    e.onset_s = 1.0 + 0.01 * i;
    e.offset_s = e.onset_s + 1.0;
    e.placement = {0.0, 0.0, 150};
    events.push_back(e);
  }
  AudioBuffer no_noise;
  no_noise.channels.assign(4, std::vector<float>(5 * kSampleRate, 0.0f));
  EXPECT_THROW(SynthesizeScene(events, irs, dry, no_noise, kSnrClean, 5.0),
               PolyphonyError);
}

TEST(SynthesizeScene, MissingIrThrows) {
  DrySourceBank dry(3);
  IrSet irs;  // empty
  EventInstance e;
  e.class_id = 0;
  e.variation_id = 0;
  e.onset_s = 0.5;
  e.offset_s = 1.0;
  e.placement = {0.0, 0.0, 150};
  AudioBuffer no_noise;
  no_noise.channels.assign(4, std::vector<float>(3 * kSampleRate, 0.0f));
  EXPECT_THROW(SynthesizeScene({e}, irs, dry, no_noise, kSnrClean, 3.0),
               MissingIRError);
}

TEST(SynthesizeEcho, AnechoicEnergyConfinedToEarlyWindow) {
  EnvironmentSpec env;
  env.env_id = "anechoic";
  env.is_anechoic = true;
  auto ir = SimulateIr(env, {0.0, 0.0, 150}, 0);
  auto clip = SynthesizeEcho("anechoic", ir, kSnrClean, nullptr);
  ASSERT_EQ(clip.audio.num_samples(), 120000);

  float peak = 0;
  for (float v : clip.audio.channels[kW]) peak = std::max(peak, std::abs(v));
  const double thresh = peak * std::pow(10.0, -60.0 / 20.0);
  const int64_t lo = static_cast<int64_t>(0.25 * kSampleRate);
  const int64_t hi = static_cast<int64_t>(0.29 * kSampleRate);
  for (int64_t t = 0; t < clip.audio.num_samples(); ++t) {
    if (t >= lo && t < hi) continue;
    ASSERT_LE(std::abs(clip.audio.channels[kW][t]), thresh) << "sample " << t;
  }
}

// Same environment, two noise seeds at 30 dB: identical early response.
// Oracle: synthesize noise-free and correlate the early segments.
TEST(SynthesizeEcho, EarlyResponseSurvivesNoise) {
  EnvironmentSpec env;
  env.env_id = "box";
  env.room_dims = {5.0, 4.0, 3.0};
  env.absorption.fill(0.4);
  env.mic_position = {2.4, 1.9, 1.5};
  auto ir = SimulateIr(env, {0.0, 0.0, 150}, 4);

  auto reference = SynthesizeEcho("box", ir, kSnrClean, nullptr);
  EnvironmentSpec na = env, nb = env;
  na.noise_seed = 101;
  nb.noise_seed = 202;
  auto noise_a = SimulateNoise(na, kEchoClipLenS);
  auto noise_b = SimulateNoise(nb, kEchoClipLenS);
  auto clip_a = SynthesizeEcho("box", ir, 30.0, &noise_a);
  auto clip_b = SynthesizeEcho("box", ir, 30.0, &noise_b);

  const int64_t lo = static_cast<int64_t>(0.25 * kSampleRate);
  const int64_t hi = static_cast<int64_t>(0.30 * kSampleRate);
  auto corr = [&](const AudioBuffer &u, const AudioBuffer &v) {
    double uv = 0, uu = 0, vv = 0;
    for (int64_t t = lo; t < hi; ++t) {
      double a = u.channels[kW][t], b = v.channels[kW][t];
      uv += a * b;
      uu += a * a;
      vv += b * b;
    }
    return uv / std::sqrt(uu * vv);
  };
  EXPECT_GE(corr(clip_a.audio, reference.audio), 0.99);
  EXPECT_GE(corr(clip_b.audio, reference.audio), 0.99);

  bool identical = true;
  for (int64_t t = 0; t < clip_a.audio.num_samples() && identical; ++t)
    identical = clip_a.audio.channels[kW][t] == clip_b.audio.channels[kW][t];
  EXPECT_FALSE(identical);
}

TEST(Labels, CsvRoundTrip) {
  SELDReference ref;
  ref.frames.resize(5);
  ref.frames[1].push_back({3, -170.0, 20.0});
  ref.frames[1].push_back({3, 10.0, 0.0});
  ref.frames[4].push_back({11, 0.0, -20.0});
  auto path = fs::temp_directory_path() / "earseld_labels.csv";
  WriteLabelsCsv(path.string(), ref);
  auto back = ReadLabelsCsv(path.string(), 5);
  ASSERT_EQ(back.num_frames(), 5);
  ASSERT_EQ(back.frames[1].size(), 2u);
  EXPECT_EQ(back.frames[1][0].class_id, 3);
  EXPECT_DOUBLE_EQ(back.frames[1][0].azimuth_deg, -170.0);
  EXPECT_DOUBLE_EQ(back.frames[1][1].azimuth_deg, 10.0);
  ASSERT_EQ(back.frames[4].size(), 1u);
  EXPECT_DOUBLE_EQ(back.frames[4][0].elevation_deg, -20.0);
  fs::remove(path);
}

}  // namespace
}  // namespace earseld
