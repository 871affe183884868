// earseld/scene/dataset.h
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
// Dataset construction: an environment bank of simulated impulse responses
// (one comprehensive anechoic room, sparse multi-environment rooms, held-out
// test rooms, comprehensive reverberant rooms and per-room echo responses),
// and the eight synthesis splits built from it, persisted behind a manifest.

#ifndef EARSELD_SCENE_DATASET_H_
#define EARSELD_SCENE_DATASET_H_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "earseld/common.h"
#include "earseld/features/extract.h"
#include "earseld/rng.h"
#include "earseld/scene/synthesize.h"
#include "earseld/spatial/noise.h"

namespace earseld {

using json = nlohmann::json;

struct DatasetConfig {
  uint64_t master_seed = 1;
  // 1 reproduces the published split sizes; 16 is the desk-scale default.
  int scale_denominator = 16;
  int num_reverb_s_envs = 8;  // 96 at paper scale
  int num_test_envs = 2;      // 5 at paper scale
  int num_reverb_c_envs = 2;
  int max_order = 6;
  bool plan_only = false;

  static DatasetConfig PaperScale() {
    DatasetConfig c;
    c.scale_denominator = 1;
    c.num_reverb_s_envs = 96;
    c.num_test_envs = 5;
    return c;
  }

  int64_t TrainClips() const { return ScaledCount(1920); }
  int64_t TestClips() const { return ScaledCount(300); }

  int64_t ScaledCount(int64_t paper_count) const {
    return std::max<int64_t>(
        1, std::llround(static_cast<double>(paper_count) / scale_denominator));
  }
};

struct IrRecord {
  SourcePlacement placement;
  std::string path;  // relative to dataset root
  bool is_echo = false;
};

struct ClipRecord {
  std::string clip_id;
  std::string split;
  std::string env_id;
  double snr_db = kSnrClean;
  uint64_t event_seed = 0;
  uint64_t noise_seed = 0;
  std::string wav_path;
  std::string labels_path;   // empty for echo clips
  std::string echo_clip_id;  // paired echo clip, empty if none
  double clip_len_s = 20.0;
};

struct SplitRecord {
  std::string name;
  double clip_len_s = 20.0;
  bool is_echo_split = false;
  std::vector<ClipRecord> clips;
};

// Table-ordered split names.
inline const std::vector<std::string> &AllSplitNames() {
  static const std::vector<std::string> names = {
      "Train-rev",      "Train-anec",      "Train-target", "Train-base",
      "Test",           "Train-echo-rev",  "Train-echo-anec", "Test-echo"};
  return names;
}

struct DatasetManifest {
  int version = 1;
  bool planned = false;
  DatasetConfig config;
  std::vector<EnvironmentSpec> environments;
  std::map<std::string, std::string> env_subset;  // env_id -> subset name
  std::map<std::string, std::vector<IrRecord>> irs;
  std::map<std::string, SplitRecord> splits;
  std::map<std::string, std::string> checksums;  // rel path -> fnv64 hex
  std::string feature_layout = "channels,frames,mels";

  const SplitRecord &Split(const std::string &name) const {
    auto it = splits.find(name);
    if (it == splits.end()) {
      std::string known;
      for (const auto &[k, v] : splits) known += k + " ";
      throw ConfigError("unknown split '" + name + "'; available: " + known);
    }
    return it->second;
  }

  const ClipRecord &Clip(const std::string &clip_id) const {
    for (const auto &[name, split] : splits)
      for (const auto &c : split.clips)
        if (c.clip_id == clip_id) return c;
    throw ConfigError("unknown clip id: " + clip_id);
  }
};

namespace dataset_detail {

inline std::string Fnv64File(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  EARSELD_CHECK(f.good(), IoError, "cannot checksum: " << path);
  uint64_t h = 1469598103934665603ULL;
  char buf[65536];
  while (f.good()) {
    f.read(buf, sizeof(buf));
    std::streamsize got = f.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

inline std::string IrFileName(const SourcePlacement &p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "az%+04d_el%+03d_d%03d.wav",
                static_cast<int>(std::llround(p.azimuth_deg)),
                static_cast<int>(std::llround(p.elevation_deg)),
                p.distance_cm);
  return buf;
}

// The 216-point measurement grid: 36 azimuths x 3 elevations x 2 distances.
inline std::vector<SourcePlacement> FullGrid() {
  std::vector<SourcePlacement> grid;
  for (int a = 0; a < 36; ++a)
    for (double el : {-20.0, 0.0, 20.0})
      for (int d : {75, 150})
        grid.push_back({-180.0 + 10.0 * a, el, d});
  return grid;
}

inline EnvironmentSpec SampleRoom(const std::string &env_id, uint64_t seed) {
  Rng rng(seed);
  EnvironmentSpec env;
  env.env_id = env_id;
  env.is_anechoic = false;
  // Rooms sized so the full grid (1.5 m reach) stays inside with margin.
  env.room_dims = {rng.Uniform(3.6, 9.0), rng.Uniform(3.6, 9.0),
                   rng.Uniform(2.7, 4.0)};
  env.mic_position = {rng.Uniform(1.7, env.room_dims[0] - 1.7),
                      rng.Uniform(1.7, env.room_dims[1] - 1.7),
                      rng.Uniform(0.8, env.room_dims[2] - 0.8)};
  for (auto &a : env.absorption) a = rng.Uniform(0.15, 0.65);
  env.noise_seed = DeriveSeed(seed, "ambient");
  return env;
}

}  // namespace dataset_detail

// --- manifest (de)serialization ---------------------------------------

inline json ToJson(const EnvironmentSpec &env) {
  json j;
  j["env_id"] = env.env_id;
  j["is_anechoic"] = env.is_anechoic;
  if (!env.is_anechoic) {
    j["room_dims"] = env.room_dims;
    j["absorption"] = env.absorption;
    j["mic_position"] = env.mic_position;
  }
  j["noise_seed"] = env.noise_seed;
  return j;
}

inline EnvironmentSpec EnvFromJson(const json &j) {
  EnvironmentSpec env;
  env.env_id = j.at("env_id").get<std::string>();
  env.is_anechoic = j.at("is_anechoic").get<bool>();
  if (!env.is_anechoic) {
    env.room_dims = j.at("room_dims").get<Vec3>();
    env.absorption = j.at("absorption").get<std::array<double, 6>>();
    env.mic_position = j.at("mic_position").get<Vec3>();
  }
  env.noise_seed = j.at("noise_seed").get<uint64_t>();
  return env;
}

inline json ToJson(const DatasetManifest &m) {
  json j;
  j["version"] = m.version;
  j["planned"] = m.planned;
  j["feature_layout"] = m.feature_layout;
  j["sample_rate"] = kSampleRate;
  j["config"] = {{"master_seed", m.config.master_seed},
                 {"scale_denominator", m.config.scale_denominator},
                 {"num_reverb_s_envs", m.config.num_reverb_s_envs},
                 {"num_test_envs", m.config.num_test_envs},
                 {"num_reverb_c_envs", m.config.num_reverb_c_envs},
                 {"max_order", m.config.max_order}};
  j["environments"] = json::array();
  for (const auto &env : m.environments) {
    json je = ToJson(env);
    je["subset"] = m.env_subset.at(env.env_id);
    j["environments"].push_back(je);
  }
  j["irs"] = json::object();
  for (const auto &[env_id, records] : m.irs) {
    json arr = json::array();
    for (const auto &r : records)
      arr.push_back({{"azimuth_deg", r.placement.azimuth_deg},
                     {"elevation_deg", r.placement.elevation_deg},
                     {"distance_cm", r.placement.distance_cm},
                     {"path", r.path},
                     {"is_echo", r.is_echo}});
    j["irs"][env_id] = arr;
  }
  j["splits"] = json::object();
  for (const auto &[name, split] : m.splits) {
    json clips = json::array();
    for (const auto &c : split.clips) {
      json jc = {{"id", c.clip_id},
                 {"env", c.env_id},
                 {"event_seed", c.event_seed},
                 {"noise_seed", c.noise_seed},
                 {"wav", c.wav_path},
                 {"labels", c.labels_path},
                 {"echo_id", c.echo_clip_id},
                 {"len_s", c.clip_len_s}};
      if (IsClean(c.snr_db))
        jc["snr_db"] = nullptr;
      else
        jc["snr_db"] = c.snr_db;
      clips.push_back(jc);
    }
    j["splits"][name] = {{"clip_len_s", split.clip_len_s},
                         {"is_echo_split", split.is_echo_split},
                         {"clips", clips}};
  }
  j["checksums"] = m.checksums;
  return j;
}

inline DatasetManifest ManifestFromJson(const json &j) {
  DatasetManifest m;
  m.version = j.at("version").get<int>();
  m.planned = j.at("planned").get<bool>();
  m.feature_layout = j.at("feature_layout").get<std::string>();
  const auto &jc = j.at("config");
  m.config.master_seed = jc.at("master_seed").get<uint64_t>();
  m.config.scale_denominator = jc.at("scale_denominator").get<int>();
  m.config.num_reverb_s_envs = jc.at("num_reverb_s_envs").get<int>();
  m.config.num_test_envs = jc.at("num_test_envs").get<int>();
  m.config.num_reverb_c_envs = jc.at("num_reverb_c_envs").get<int>();
  m.config.max_order = jc.at("max_order").get<int>();
  for (const auto &je : j.at("environments")) {
    m.environments.push_back(EnvFromJson(je));
    m.env_subset[m.environments.back().env_id] =
        je.at("subset").get<std::string>();
  }
  for (const auto &[env_id, arr] : j.at("irs").items()) {
    for (const auto &jr : arr) {
      IrRecord r;
      r.placement = {jr.at("azimuth_deg").get<double>(),
                     jr.at("elevation_deg").get<double>(),
                     jr.at("distance_cm").get<int>()};
      r.path = jr.at("path").get<std::string>();
      r.is_echo = jr.at("is_echo").get<bool>();
      m.irs[env_id].push_back(r);
    }
  }
  for (const auto &[name, js] : j.at("splits").items()) {
    SplitRecord split;
    split.name = name;
    split.clip_len_s = js.at("clip_len_s").get<double>();
    split.is_echo_split = js.at("is_echo_split").get<bool>();
    for (const auto &jcr : js.at("clips")) {
      ClipRecord c;
      c.clip_id = jcr.at("id").get<std::string>();
      c.split = name;
      c.env_id = jcr.at("env").get<std::string>();
      c.snr_db = jcr.at("snr_db").is_null() ? kSnrClean
                                            : jcr.at("snr_db").get<double>();
      c.event_seed = jcr.at("event_seed").get<uint64_t>();
      c.noise_seed = jcr.at("noise_seed").get<uint64_t>();
      c.wav_path = jcr.at("wav").get<std::string>();
      c.labels_path = jcr.at("labels").get<std::string>();
      c.echo_clip_id = jcr.at("echo_id").get<std::string>();
      c.clip_len_s = jcr.at("len_s").get<double>();
      split.clips.push_back(c);
    }
    m.splits[name] = split;
  }
  m.checksums =
      j.at("checksums").get<std::map<std::string, std::string>>();
  return m;
}

// --- planning ----------------------------------------------------------

// Builds the environment bank and the eight split plans; no files touched.
inline DatasetManifest PlanDataset(const DatasetConfig &cfg) {
  using namespace dataset_detail;
  EARSELD_CHECK(cfg.num_reverb_s_envs > 0 && cfg.num_test_envs > 0 &&
                    cfg.num_reverb_c_envs > 0 && cfg.scale_denominator >= 1,
                ConfigError, "environment counts must be positive");

  DatasetManifest m;
  m.config = cfg;
  m.planned = cfg.plan_only;
  const auto grid = FullGrid();

  auto add_env = [&m](const EnvironmentSpec &env, const std::string &subset) {
    m.environments.push_back(env);
    m.env_subset[env.env_id] = subset;
  };
  auto add_irs = [&m, &cfg](const std::string &env_id,
                            const std::vector<SourcePlacement> &ps) {
    for (const auto &p : ps)
      m.irs[env_id].push_back(
          {p, "irs/" + env_id + "/" + dataset_detail::IrFileName(p), false});
  };

  // Anechoic: one environment, the full grid.
  {
    EnvironmentSpec env;
    env.env_id = "anechoic";
    env.is_anechoic = true;
    env.noise_seed = DeriveSeed(cfg.master_seed, "env-noise", 0);
    add_env(env, "Anechoic");
    add_irs(env.env_id, grid);
  }
  // Reverb-S: sparse rooms, 3 random grid points each.
  for (int i = 0; i < cfg.num_reverb_s_envs; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "revS_%02d", i);
    auto env = SampleRoom(id, DeriveSeed(cfg.master_seed, "env-revS", i));
    add_env(env, "Reverb-S");
    Rng pick(DeriveSeed(cfg.master_seed, "irpick", i));
    std::vector<SourcePlacement> chosen;
    while (chosen.size() < 3) {
      const auto &p = grid[pick.UniformInt(grid.size())];
      bool dup = false;
      for (const auto &q : chosen)
        dup |= (q.azimuth_deg == p.azimuth_deg &&
                q.elevation_deg == p.elevation_deg &&
                q.distance_cm == p.distance_cm);
      if (!dup) chosen.push_back(p);
    }
    add_irs(env.env_id, chosen);
  }
  // Test: held-out rooms with the full grid.
  for (int i = 0; i < cfg.num_test_envs; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "test_%02d", i);
    auto env = SampleRoom(id, DeriveSeed(cfg.master_seed, "env-test", i));
    add_env(env, "Test");
    add_irs(env.env_id, grid);
  }
  // Reverb-C: comprehensive reverberant rooms, full grid.
  for (int i = 0; i < cfg.num_reverb_c_envs; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "revC_%02d", i);
    auto env = SampleRoom(id, DeriveSeed(cfg.master_seed, "env-revC", i));
    add_env(env, "Reverb-C");
    add_irs(env.env_id, grid);
  }
  // Echo responses: one frontal IR per Reverb-S and Test environment.
  const SourcePlacement echo_p{0.0, 0.0, 150};
  for (const auto &env : m.environments) {
    const std::string &subset = m.env_subset[env.env_id];
    if (subset != "Reverb-S" && subset != "Test") continue;
    bool present = false;
    for (auto &r : m.irs[env.env_id]) {
      if (r.placement.azimuth_deg == 0 && r.placement.elevation_deg == 0 &&
          r.placement.distance_cm == 150) {
        r.is_echo = true;
        present = true;
      }
    }
    if (!present)
      m.irs[env.env_id].push_back(
          {echo_p,
           "irs/" + env.env_id + "/" + dataset_detail::IrFileName(echo_p),
           true});
  }

  auto envs_of = [&m](const std::string &subset) {
    std::vector<std::string> ids;
    for (const auto &env : m.environments)
      if (m.env_subset.at(env.env_id) == subset) ids.push_back(env.env_id);
    return ids;
  };
  const auto revS = envs_of("Reverb-S");
  const auto test_envs = envs_of("Test");
  const auto revC = envs_of("Reverb-C");

  enum class SnrPolicy { kClean, kRange, kFixed20 };
  auto make_scene_split = [&](const std::string &name,
                              const std::vector<std::string> &envs,
                              int64_t count, SnrPolicy policy) {
    SplitRecord split;
    split.name = name;
    split.clip_len_s = 20.0;
    for (int64_t i = 0; i < count; ++i) {
      ClipRecord c;
      char id[64];
      std::snprintf(id, sizeof(id), "%s_%05lld", name.c_str(),
                    static_cast<long long>(i));
      c.clip_id = id;
      c.split = name;
      c.env_id = envs[i % envs.size()];
      c.event_seed = DeriveSeed(cfg.master_seed, "events:" + name, i);
      c.noise_seed = DeriveSeed(cfg.master_seed, "noise:" + name, i);
      Rng snr_rng(DeriveSeed(cfg.master_seed, "snr:" + name, i));
      switch (policy) {
        case SnrPolicy::kClean: c.snr_db = kSnrClean; break;
        case SnrPolicy::kRange: c.snr_db = snr_rng.Uniform(6.0, 30.0); break;
        case SnrPolicy::kFixed20: c.snr_db = 20.0; break;
      }
      c.wav_path = "clips/" + name + "/" + c.clip_id + ".wav";
      c.labels_path = "labels/" + name + "/" + c.clip_id + ".csv";
      c.clip_len_s = 20.0;
      split.clips.push_back(c);
    }
    m.splits[name] = split;
  };

  make_scene_split("Train-rev", revS, cfg.TrainClips(), SnrPolicy::kRange);
  make_scene_split("Train-anec", {"anechoic"}, cfg.TrainClips(),
                   SnrPolicy::kClean);
  make_scene_split("Train-target", test_envs, cfg.TrainClips(),
                   SnrPolicy::kRange);
  make_scene_split("Train-base", revC, cfg.TrainClips(), SnrPolicy::kRange);
  make_scene_split("Test", test_envs, cfg.TestClips(), SnrPolicy::kFixed20);

  // Train-echo-rev pairs 1:1 with Train-rev: same environment and SNR,
  // independent noise.
  {
    SplitRecord split;
    split.name = "Train-echo-rev";
    split.clip_len_s = kEchoClipLenS;
    split.is_echo_split = true;
    auto &train_rev = m.splits["Train-rev"];
    for (size_t i = 0; i < train_rev.clips.size(); ++i) {
      auto &scene = train_rev.clips[i];
      ClipRecord c;
      char id[64];
      std::snprintf(id, sizeof(id), "Train-echo-rev_%05lld",
                    static_cast<long long>(i));
      c.clip_id = id;
      c.split = split.name;
      c.env_id = scene.env_id;
      c.snr_db = scene.snr_db;
      c.noise_seed = DeriveSeed(cfg.master_seed, "noise:Train-echo-rev",
                                static_cast<uint64_t>(i));
      c.wav_path = "clips/Train-echo-rev/" + c.clip_id + ".wav";
      c.clip_len_s = kEchoClipLenS;
      scene.echo_clip_id = c.clip_id;
      split.clips.push_back(c);
    }
    m.splits[split.name] = split;
  }
  // Train-echo-anec: a single clean clip with only the direct sweep.
  {
    SplitRecord split;
    split.name = "Train-echo-anec";
    split.clip_len_s = kEchoClipLenS;
    split.is_echo_split = true;
    ClipRecord c;
    c.clip_id = "Train-echo-anec_00000";
    c.split = split.name;
    c.env_id = "anechoic";
    c.snr_db = kSnrClean;
    c.wav_path = "clips/Train-echo-anec/" + c.clip_id + ".wav";
    c.clip_len_s = kEchoClipLenS;
    split.clips.push_back(c);
    m.splits[split.name] = split;
    for (auto &scene : m.splits["Train-anec"].clips)
      scene.echo_clip_id = c.clip_id;
  }
  // Test-echo: one clip per test environment at the test SNR.
  {
    SplitRecord split;
    split.name = "Test-echo";
    split.clip_len_s = kEchoClipLenS;
    split.is_echo_split = true;
    for (size_t i = 0; i < test_envs.size(); ++i) {
      ClipRecord c;
      char id[64];
      std::snprintf(id, sizeof(id), "Test-echo_%05lld",
                    static_cast<long long>(i));
      c.clip_id = id;
      c.split = split.name;
      c.env_id = test_envs[i];
      c.snr_db = 20.0;
      c.noise_seed = DeriveSeed(cfg.master_seed, "noise:Test-echo",
                                static_cast<uint64_t>(i));
      c.wav_path = "clips/Test-echo/" + c.clip_id + ".wav";
      c.clip_len_s = kEchoClipLenS;
      split.clips.push_back(c);
    }
    m.splits[split.name] = split;
    for (auto &scene : m.splits["Test"].clips) {
      for (const auto &e : m.splits["Test-echo"].clips)
        if (e.env_id == scene.env_id) scene.echo_clip_id = e.clip_id;
    }
    for (auto &scene : m.splits["Train-target"].clips) {
      for (const auto &e : m.splits["Test-echo"].clips)
        if (e.env_id == scene.env_id) scene.echo_clip_id = e.clip_id;
    }
  }
  return m;
}

// --- materialization -----------------------------------------------------

struct BuildReport {
  bool verified_existing = false;
  int64_t files_written = 0;
  int64_t files_verified = 0;
  std::vector<std::string> mismatches;
};

// In-memory IR bank for synthesis and evaluation.
class IrBank {
 public:
  IrBank() = default;

  // Simulates every IR in the manifest (used while building).
  void SimulateAll(const DatasetManifest &m) {
    for (const auto &env : m.environments) {
      auto it = m.irs.find(env.env_id);
      if (it == m.irs.end()) continue;
      auto &store = storage_[env.env_id];
      store.reserve(it->second.size());
      for (const auto &rec : it->second)
        store.push_back(SimulateIr(env, rec.placement, m.config.max_order));
      RebuildIndex(env.env_id);
    }
  }

  // Loads IRs from WAV files (used by evaluation on an existing dataset).
  void LoadAll(const DatasetManifest &m, const std::string &root) {
    for (const auto &[env_id, records] : m.irs) {
      auto &store = storage_[env_id];
      store.reserve(records.size());
      for (const auto &rec : records) {
        ImpulseResponse ir;
        ir.audio = ReadWav(root + "/" + rec.path);
        ir.placement = rec.placement;
        ir.env_id = env_id;
        store.push_back(std::move(ir));
      }
      RebuildIndex(env_id);
    }
  }

  const IrSet &Set(const std::string &env_id) const {
    auto it = sets_.find(env_id);
    EARSELD_CHECK(it != sets_.end(), MissingIRError,
                  "no IRs for env " << env_id);
    return it->second;
  }

  const std::vector<ImpulseResponse> &All(const std::string &env_id) const {
    return storage_.at(env_id);
  }

  // Non-echo placements available for event sampling in one environment.
  std::vector<SourcePlacement> EventPlacements(
      const DatasetManifest &m, const std::string &env_id) const {
    std::vector<SourcePlacement> out;
    for (const auto &rec : m.irs.at(env_id))
      if (!rec.is_echo) out.push_back(rec.placement);
    // The frontal grid point may double as the echo IR; keep it.
    if (out.empty())
      for (const auto &rec : m.irs.at(env_id)) out.push_back(rec.placement);
    return out;
  }

 private:
  void RebuildIndex(const std::string &env_id) {
    auto &set = sets_[env_id];
    set = IrSet();
    for (const auto &ir : storage_[env_id]) set.Add(ir);
  }

  std::map<std::string, std::vector<ImpulseResponse>> storage_;
  std::map<std::string, IrSet> sets_;
};

inline const EnvironmentSpec &FindEnv(const DatasetManifest &m,
                                      const std::string &env_id) {
  for (const auto &env : m.environments)
    if (env.env_id == env_id) return env;
  throw ConfigError("unknown environment: " + env_id);
}

// Builds (or verifies) the dataset under root. If a manifest already exists
// and force is false, file checksums are verified and nothing is rewritten.
inline BuildReport BuildDataset(const DatasetConfig &cfg,
                                const std::string &root, bool force = false) {
  namespace fs = std::filesystem;
  BuildReport report;
  const std::string manifest_path = root + "/manifest.json";

  if (!force && fs::exists(manifest_path)) {
    std::ifstream f(manifest_path);
    json j = json::parse(f);
    DatasetManifest existing = ManifestFromJson(j);
    for (const auto &[path, want] : existing.checksums) {
      std::string got = dataset_detail::Fnv64File(root + "/" + path);
      if (got != want)
        report.mismatches.push_back(path);
      else
        ++report.files_verified;
    }
    report.verified_existing = true;
    return report;
  }

  DatasetManifest m = PlanDataset(cfg);
  fs::create_directories(root);

  if (!cfg.plan_only) {
    IrBank bank;
    bank.SimulateAll(m);

    // IR files.
    for (const auto &[env_id, records] : m.irs) {
      fs::create_directories(root + "/irs/" + env_id);
      const auto &store = bank.All(env_id);
      for (size_t i = 0; i < records.size(); ++i) {
        WriteWav(root + "/" + records[i].path, store[i].audio);
        ++report.files_written;
      }
    }

    DrySourceBank dry(cfg.master_seed);
    for (int c = 0; c < kNumClasses; ++c)
      for (int v = 0; v < kNumVariations; ++v) dry.Get(c, v);

    for (const auto &name : AllSplitNames()) {
      auto &split = m.splits[name];
      fs::create_directories(root + "/clips/" + name);
      if (!split.is_echo_split)
        fs::create_directories(root + "/labels/" + name);
      for (auto &clip : split.clips) {
        const EnvironmentSpec &env = FindEnv(m, clip.env_id);
        if (split.is_echo_split) {
          const ImpulseResponse *echo_ir = nullptr;
          for (const auto &ir : bank.All(clip.env_id))
            if (ir.placement.azimuth_deg == 0 &&
                ir.placement.elevation_deg == 0 &&
                ir.placement.distance_cm == 150)
              echo_ir = &ir;
          EARSELD_CHECK(echo_ir, MissingIRError,
                        "no echo IR for env " << clip.env_id);
          std::optional<AudioBuffer> noise;
          if (!IsClean(clip.snr_db)) {
            EnvironmentSpec noisy = env;
            noisy.noise_seed = clip.noise_seed;
            noise = SimulateNoise(noisy, clip.clip_len_s);
          }
          EchoClip echo = SynthesizeEcho(clip.env_id, *echo_ir, clip.snr_db,
                                         noise ? &*noise : nullptr);
          WriteWav(root + "/" + clip.wav_path, echo.audio);
          ++report.files_written;
        } else {
          Rng event_rng(clip.event_seed);
          auto placements = bank.EventPlacements(m, clip.env_id);
          auto events = SampleEvents(event_rng, placements, dry, clip.env_id,
                                     clip.clip_len_s);
          AudioBuffer noise;
          if (!IsClean(clip.snr_db)) {
            EnvironmentSpec noisy = env;
            noisy.noise_seed = clip.noise_seed;
            noise = SimulateNoise(noisy, clip.clip_len_s);
          }
          auto [scene, ref] =
              SynthesizeScene(events, bank.Set(clip.env_id), dry, noise,
                              clip.snr_db, clip.clip_len_s);
          WriteWav(root + "/" + clip.wav_path, scene.audio);
          WriteLabelsCsv(root + "/" + clip.labels_path, ref);
          report.files_written += 2;
        }
      }
    }

    for (const auto &[env_id, records] : m.irs)
      for (const auto &r : records)
        m.checksums[r.path] = dataset_detail::Fnv64File(root + "/" + r.path);
    for (const auto &[name, split] : m.splits)
      for (const auto &c : split.clips) {
        m.checksums[c.wav_path] =
            dataset_detail::Fnv64File(root + "/" + c.wav_path);
        if (!c.labels_path.empty())
          m.checksums[c.labels_path] =
              dataset_detail::Fnv64File(root + "/" + c.labels_path);
      }
  }

  std::ofstream f(manifest_path);
  EARSELD_CHECK(f.good(), IoError, "cannot write manifest: " << manifest_path);
  f << ToJson(m).dump(1) << "\n";
  ++report.files_written;
  return report;
}

inline DatasetManifest LoadManifest(const std::string &root) {
  std::ifstream f(root + "/manifest.json");
  EARSELD_CHECK(f.good(), IoError, "no manifest under " << root);
  return ManifestFromJson(json::parse(f));
}

// --- feature cache -------------------------------------------------------

// One binary blob per clip, layout (channels, frames, mels) as declared in
// the manifest.
inline void WriteFeatureCache(const std::string &path, const FeatureMap &fm) {
  std::ofstream f(path, std::ios::binary);
  EARSELD_CHECK(f.good(), IoError, "cannot write feature cache: " << path);
  const char magic[8] = {'E', 'A', 'R', 'F', 'E', 'A', 'T', '1'};
  f.write(magic, 8);
  uint32_t dims[4] = {static_cast<uint32_t>(fm.values.dim(0)),
                      static_cast<uint32_t>(fm.values.dim(1)),
                      static_cast<uint32_t>(fm.values.dim(2)),
                      fm.kind == FeatureKind::kScene ? 0u : 1u};
  f.write(reinterpret_cast<const char *>(dims), sizeof(dims));
  f.write(reinterpret_cast<const char *>(fm.values.data()),
          static_cast<std::streamsize>(fm.values.numel() * sizeof(float)));
}

inline std::optional<FeatureMap> ReadFeatureCache(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f.good()) return std::nullopt;
  char magic[8];
  f.read(magic, 8);
  if (std::memcmp(magic, "EARFEAT1", 8) != 0) return std::nullopt;
  uint32_t dims[4];
  f.read(reinterpret_cast<char *>(dims), sizeof(dims));
  FeatureMap fm;
  fm.kind = dims[3] == 0 ? FeatureKind::kScene : FeatureKind::kEcho;
  fm.frame_rate = static_cast<double>(kSampleRate) / FeatureHop(fm.kind);
  fm.values = Tensor<float>({dims[0], dims[1], dims[2]});
  f.read(reinterpret_cast<char *>(fm.values.data()),
         static_cast<std::streamsize>(fm.values.numel() * sizeof(float)));
  if (!f.good()) return std::nullopt;
  return fm;
}

// Loads clip features, via the on-disk cache when possible.
inline FeatureMap ClipFeatures(const std::string &root, const ClipRecord &clip,
                               bool is_echo) {
  namespace fs = std::filesystem;
  const std::string cache_dir = root + "/features";
  const std::string cache_path = cache_dir + "/" + clip.clip_id + ".bin";
  if (auto cached = ReadFeatureCache(cache_path)) return std::move(*cached);
  AudioBuffer audio = ReadWav(root + "/" + clip.wav_path);
  FeatureMap fm = ExtractFeatures(
      audio, is_echo ? FeatureKind::kEcho : FeatureKind::kScene);
  fs::create_directories(cache_dir);
  WriteFeatureCache(cache_path, fm);
  return fm;
}

}  // namespace earseld

#endif  // EARSELD_SCENE_DATASET_H_
