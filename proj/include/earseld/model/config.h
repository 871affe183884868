// earseld/model/config.h
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

#ifndef EARSELD_MODEL_CONFIG_H_
#define EARSELD_MODEL_CONFIG_H_

#include <algorithm>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "earseld/common.h"

namespace earseld {

// Architecture hyperparameters. Defaults mirror the DCASE2020 baseline main
// branch (3 conv blocks of 64 filters, Bi-GRU 256 per direction) with the
// 16-dim echo embedding and (512, 512, 128, 1) domain classifier.
struct ModelConfig {
  int n_classes = kNumClasses;
  int n_mels = kNumMels;
  std::vector<int> main_filters = {64, 64, 64};
  std::vector<std::pair<int, int>> main_pool = {{5, 4}, {1, 4}, {1, 2}};
  int gru_layers = 2;
  int gru_hidden = 256;  // per direction
  int head_hidden = 128;
  std::vector<int> domain_hidden = {512, 128};
  std::vector<int> echo_filters = {16, 32, 64, 4};
  int z_dim = 16;
  int echo_frames = 224;  // center-crop length; 2^4 pooling divides evenly
  bool use_domain = true;
  bool use_echo = true;

  int feature_channels() const { return 7; }

  int freq_after_pool() const {
    int f = n_mels;
    for (auto &[pt, pf] : main_pool) f /= pf;
    return f;
  }
  int time_pool_factor() const {
    int p = 1;
    for (auto &[pt, pf] : main_pool) p *= pt;
    return p;
  }
  // Per-frame width of the extracted feature f.
  int cf() const { return main_filters.back() * freq_after_pool(); }
  int rnn_input() const { return cf() + (use_echo ? z_dim : 0); }
  int rnn_output() const { return 2 * gru_hidden; }

  int echo_bottleneck_t() const { return echo_frames / 16; }
  int echo_bottleneck_f() const { return n_mels / 16; }
  int echo_bottleneck() const {
    return echo_filters.back() * echo_bottleneck_t() * echo_bottleneck_f();
  }

  void Validate() const {
    EARSELD_CHECK(main_filters.size() == main_pool.size(), ConfigError,
                  "one pooling pair per conv block");
    EARSELD_CHECK(echo_filters.size() == 4, ConfigError,
                  "echo encoder uses 4 blocks");
    EARSELD_CHECK(echo_frames % 16 == 0 && n_mels % 16 == 0, ConfigError,
                  "echo pooling must divide evenly");
    int f = n_mels;
    for (auto &[pt, pf] : main_pool) {
      EARSELD_CHECK(f % pf == 0, ConfigError, "freq pooling must divide");
      f /= pf;
    }
    EARSELD_CHECK(domain_hidden.size() == 2, ConfigError,
                  "domain classifier has two hidden layers");
  }

  // Miniature setting for gradient checking: 1 CNN block, 8 filters,
  // 8 recurrent units, 2 classes.
  static ModelConfig Miniature() {
    ModelConfig c;
    c.n_classes = 2;
    c.main_filters = {8};
    c.main_pool = {{5, 4}};
    c.gru_layers = 1;
    c.gru_hidden = 8;
    c.head_hidden = 8;
    c.domain_hidden = {16, 8};
    c.echo_filters = {4, 4, 4, 2};
    c.z_dim = 4;
    c.echo_frames = 32;
    return c;
  }

  // Uniformly narrows the network (CPU-friendly width for the long trend
  // runs). The domain classifier tracks the refiner output width.
  ModelConfig WidthScaled(double s) const {
    auto scale = [s](int v) { return std::max(2, static_cast<int>(v * s)); };
    ModelConfig c = *this;
    for (auto &f : c.main_filters) f = scale(f);
    c.gru_hidden = scale(c.gru_hidden);
    c.head_hidden = scale(c.head_hidden);
    for (size_t i = 0; i + 1 < c.echo_filters.size(); ++i)
      c.echo_filters[i] = scale(c.echo_filters[i]);
    c.domain_hidden = {c.rnn_output(), std::max(2, c.rnn_output() / 4)};
    return c;
  }
};

inline void to_json(nlohmann::json &j, const ModelConfig &c) {
  j = nlohmann::json{{"n_classes", c.n_classes},
                     {"n_mels", c.n_mels},
                     {"main_filters", c.main_filters},
                     {"main_pool", c.main_pool},
                     {"gru_layers", c.gru_layers},
                     {"gru_hidden", c.gru_hidden},
                     {"head_hidden", c.head_hidden},
                     {"domain_hidden", c.domain_hidden},
                     {"echo_filters", c.echo_filters},
                     {"z_dim", c.z_dim},
                     {"echo_frames", c.echo_frames},
                     {"use_domain", c.use_domain},
                     {"use_echo", c.use_echo}};
}

inline void from_json(const nlohmann::json &j, ModelConfig &c) {
  j.at("n_classes").get_to(c.n_classes);
  j.at("n_mels").get_to(c.n_mels);
  j.at("main_filters").get_to(c.main_filters);
  j.at("main_pool").get_to(c.main_pool);
  j.at("gru_layers").get_to(c.gru_layers);
  j.at("gru_hidden").get_to(c.gru_hidden);
  j.at("head_hidden").get_to(c.head_hidden);
  j.at("domain_hidden").get_to(c.domain_hidden);
  j.at("echo_filters").get_to(c.echo_filters);
  j.at("z_dim").get_to(c.z_dim);
  j.at("echo_frames").get_to(c.echo_frames);
  j.at("use_domain").get_to(c.use_domain);
  j.at("use_echo").get_to(c.use_echo);
}

}  // namespace earseld

#endif  // EARSELD_MODEL_CONFIG_H_
