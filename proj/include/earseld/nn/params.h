// earseld/nn/params.h
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

#ifndef EARSELD_NN_PARAMS_H_
#define EARSELD_NN_PARAMS_H_

#include <cmath>
#include <string>
#include <vector>

#include "earseld/nn/autodiff.h"
#include "earseld/rng.h"

namespace earseld {

// Named parameter registry. Every trainable tensor belongs to exactly one
// functional group (F, G, R, C, D, H); batch-norm running statistics are
// registered as non-trainable buffers so checkpoints capture them.
template <typename S>
class ParamStore {
 public:
  struct Entry {
    std::string name;
    std::string group;
    bool trainable = true;
    Var<S> var;
  };

  Var<S> Add(const std::string &name, const std::string &group,
             std::vector<int64_t> shape, bool trainable = true) {
    auto v = std::make_shared<VarData<S>>();
    v->value = Tensor<S>(std::move(shape));
    v->requires_grad = trainable;
    v->EnsureGrad();
    entries_.push_back({name, group, trainable, v});
    return v;
  }

  std::vector<Entry> &entries() { return entries_; }
  const std::vector<Entry> &entries() const { return entries_; }

  Entry *Find(const std::string &name) {
    for (auto &e : entries_)
      if (e.name == name) return &e;
    return nullptr;
  }

  void ZeroGrads() {
    for (auto &e : entries_)
      if (e.trainable) e.var->grad.Zero();
  }

  int64_t NumTrainable() const {
    int64_t n = 0;
    for (const auto &e : entries_)
      if (e.trainable) n += e.var->value.numel();
    return n;
  }
};

// Glorot uniform on [-limit, limit], limit = sqrt(6 / (fan_in + fan_out)).
template <typename S>
void GlorotInit(Rng &rng, Tensor<S> &t, int64_t fan_in, int64_t fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (int64_t i = 0; i < t.numel(); ++i)
    t[i] = static_cast<S>(rng.Uniform(-limit, limit));
}

// Uniform on [-1/sqrt(h), 1/sqrt(h)] for recurrent weights and biases.
template <typename S>
void RecurrentInit(Rng &rng, Tensor<S> &t, int64_t hidden) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (int64_t i = 0; i < t.numel(); ++i)
    t[i] = static_cast<S>(rng.Uniform(-limit, limit));
}

}  // namespace earseld

#endif  // EARSELD_NN_PARAMS_H_
