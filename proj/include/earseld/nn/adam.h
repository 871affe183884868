// earseld/nn/adam.h
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

#ifndef EARSELD_NN_ADAM_H_
#define EARSELD_NN_ADAM_H_

#include <cmath>
#include <vector>

#include "earseld/nn/params.h"

namespace earseld {

// Adaptive-moment optimizer with bias correction; moments (0.9, 0.999),
// eps 1e-8.
template <typename S>
class Adam {
 public:
  explicit Adam(ParamStore<S> &store, double lr = 0.01, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : store_(store), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto &e : store.entries()) {
      m_.emplace_back(e.var->value.shape());
      v_.emplace_back(e.var->value.shape());
    }
  }

  void Step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    auto &entries = store_.entries();
    for (size_t p = 0; p < entries.size(); ++p) {
      if (!entries[p].trainable) continue;
      auto &value = entries[p].var->value;
      auto &grad = entries[p].var->grad;
      auto &m = m_[p];
      auto &v = v_[p];
      for (int64_t i = 0; i < value.numel(); ++i) {
        const double g = static_cast<double>(grad[i]);
        m[i] = static_cast<S>(beta1_ * m[i] + (1.0 - beta1_) * g);
        v[i] = static_cast<S>(beta2_ * v[i] + (1.0 - beta2_) * g * g);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        value[i] -= static_cast<S>(lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
    store_.ZeroGrads();
  }

  double lr() const { return lr_; }
  int64_t steps() const { return t_; }

 private:
  ParamStore<S> &store_;
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Tensor<S>> m_, v_;
};

}  // namespace earseld

#endif  // EARSELD_NN_ADAM_H_
