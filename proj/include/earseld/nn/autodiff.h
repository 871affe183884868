// earseld/nn/autodiff.h
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
// Define-by-run reverse-mode tape. Ops append a backward closure; Backward()
// replays them in reverse. Scalar type is a template parameter so the same
// graph runs in float for training and double for gradient checks.

#ifndef EARSELD_NN_AUTODIFF_H_
#define EARSELD_NN_AUTODIFF_H_

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "earseld/tensor.h"

namespace earseld {

template <typename S>
struct VarData {
  Tensor<S> value;
  Tensor<S> grad;  // allocated iff requires_grad
  bool requires_grad = true;

  void EnsureGrad() {
    if (requires_grad && grad.numel() != value.numel())
      grad = Tensor<S>(value.shape());
  }
};

template <typename S>
using Var = std::shared_ptr<VarData<S>>;

template <typename S>
class Tape {
 public:
  Var<S> MakeVar(Tensor<S> value, bool requires_grad = true) {
    auto v = std::make_shared<VarData<S>>();
    v->value = std::move(value);
    v->requires_grad = requires_grad;
    v->EnsureGrad();
    return v;
  }

  Var<S> MakeLeaf(Tensor<S> value) { return MakeVar(std::move(value), false); }

  void PushBackward(std::function<void()> fn) {
    backward_.push_back(std::move(fn));
  }

  // Seeds d(loss)/d(loss) = 1 and replays the tape in reverse. Parameter
  // gradients accumulate across calls until the optimizer clears them.
  void Backward(const Var<S> &loss) {
    EARSELD_CHECK(loss->value.numel() == 1, ShapeError,
                  "backward needs a scalar loss");
    loss->EnsureGrad();
    loss->grad[0] += S(1);
    for (auto it = backward_.rbegin(); it != backward_.rend(); ++it) (*it)();
  }

  void Clear() { backward_.clear(); }
  size_t size() const { return backward_.size(); }

 private:
  std::vector<std::function<void()>> backward_;
};

}  // namespace earseld

#endif  // EARSELD_NN_AUTODIFF_H_
