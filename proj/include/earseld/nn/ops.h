// earseld/nn/ops.h
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
// Primitive differentiable ops. Convention: every op computes the forward
// result, returns a new Var and pushes one closure that scatters the output
// gradient back to its inputs.

#ifndef EARSELD_NN_OPS_H_
#define EARSELD_NN_OPS_H_

#include <cmath>

#include "earseld/nn/autodiff.h"
#include "earseld/nn/blas.h"

namespace earseld {

template <typename S>
S StableSigmoid(S x) {
  if (x >= 0) return S(1) / (S(1) + std::exp(-x));
  S e = std::exp(x);
  return e / (S(1) + e);
}

// y = x * W + b where x is (..., in), W (in, out), b (out).
template <typename S>
Var<S> Linear(Tape<S> &tape, const Var<S> &x, const Var<S> &w,
              const Var<S> &b) {
  const auto &xs = x->value.shape();
  const int64_t in = xs.back();
  const int64_t rows = x->value.numel() / in;
  EARSELD_CHECK(w->value.ndim() == 2 && w->value.dim(0) == in, ShapeError,
                "linear weight mismatch: in=" << in);
  const int64_t out = w->value.dim(1);
  EARSELD_CHECK(b->value.numel() == out, ShapeError, "linear bias mismatch");

  std::vector<int64_t> out_shape(xs.begin(), xs.end() - 1);
  out_shape.push_back(out);
  Tensor<S> y(out_shape);
  if (rows > 0)
    Gemm<S>(false, false, rows, out, in, S(1), x->value.data(), in,
            w->value.data(), out, S(0), y.data(), out);
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < out; ++c) y[r * out + c] += b->value[c];

  Var<S> result = tape.MakeVar(std::move(y));
  tape.PushBackward([x, w, b, result, rows, in, out]() {
    const S *dy = result->grad.data();
    if (w->requires_grad)
      Gemm<S>(true, false, in, out, rows, S(1), x->value.data(), in, dy, out,
              S(1), w->grad.data(), out);
    if (b->requires_grad)
      for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < out; ++c) b->grad[c] += dy[r * out + c];
    if (x->requires_grad)
      Gemm<S>(false, true, rows, in, out, S(1), dy, out, w->value.data(), out,
              S(1), x->grad.data(), in);
  });
  return result;
}

template <typename S>
Var<S> Relu(Tape<S> &tape, const Var<S> &x) {
  Tensor<S> y(x->value.shape());
  for (int64_t i = 0; i < y.numel(); ++i)
    y[i] = x->value[i] > 0 ? x->value[i] : S(0);
  Var<S> result = tape.MakeVar(std::move(y));
  tape.PushBackward([x, result]() {
    if (!x->requires_grad) return;
    for (int64_t i = 0; i < result->grad.numel(); ++i)
      if (result->value[i] > 0) x->grad[i] += result->grad[i];
  });
  return result;
}

template <typename S>
Var<S> Sigmoid(Tape<S> &tape, const Var<S> &x) {
  Tensor<S> y(x->value.shape());
  for (int64_t i = 0; i < y.numel(); ++i) y[i] = StableSigmoid(x->value[i]);
  Var<S> result = tape.MakeVar(std::move(y));
  tape.PushBackward([x, result]() {
    if (!x->requires_grad) return;
    for (int64_t i = 0; i < result->grad.numel(); ++i) {
      S s = result->value[i];
      x->grad[i] += result->grad[i] * s * (S(1) - s);
    }
  });
  return result;
}

template <typename S>
Var<S> Tanh(Tape<S> &tape, const Var<S> &x) {
  Tensor<S> y(x->value.shape());
  for (int64_t i = 0; i < y.numel(); ++i) y[i] = std::tanh(x->value[i]);
  Var<S> result = tape.MakeVar(std::move(y));
  tape.PushBackward([x, result]() {
    if (!x->requires_grad) return;
    for (int64_t i = 0; i < result->grad.numel(); ++i) {
      S t = result->value[i];
      x->grad[i] += result->grad[i] * (S(1) - t * t);
    }
  });
  return result;
}

// Gradient reversal: identity forward, grad * (-lambda) backward.
template <typename S>
Var<S> GradientReversal(Tape<S> &tape, const Var<S> &x, S lambda) {
  EARSELD_CHECK(lambda >= 0, ConfigError, "GRL scale must be >= 0");
  Tensor<S> y = x->value;
  Var<S> result = tape.MakeVar(std::move(y));
  tape.PushBackward([x, result, lambda]() {
    if (!x->requires_grad) return;
    for (int64_t i = 0; i < result->grad.numel(); ++i)
      x->grad[i] += -lambda * result->grad[i];
  });
  return result;
}

// (B, T, C) -> (B, C): mean over frames.
template <typename S>
Var<S> MeanOverTime(Tape<S> &tape, const Var<S> &x) {
  EARSELD_CHECK(x->value.ndim() == 3, ShapeError, "MeanOverTime wants 3D");
  const int64_t b = x->value.dim(0), t = x->value.dim(1), c = x->value.dim(2);
  Tensor<S> y({b, c});
  for (int64_t i = 0; i < b; ++i)
    for (int64_t j = 0; j < t; ++j)
      for (int64_t k = 0; k < c; ++k) y.at(i, k) += x->value.at(i, j, k);
  const S inv = S(1) / static_cast<S>(t);
  for (int64_t i = 0; i < y.numel(); ++i) y[i] *= inv;
  Var<S> result = tape.MakeVar(std::move(y));
  tape.PushBackward([x, result, b, t, c, inv]() {
    if (!x->requires_grad) return;
    for (int64_t i = 0; i < b; ++i)
      for (int64_t j = 0; j < t; ++j)
        for (int64_t k = 0; k < c; ++k)
          x->grad.at(i, j, k) += result->grad.at(i, k) * inv;
  });
  return result;
}

// f (B, T, C) ++ z (B, Z) broadcast along T -> (B, T, C+Z).
template <typename S>
Var<S> ConcatTimeBroadcast(Tape<S> &tape, const Var<S> &f, const Var<S> &z) {
  EARSELD_CHECK(f->value.ndim() == 3 && z->value.ndim() == 2 &&
                    f->value.dim(0) == z->value.dim(0),
                ShapeError, "ConcatTimeBroadcast shape mismatch");
  const int64_t b = f->value.dim(0), t = f->value.dim(1), c = f->value.dim(2);
  const int64_t zc = z->value.dim(1);
  Tensor<S> y({b, t, c + zc});
  for (int64_t i = 0; i < b; ++i)
    for (int64_t j = 0; j < t; ++j) {
      for (int64_t k = 0; k < c; ++k) y.at(i, j, k) = f->value.at(i, j, k);
      for (int64_t k = 0; k < zc; ++k) y.at(i, j, c + k) = z->value.at(i, k);
    }
  Var<S> result = tape.MakeVar(std::move(y));
  tape.PushBackward([f, z, result, b, t, c, zc]() {
    for (int64_t i = 0; i < b; ++i)
      for (int64_t j = 0; j < t; ++j) {
        if (f->requires_grad)
          for (int64_t k = 0; k < c; ++k)
            f->grad.at(i, j, k) += result->grad.at(i, j, k);
        if (z->requires_grad)
          for (int64_t k = 0; k < zc; ++k)
            z->grad.at(i, k) += result->grad.at(i, j, c + k);
      }
  });
  return result;
}

// (B, C, T, F) -> (B, T, C*F): per-frame feature vector for the recurrent
// stack, channel-major within the frame.
template <typename S>
Var<S> FlattenToFrames(Tape<S> &tape, const Var<S> &x) {
  EARSELD_CHECK(x->value.ndim() == 4, ShapeError, "FlattenToFrames wants 4D");
  const int64_t b = x->value.dim(0), c = x->value.dim(1), t = x->value.dim(2),
                f = x->value.dim(3);
  Tensor<S> y({b, t, c * f});
  for (int64_t i = 0; i < b; ++i)
    for (int64_t j = 0; j < c; ++j)
      for (int64_t k = 0; k < t; ++k)
        for (int64_t l = 0; l < f; ++l)
          y.at(i, k, j * f + l) = x->value.at(i, j, k, l);
  Var<S> result = tape.MakeVar(std::move(y));
  tape.PushBackward([x, result, b, c, t, f]() {
    if (!x->requires_grad) return;
    for (int64_t i = 0; i < b; ++i)
      for (int64_t j = 0; j < c; ++j)
        for (int64_t k = 0; k < t; ++k)
          for (int64_t l = 0; l < f; ++l)
            x->grad.at(i, j, k, l) += result->grad.at(i, k, j * f + l);
  });
  return result;
}

// Reshape that shares no storage (copies); used for bottleneck flattening.
template <typename S>
Var<S> Reshape(Tape<S> &tape, const Var<S> &x, std::vector<int64_t> shape) {
  Tensor<S> y = x->value;
  y.Reshape(std::move(shape));
  Var<S> result = tape.MakeVar(std::move(y));
  tape.PushBackward([x, result]() {
    if (!x->requires_grad) return;
    for (int64_t i = 0; i < x->grad.numel(); ++i)
      x->grad[i] += result->grad[i];
  });
  return result;
}

// --- losses -------------------------------------------------------------

// Binary cross entropy over all elements of pred against {0,1} targets,
// normalized by `denom` (pass pred count for a plain mean). Predictions are
// probabilities; they are clamped away from {0,1} before the logs.
template <typename S>
Var<S> BceSumLoss(Tape<S> &tape, const Var<S> &pred, const Tensor<S> &target,
                  S denom) {
  EARSELD_CHECK(pred->value.numel() == target.numel(), ShapeError,
                "BCE target shape mismatch");
  EARSELD_CHECK(denom > 0, ConfigError, "BCE denom must be positive");
  const S eps = S(1e-7);
  double acc = 0;
  for (int64_t i = 0; i < target.numel(); ++i) {
    S p = std::min(std::max(pred->value[i], eps), S(1) - eps);
    acc += -(static_cast<double>(target[i]) * std::log(static_cast<double>(p)) +
             (1.0 - static_cast<double>(target[i])) *
                 std::log(1.0 - static_cast<double>(p)));
  }
  Tensor<S> y({1});
  y[0] = static_cast<S>(acc / static_cast<double>(denom));
  Var<S> result = tape.MakeVar(std::move(y));
  auto target_copy = std::make_shared<Tensor<S>>(target);
  tape.PushBackward([pred, result, target_copy, denom, eps]() {
    if (!pred->requires_grad) return;
    const S g = result->grad[0] / denom;
    for (int64_t i = 0; i < target_copy->numel(); ++i) {
      S raw = pred->value[i];
      if (raw < eps || raw > S(1) - eps) continue;  // clamped: flat region
      pred->grad[i] +=
          g * (-(*target_copy)[i] / raw + (S(1) - (*target_copy)[i]) / (S(1) - raw));
    }
  });
  return result;
}

// Sum of mask * (pred - target)^2 / denom. Pass denom = number of masked
// elements for the masked mean (0 active -> loss 0 via denom = 1).
template <typename S>
Var<S> MaskedMseLoss(Tape<S> &tape, const Var<S> &pred,
                     const Tensor<S> &target, const Tensor<S> &mask, S denom) {
  EARSELD_CHECK(pred->value.numel() == target.numel() &&
                    target.numel() == mask.numel(),
                ShapeError, "masked MSE shape mismatch");
  EARSELD_CHECK(denom > 0, ConfigError, "MSE denom must be positive");
  double acc = 0;
  for (int64_t i = 0; i < target.numel(); ++i) {
    double d = static_cast<double>(pred->value[i]) - target[i];
    acc += static_cast<double>(mask[i]) * d * d;
  }
  Tensor<S> y({1});
  y[0] = static_cast<S>(acc / static_cast<double>(denom));
  Var<S> result = tape.MakeVar(std::move(y));
  auto t_copy = std::make_shared<Tensor<S>>(target);
  auto m_copy = std::make_shared<Tensor<S>>(mask);
  tape.PushBackward([pred, result, t_copy, m_copy, denom]() {
    if (!pred->requires_grad) return;
    const S g = result->grad[0] / denom;
    for (int64_t i = 0; i < t_copy->numel(); ++i)
      pred->grad[i] += g * S(2) * (*m_copy)[i] * (pred->value[i] - (*t_copy)[i]);
  });
  return result;
}

// Mean squared error against a Var target (used for the echo
// reconstruction, where gradients flow into both sides of the pair).
template <typename S>
Var<S> MseLossVar(Tape<S> &tape, const Var<S> &pred, const Var<S> &target,
                  S denom) {
  EARSELD_CHECK(pred->value.numel() == target->value.numel(), ShapeError,
                "MSE shape mismatch");
  double acc = 0;
  for (int64_t i = 0; i < pred->value.numel(); ++i) {
    double d = static_cast<double>(pred->value[i]) - target->value[i];
    acc += d * d;
  }
  Tensor<S> y({1});
  y[0] = static_cast<S>(acc / static_cast<double>(denom));
  Var<S> result = tape.MakeVar(std::move(y));
  tape.PushBackward([pred, target, result, denom]() {
    const S g = result->grad[0] / denom * S(2);
    for (int64_t i = 0; i < pred->value.numel(); ++i) {
      S d = pred->value[i] - target->value[i];
      if (pred->requires_grad) pred->grad[i] += g * d;
      if (target->requires_grad) target->grad[i] -= g * d;
    }
  });
  return result;
}

// total = sum_i weights[i] * scalars[i].
template <typename S>
Var<S> WeightedSum(Tape<S> &tape, const std::vector<Var<S>> &scalars,
                   const std::vector<S> &weights) {
  EARSELD_CHECK(scalars.size() == weights.size(), ShapeError,
                "WeightedSum arity mismatch");
  Tensor<S> y({1});
  for (size_t i = 0; i < scalars.size(); ++i) {
    EARSELD_CHECK(scalars[i]->value.numel() == 1, ShapeError,
                  "WeightedSum wants scalars");
    y[0] += weights[i] * scalars[i]->value[0];
  }
  Var<S> result = tape.MakeVar(std::move(y));
  auto terms = scalars;
  auto w = weights;
  tape.PushBackward([terms, w, result]() {
    for (size_t i = 0; i < terms.size(); ++i)
      if (terms[i]->requires_grad)
        terms[i]->grad[0] += w[i] * result->grad[0];
  });
  return result;
}

// scalar a + b.
template <typename S>
Var<S> AddScalars(Tape<S> &tape, const Var<S> &a, const Var<S> &b) {
  return WeightedSum(tape, {a, b}, {S(1), S(1)});
}

}  // namespace earseld

#endif  // EARSELD_NN_OPS_H_
