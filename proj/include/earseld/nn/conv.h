// earseld/nn/conv.h
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
// CNN building blocks as composite tape ops: 3x3/pad-1 convolution + batch
// norm + ReLU + max pooling (the encoder block), and nearest-neighbour 2x2
// upsampling + convolution (+ optional BN/ReLU) for the decoder.

#ifndef EARSELD_NN_CONV_H_
#define EARSELD_NN_CONV_H_

#include <memory>

#include "earseld/nn/ops.h"

namespace earseld {

namespace conv_detail {

// im2col for 3x3 pad-1 stride-1: col is (C*9, T*F), row-major.
template <typename S>
void Im2Col(const S *x, int64_t c_in, int64_t t, int64_t f, S *col) {
  for (int64_t c = 0; c < c_in; ++c) {
    const S *plane = x + c * t * f;
    for (int dt = -1; dt <= 1; ++dt) {
      for (int df = -1; df <= 1; ++df) {
        S *row = col + (c * 9 + (dt + 1) * 3 + (df + 1)) * (t * f);
        for (int64_t i = 0; i < t; ++i) {
          const int64_t si = i + dt;
          if (si < 0 || si >= t) {
            for (int64_t j = 0; j < f; ++j) row[i * f + j] = S(0);
            continue;
          }
          for (int64_t j = 0; j < f; ++j) {
            const int64_t sj = j + df;
            row[i * f + j] =
                (sj < 0 || sj >= f) ? S(0) : plane[si * f + sj];
          }
        }
      }
    }
  }
}

// Transposed scatter of col gradients back onto the input plane.
template <typename S>
void Col2ImAdd(const S *col, int64_t c_in, int64_t t, int64_t f, S *dx) {
  for (int64_t c = 0; c < c_in; ++c) {
    S *plane = dx + c * t * f;
    for (int dt = -1; dt <= 1; ++dt) {
      for (int df = -1; df <= 1; ++df) {
        const S *row = col + (c * 9 + (dt + 1) * 3 + (df + 1)) * (t * f);
        for (int64_t i = 0; i < t; ++i) {
          const int64_t si = i + dt;
          if (si < 0 || si >= t) continue;
          for (int64_t j = 0; j < f; ++j) {
            const int64_t sj = j + df;
            if (sj >= 0 && sj < f) plane[si * f + sj] += row[i * f + j];
          }
        }
      }
    }
  }
}

}  // namespace conv_detail

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

// Conv(3x3, pad 1) -> BatchNorm -> ReLU -> MaxPool(pool_t, pool_f).
// Remainder frames that do not fill a pooling window are dropped.
template <typename S>
struct ConvBlock {
  int64_t in_ch = 0, out_ch = 0;
  int pool_t = 1, pool_f = 1;
  Var<S> w;      // (out_ch, in_ch * 9)
  Var<S> bias;   // (out_ch)
  Var<S> gamma;  // (out_ch)
  Var<S> beta;   // (out_ch)
  Tensor<S> running_mean, running_var;

  Var<S> Forward(Tape<S> &tape, const Var<S> &x, bool training) {
    EARSELD_CHECK(x->value.ndim() == 4 && x->value.dim(1) == in_ch, ShapeError,
                  "ConvBlock input mismatch: want channels " << in_ch);
    const int64_t b = x->value.dim(0), t = x->value.dim(2), f = x->value.dim(3);
    const int64_t tf = t * f;
    const int64_t out_t = t / pool_t, out_f = f / pool_f;
    EARSELD_CHECK(out_t > 0 && out_f > 0, ShapeError, "pooling eats the map");

    // conv + bias
    auto pre_bn = std::make_shared<Tensor<S>>(
        std::vector<int64_t>{b, out_ch, t, f});
    {
      Tensor<S> col({in_ch * 9, tf});
      for (int64_t i = 0; i < b; ++i) {
        conv_detail::Im2Col(x->value.data() + i * in_ch * tf, in_ch, t, f,
                            col.data());
        Gemm<S>(false, false, out_ch, tf, in_ch * 9, S(1), w->value.data(),
                in_ch * 9, col.data(), tf, S(0),
                pre_bn->data() + i * out_ch * tf, tf);
      }
      for (int64_t i = 0; i < b; ++i)
        for (int64_t c = 0; c < out_ch; ++c) {
          S *plane = pre_bn->data() + (i * out_ch + c) * tf;
          const S bv = bias->value[c];
          for (int64_t k = 0; k < tf; ++k) plane[k] += bv;
        }
    }

    // batch norm
    auto xhat = std::make_shared<Tensor<S>>(std::vector<int64_t>{b, out_ch, t, f});
    auto inv_std = std::make_shared<Tensor<S>>(std::vector<int64_t>{out_ch});
    const int64_t per_ch = b * tf;
    for (int64_t c = 0; c < out_ch; ++c) {
      S mean, var;
      if (training) {
        double sum = 0, sumsq = 0;
        for (int64_t i = 0; i < b; ++i) {
          const S *plane = pre_bn->data() + (i * out_ch + c) * tf;
          for (int64_t k = 0; k < tf; ++k) {
            sum += plane[k];
            sumsq += static_cast<double>(plane[k]) * plane[k];
          }
        }
        mean = static_cast<S>(sum / per_ch);
        var = static_cast<S>(std::max(0.0, sumsq / per_ch -
                                               static_cast<double>(mean) * mean));
        running_mean[c] = static_cast<S>((1.0 - kBnMomentum)) * running_mean[c] +
                          static_cast<S>(kBnMomentum) * mean;
        running_var[c] = static_cast<S>((1.0 - kBnMomentum)) * running_var[c] +
                         static_cast<S>(kBnMomentum) * var;
      } else {
        mean = running_mean[c];
        var = running_var[c];
      }
      const S istd = S(1) / std::sqrt(var + static_cast<S>(kBnEps));
      (*inv_std)[c] = istd;
      for (int64_t i = 0; i < b; ++i) {
        const S *src = pre_bn->data() + (i * out_ch + c) * tf;
        S *dst = xhat->data() + (i * out_ch + c) * tf;
        for (int64_t k = 0; k < tf; ++k) dst[k] = (src[k] - mean) * istd;
      }
    }

    // ReLU + max pool, recording argmax positions.
    Tensor<S> pooled({b, out_ch, out_t, out_f});
    auto argmax = std::make_shared<std::vector<int32_t>>(
        static_cast<size_t>(b * out_ch * out_t * out_f));
    for (int64_t i = 0; i < b; ++i) {
      for (int64_t c = 0; c < out_ch; ++c) {
        const S g = gamma->value[c], be = beta->value[c];
        const S *xh = xhat->data() + (i * out_ch + c) * tf;
        for (int64_t pt = 0; pt < out_t; ++pt) {
          for (int64_t pf = 0; pf < out_f; ++pf) {
            S best = S(0);
            int32_t best_idx = -1;
            for (int dt = 0; dt < pool_t; ++dt) {
              const int64_t ti = pt * pool_t + dt;
              for (int df = 0; df < pool_f; ++df) {
                const int64_t fi = pf * pool_f + df;
                S v = g * xh[ti * f + fi] + be;
                if (v < 0) v = S(0);
                if (v > best) {
                  best = v;
                  best_idx = static_cast<int32_t>(ti * f + fi);
                }
              }
            }
            pooled.at(i, c, pt, pf) = best;
            (*argmax)[static_cast<size_t>(((i * out_ch + c) * out_t + pt) *
                                          out_f + pf)] = best_idx;
          }
        }
      }
    }

    Var<S> result = tape.MakeVar(std::move(pooled));
    Var<S> w_ = w, bias_ = bias, gamma_ = gamma, beta_ = beta;
    const int64_t in_ch_ = in_ch, oc = out_ch;
    const bool training_ = training;
    const int64_t ot = out_t, of = out_f;
    tape.PushBackward([x, result, w_, bias_, gamma_, beta_, xhat, inv_std,
                       argmax, b, t, f, tf, ot, of, in_ch_, oc,
                       training_]() {
      // Unpool + ReLU: route gradients to the recorded argmax positions.
      Tensor<S> d_bn({b, oc, t, f});
      for (int64_t i = 0; i < b; ++i)
        for (int64_t c = 0; c < oc; ++c)
          for (int64_t pt = 0; pt < ot; ++pt)
            for (int64_t pf = 0; pf < of; ++pf) {
              const size_t cell =
                  static_cast<size_t>(((i * oc + c) * ot + pt) * of + pf);
              const int32_t idx = (*argmax)[cell];
              if (idx < 0) continue;  // window entirely non-positive
              if (result->value.at(i, c, pt, pf) <= 0) continue;
              d_bn.data()[(i * oc + c) * tf + idx] +=
                  result->grad.at(i, c, pt, pf);
            }

      // Batch-norm backward.
      Tensor<S> d_conv({b, oc, t, f});
      const int64_t per_ch = b * tf;
      for (int64_t c = 0; c < oc; ++c) {
        const S g = gamma_->value[c];
        const S istd = (*inv_std)[c];
        double sum_dy = 0, sum_dy_xhat = 0;
        for (int64_t i = 0; i < b; ++i) {
          const S *dy = d_bn.data() + (i * oc + c) * tf;
          const S *xh = xhat->data() + (i * oc + c) * tf;
          for (int64_t k = 0; k < tf; ++k) {
            sum_dy += dy[k];
            sum_dy_xhat += static_cast<double>(dy[k]) * xh[k];
          }
        }
        if (gamma_->requires_grad)
          gamma_->grad[c] += static_cast<S>(sum_dy_xhat);
        if (beta_->requires_grad) beta_->grad[c] += static_cast<S>(sum_dy);
        const S mean_dy = static_cast<S>(sum_dy / per_ch);
        const S mean_dy_xhat = static_cast<S>(sum_dy_xhat / per_ch);
        for (int64_t i = 0; i < b; ++i) {
          const S *dy = d_bn.data() + (i * oc + c) * tf;
          const S *xh = xhat->data() + (i * oc + c) * tf;
          S *dc = d_conv.data() + (i * oc + c) * tf;
          if (training_) {
            for (int64_t k = 0; k < tf; ++k)
              dc[k] = g * istd * (dy[k] - mean_dy - xh[k] * mean_dy_xhat);
          } else {
            for (int64_t k = 0; k < tf; ++k) dc[k] = g * istd * dy[k];
          }
        }
      }

      // Convolution backward.
      Tensor<S> col({in_ch_ * 9, tf});
      Tensor<S> dcol({in_ch_ * 9, tf});
      for (int64_t i = 0; i < b; ++i) {
        const S *dy = d_conv.data() + i * oc * tf;
        if (w_->requires_grad) {
          conv_detail::Im2Col(x->value.data() + i * in_ch_ * tf, in_ch_, t, f,
                              col.data());
          Gemm<S>(false, true, oc, in_ch_ * 9, tf, S(1), dy, tf, col.data(),
                  tf, S(1), w_->grad.data(), in_ch_ * 9);
        }
        if (bias_->requires_grad)
          for (int64_t c = 0; c < oc; ++c) {
            double s = 0;
            for (int64_t k = 0; k < tf; ++k) s += dy[c * tf + k];
            bias_->grad[c] += static_cast<S>(s);
          }
        if (x->requires_grad) {
          Gemm<S>(true, false, in_ch_ * 9, tf, oc, S(1), w_->value.data(),
                  in_ch_ * 9, dy, tf, S(0), dcol.data(), tf);
          conv_detail::Col2ImAdd(dcol.data(), in_ch_, t, f,
                                 x->grad.data() + i * in_ch_ * tf);
        }
      }
    });
    return result;
  }
};

// Upsample(2,2 nearest) -> Conv(3x3, pad 1) -> optional BatchNorm + ReLU.
template <typename S>
struct UpConvBlock {
  int64_t in_ch = 0, out_ch = 0;
  bool bn_relu = true;
  Var<S> w, bias, gamma, beta;
  Tensor<S> running_mean, running_var;

  Var<S> Forward(Tape<S> &tape, const Var<S> &x, bool training) {
    EARSELD_CHECK(x->value.ndim() == 4 && x->value.dim(1) == in_ch, ShapeError,
                  "UpConvBlock input mismatch");
    const int64_t b = x->value.dim(0), t_in = x->value.dim(2),
                  f_in = x->value.dim(3);
    const int64_t t = t_in * 2, f = f_in * 2, tf = t * f;

    auto upsampled = std::make_shared<Tensor<S>>(
        std::vector<int64_t>{b, in_ch, t, f});
    for (int64_t i = 0; i < b; ++i)
      for (int64_t c = 0; c < in_ch; ++c) {
        const S *src = x->value.data() + (i * in_ch + c) * t_in * f_in;
        S *dst = upsampled->data() + (i * in_ch + c) * tf;
        for (int64_t ti = 0; ti < t; ++ti)
          for (int64_t fi = 0; fi < f; ++fi)
            dst[ti * f + fi] = src[(ti / 2) * f_in + (fi / 2)];
      }

    auto pre_bn = std::make_shared<Tensor<S>>(
        std::vector<int64_t>{b, out_ch, t, f});
    {
      Tensor<S> col({in_ch * 9, tf});
      for (int64_t i = 0; i < b; ++i) {
        conv_detail::Im2Col(upsampled->data() + i * in_ch * tf, in_ch, t, f,
                            col.data());
        Gemm<S>(false, false, out_ch, tf, in_ch * 9, S(1), w->value.data(),
                in_ch * 9, col.data(), tf, S(0),
                pre_bn->data() + i * out_ch * tf, tf);
      }
      for (int64_t i = 0; i < b; ++i)
        for (int64_t c = 0; c < out_ch; ++c) {
          S *plane = pre_bn->data() + (i * out_ch + c) * tf;
          for (int64_t k = 0; k < tf; ++k) plane[k] += bias->value[c];
        }
    }

    std::shared_ptr<Tensor<S>> xhat, inv_std;
    Tensor<S> out({b, out_ch, t, f});
    if (bn_relu) {
      xhat = std::make_shared<Tensor<S>>(std::vector<int64_t>{b, out_ch, t, f});
      inv_std = std::make_shared<Tensor<S>>(std::vector<int64_t>{out_ch});
      const int64_t per_ch = b * tf;
      for (int64_t c = 0; c < out_ch; ++c) {
        S mean, var;
        if (training) {
          double sum = 0, sumsq = 0;
          for (int64_t i = 0; i < b; ++i) {
            const S *p = pre_bn->data() + (i * out_ch + c) * tf;
            for (int64_t k = 0; k < tf; ++k) {
              sum += p[k];
              sumsq += static_cast<double>(p[k]) * p[k];
            }
          }
          mean = static_cast<S>(sum / per_ch);
          var = static_cast<S>(
              std::max(0.0, sumsq / per_ch - static_cast<double>(mean) * mean));
          running_mean[c] = static_cast<S>(1.0 - kBnMomentum) * running_mean[c] +
                            static_cast<S>(kBnMomentum) * mean;
          running_var[c] = static_cast<S>(1.0 - kBnMomentum) * running_var[c] +
                           static_cast<S>(kBnMomentum) * var;
        } else {
          mean = running_mean[c];
          var = running_var[c];
        }
        const S istd = S(1) / std::sqrt(var + static_cast<S>(kBnEps));
        (*inv_std)[c] = istd;
        const S g = gamma->value[c], be = beta->value[c];
        for (int64_t i = 0; i < b; ++i) {
          const S *p = pre_bn->data() + (i * out_ch + c) * tf;
          S *xh = xhat->data() + (i * out_ch + c) * tf;
          S *o = out.data() + (i * out_ch + c) * tf;
          for (int64_t k = 0; k < tf; ++k) {
            xh[k] = (p[k] - mean) * istd;
            S v = g * xh[k] + be;
            o[k] = v > 0 ? v : S(0);
          }
        }
      }
    } else {
      out = *pre_bn;
    }

    Var<S> result = tape.MakeVar(std::move(out));
    Var<S> w_ = w, bias_ = bias, gamma_ = gamma, beta_ = beta;
    const int64_t in_ch_ = in_ch, oc = out_ch;
    const bool training_ = training, bn_relu_ = bn_relu;
    tape.PushBackward([x, result, w_, bias_, gamma_, beta_, xhat, inv_std,
                       upsampled, b, t, f, tf, t_in, f_in, in_ch_, oc,
                       training_, bn_relu_]() {
      Tensor<S> d_conv({b, oc, t, f});
      if (bn_relu_) {
        Tensor<S> d_bn({b, oc, t, f});
        for (int64_t i = 0; i < d_bn.numel(); ++i)
          d_bn[i] = result->value[i] > 0 ? result->grad[i] : S(0);
        const int64_t per_ch = b * tf;
        for (int64_t c = 0; c < oc; ++c) {
          const S g = gamma_->value[c];
          const S istd = (*inv_std)[c];
          double sum_dy = 0, sum_dy_xhat = 0;
          for (int64_t i = 0; i < b; ++i) {
            const S *dy = d_bn.data() + (i * oc + c) * tf;
            const S *xh = xhat->data() + (i * oc + c) * tf;
            for (int64_t k = 0; k < tf; ++k) {
              sum_dy += dy[k];
              sum_dy_xhat += static_cast<double>(dy[k]) * xh[k];
            }
          }
          if (gamma_->requires_grad)
            gamma_->grad[c] += static_cast<S>(sum_dy_xhat);
          if (beta_->requires_grad) beta_->grad[c] += static_cast<S>(sum_dy);
          const S mean_dy = static_cast<S>(sum_dy / per_ch);
          const S mean_dy_xhat = static_cast<S>(sum_dy_xhat / per_ch);
          for (int64_t i = 0; i < b; ++i) {
            const S *dy = d_bn.data() + (i * oc + c) * tf;
            const S *xh = xhat->data() + (i * oc + c) * tf;
            S *dc = d_conv.data() + (i * oc + c) * tf;
            if (training_) {
              for (int64_t k = 0; k < tf; ++k)
                dc[k] = g * istd * (dy[k] - mean_dy - xh[k] * mean_dy_xhat);
            } else {
              for (int64_t k = 0; k < tf; ++k) dc[k] = g * istd * dy[k];
            }
          }
        }
      } else {
        d_conv = result->grad;
      }

      Tensor<S> col({in_ch_ * 9, tf});
      Tensor<S> dcol({in_ch_ * 9, tf});
      Tensor<S> d_up({in_ch_, t, f});
      for (int64_t i = 0; i < b; ++i) {
        const S *dy = d_conv.data() + i * oc * tf;
        if (w_->requires_grad) {
          conv_detail::Im2Col(upsampled->data() + i * in_ch_ * tf, in_ch_, t,
                              f, col.data());
          Gemm<S>(false, true, oc, in_ch_ * 9, tf, S(1), dy, tf, col.data(),
                  tf, S(1), w_->grad.data(), in_ch_ * 9);
        }
        if (bias_->requires_grad)
          for (int64_t c = 0; c < oc; ++c) {
            double s = 0;
            for (int64_t k = 0; k < tf; ++k) s += dy[c * tf + k];
            bias_->grad[c] += static_cast<S>(s);
          }
        if (x->requires_grad) {
          Gemm<S>(true, false, in_ch_ * 9, tf, oc, S(1), w_->value.data(),
                  in_ch_ * 9, dy, tf, S(0), dcol.data(), tf);
          d_up.Zero();
          conv_detail::Col2ImAdd(dcol.data(), in_ch_, t, f, d_up.data());
          // Downsample gradient: each input cell collects its 2x2 copies.
          for (int64_t c = 0; c < in_ch_; ++c) {
            const S *src = d_up.data() + c * tf;
            S *dst = x->grad.data() + (i * in_ch_ + c) * t_in * f_in;
            for (int64_t ti = 0; ti < t; ++ti)
              for (int64_t fi = 0; fi < f; ++fi)
                dst[(ti / 2) * f_in + (fi / 2)] += src[ti * f + fi];
          }
        }
      }
    });
    return result;
  }
};

}  // namespace earseld

#endif  // EARSELD_NN_CONV_H_
