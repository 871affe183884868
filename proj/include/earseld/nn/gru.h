// earseld/nn/gru.h
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
// Bidirectional gated recurrent unit layer with hand-rolled BPTT. Gate
// layout is [r, z, n] with the candidate state n = tanh(Wn x + bn + r *
// (Un h + cn)); both directions run the same cell on the reversed sequence
// and the outputs concatenate to (B, T, 2H).

#ifndef EARSELD_NN_GRU_H_
#define EARSELD_NN_GRU_H_

#include <memory>

#include "earseld/nn/ops.h"

namespace earseld {

template <typename S>
struct GruDirection {
  Var<S> wx;   // (3H, I)
  Var<S> wh;   // (3H, H)
  Var<S> bih;  // (3H)
  Var<S> bhh;  // (3H)
};

template <typename S>
struct BiGruLayer {
  int64_t input = 0, hidden = 0;
  GruDirection<S> fwd, bwd;

  Var<S> Forward(Tape<S> &tape, const Var<S> &x) {
    EARSELD_CHECK(x->value.ndim() == 3 && x->value.dim(2) == input, ShapeError,
                  "BiGruLayer input mismatch: want " << input);
    const int64_t b = x->value.dim(0), t_len = x->value.dim(1);
    const int64_t h = hidden;

    Tensor<S> out({b, t_len, 2 * h});
    struct DirState {
      std::shared_ptr<Tensor<S>> xp, r, z, n, un, hs;
    };
    auto run_direction = [&](const GruDirection<S> &dir, bool reverse,
                             int64_t out_offset) {
      DirState st;
      st.xp = std::make_shared<Tensor<S>>(std::vector<int64_t>{b, t_len, 3 * h});
      st.r = std::make_shared<Tensor<S>>(std::vector<int64_t>{b, t_len, h});
      st.z = std::make_shared<Tensor<S>>(std::vector<int64_t>{b, t_len, h});
      st.n = std::make_shared<Tensor<S>>(std::vector<int64_t>{b, t_len, h});
      st.un = std::make_shared<Tensor<S>>(std::vector<int64_t>{b, t_len, h});
      st.hs = std::make_shared<Tensor<S>>(std::vector<int64_t>{b, t_len, h});

      // Input projection for every frame in one gemm, bias folded in.
      Gemm<S>(false, true, b * t_len, 3 * h, input, S(1), x->value.data(),
              input, dir.wx->value.data(), input, S(0), st.xp->data(), 3 * h);
      for (int64_t r = 0; r < b * t_len; ++r)
        for (int64_t k = 0; k < 3 * h; ++k)
          (*st.xp)[r * 3 * h + k] += dir.bih->value[k];

      Tensor<S> h_prev({b, h});
      Tensor<S> u({b, 3 * h});
      for (int64_t step = 0; step < t_len; ++step) {
        const int64_t t = reverse ? t_len - 1 - step : step;
        // u = h_prev * Wh^T + bhh
        Gemm<S>(false, true, b, 3 * h, h, S(1), h_prev.data(), h,
                dir.wh->value.data(), h, S(0), u.data(), 3 * h);
        for (int64_t i = 0; i < b; ++i)
          for (int64_t k = 0; k < 3 * h; ++k)
            u.at(i, k) += dir.bhh->value[k];
        for (int64_t i = 0; i < b; ++i) {
          const S *xp = st.xp->data() + (i * t_len + t) * 3 * h;
          S *rr = st.r->data() + (i * t_len + t) * h;
          S *zz = st.z->data() + (i * t_len + t) * h;
          S *nn = st.n->data() + (i * t_len + t) * h;
          S *uu = st.un->data() + (i * t_len + t) * h;
          S *hh = st.hs->data() + (i * t_len + t) * h;
          for (int64_t k = 0; k < h; ++k) {
            const S u_r = u.at(i, k), u_z = u.at(i, h + k),
                    u_n = u.at(i, 2 * h + k);
            const S r_g = StableSigmoid(xp[k] + u_r);
            const S z_g = StableSigmoid(xp[h + k] + u_z);
            const S n_g = std::tanh(xp[2 * h + k] + r_g * u_n);
            rr[k] = r_g;
            zz[k] = z_g;
            nn[k] = n_g;
            uu[k] = u_n;
            hh[k] = (S(1) - z_g) * n_g + z_g * h_prev.at(i, k);
          }
        }
        for (int64_t i = 0; i < b; ++i)
          for (int64_t k = 0; k < h; ++k)
            h_prev.at(i, k) = st.hs->data()[(i * t_len + t) * h + k];
      }
      for (int64_t i = 0; i < b; ++i)
        for (int64_t t = 0; t < t_len; ++t)
          for (int64_t k = 0; k < h; ++k)
            out.at(i, t, out_offset + k) = (*st.hs)[(i * t_len + t) * h + k];
      return st;
    };

    DirState fst = run_direction(fwd, false, 0);
    DirState bst = run_direction(bwd, true, h);

    Var<S> result = tape.MakeVar(std::move(out));
    const int64_t in_dim = input;
    auto backward_direction = [x, result, b, t_len, h, in_dim](
                                  const GruDirection<S> &dir,
                                  const DirState &st, bool reverse,
                                  int64_t out_offset) {
      Tensor<S> d_xp({b, t_len, 3 * h});
      Tensor<S> dh_carry({b, h});
      Tensor<S> d_u({b, 3 * h});
      Tensor<S> h_prev({b, h});
      for (int64_t step = t_len - 1; step >= 0; --step) {
        const int64_t t = reverse ? t_len - 1 - step : step;
        const int64_t t_prev = reverse ? t + 1 : t - 1;
        const bool has_prev = reverse ? (t_prev < t_len) : (t_prev >= 0);
        if (has_prev) {
          for (int64_t i = 0; i < b; ++i)
            for (int64_t k = 0; k < h; ++k)
              h_prev.at(i, k) = (*st.hs)[(i * t_len + t_prev) * h + k];
        } else {
          h_prev.Zero();
        }
        for (int64_t i = 0; i < b; ++i) {
          const S *rr = st.r->data() + (i * t_len + t) * h;
          const S *zz = st.z->data() + (i * t_len + t) * h;
          const S *nn = st.n->data() + (i * t_len + t) * h;
          const S *uu = st.un->data() + (i * t_len + t) * h;
          S *dxp = d_xp.data() + (i * t_len + t) * 3 * h;
          for (int64_t k = 0; k < h; ++k) {
            const S dh = result->grad.at(i, t, out_offset + k) +
                         dh_carry.at(i, k);
            const S hp = h_prev.at(i, k);
            const S dz = dh * (hp - nn[k]);
            const S dn = dh * (S(1) - zz[k]);
            S carry = dh * zz[k];
            const S dtanh = dn * (S(1) - nn[k] * nn[k]);
            const S dr = dtanh * uu[k];
            const S d_un = dtanh * rr[k];
            const S dpre_r = dr * rr[k] * (S(1) - rr[k]);
            const S dpre_z = dz * zz[k] * (S(1) - zz[k]);
            dxp[k] = dpre_r;
            dxp[h + k] = dpre_z;
            dxp[2 * h + k] = dtanh;
            d_u.at(i, k) = dpre_r;
            d_u.at(i, h + k) = dpre_z;
            d_u.at(i, 2 * h + k) = d_un;
            dh_carry.at(i, k) = carry;
          }
        }
        if (dir.wh->requires_grad)
          Gemm<S>(true, false, 3 * h, h, b, S(1), d_u.data(), 3 * h,
                  h_prev.data(), h, S(1), dir.wh->grad.data(), h);
        if (dir.bhh->requires_grad)
          for (int64_t i = 0; i < b; ++i)
            for (int64_t k = 0; k < 3 * h; ++k)
              dir.bhh->grad[k] += d_u.at(i, k);
        // dh_prev += d_u * Wh
        Gemm<S>(false, false, b, h, 3 * h, S(1), d_u.data(), 3 * h,
                dir.wh->value.data(), h, S(1), dh_carry.data(), h);
      }
      if (dir.wx->requires_grad)
        Gemm<S>(true, false, 3 * h, in_dim, b * t_len, S(1), d_xp.data(),
                3 * h, x->value.data(), in_dim, S(1), dir.wx->grad.data(),
                in_dim);
      if (dir.bih->requires_grad)
        for (int64_t r = 0; r < b * t_len; ++r)
          for (int64_t k = 0; k < 3 * h; ++k)
            dir.bih->grad[k] += d_xp[r * 3 * h + k];
      if (x->requires_grad)
        Gemm<S>(false, false, b * t_len, in_dim, 3 * h, S(1), d_xp.data(),
                3 * h, dir.wx->value.data(), in_dim, S(1), x->grad.data(),
                in_dim);
    };

    GruDirection<S> fwd_ = fwd, bwd_ = bwd;
    tape.PushBackward([backward_direction, fwd_, bwd_, fst, bst, h]() {
      backward_direction(fwd_, fst, false, 0);
      backward_direction(bwd_, bst, true, h);
    });
    return result;
  }
};

}  // namespace earseld

#endif  // EARSELD_NN_GRU_H_
