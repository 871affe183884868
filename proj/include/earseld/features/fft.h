// earseld/features/fft.h
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

#ifndef EARSELD_FEATURES_FFT_H_
#define EARSELD_FEATURES_FFT_H_

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "earseld/common.h"

namespace earseld {

// FFTW plan creation is not thread-safe; executions on caller buffers are.
inline std::mutex &FftwPlanMutex() {
  static std::mutex m;
  return m;
}

// Real-to-complex FFT of a fixed size, double precision.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n), in_(n), out_(n / 2 + 1) {
    std::lock_guard<std::mutex> lock(FftwPlanMutex());
    fwd_ = fftw_plan_dft_r2c_1d(
        n_, in_.data(), reinterpret_cast<fftw_complex *>(out_.data()),
        FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(
        n_, reinterpret_cast<fftw_complex *>(out_.data()), in_.data(),
        FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(FftwPlanMutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  int size() const { return n_; }
  int num_bins() const { return n_ / 2 + 1; }

  // out must hold n/2+1 bins.
  void Forward(const double *in, std::complex<double> *out) {
    std::copy(in, in + n_, in_.begin());
    fftw_execute_dft_r2c(fwd_, in_.data(),
                         reinterpret_cast<fftw_complex *>(out));
  }

  // Unnormalized inverse (scale by 1/n to invert). in is clobbered per FFTW.
  void Inverse(std::complex<double> *in, double *out) {
    fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex *>(in),
                         in_.data());
    std::copy(in_.begin(), in_.end(), out);
  }

 private:
  int n_;
  std::vector<double> in_;
  std::vector<std::complex<double>> out_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

inline int64_t NextPow2(int64_t n) {
  int64_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Per-thread plan cache for repeated transforms of the same size.
inline RealFft &ThreadLocalFft(int n) {
  thread_local std::vector<std::pair<int, std::unique_ptr<RealFft>>> cache;
  for (auto &[size, fft] : cache)
    if (size == n) return *fft;
  cache.emplace_back(n, std::make_unique<RealFft>(n));
  return *cache.back().second;
}

// Linear convolution via FFT, double accumulation, float buffers.
inline std::vector<float> FftConvolve(const std::vector<float> &a,
                                      const std::vector<float> &b) {
  if (a.empty() || b.empty()) return {};
  int64_t out_len = static_cast<int64_t>(a.size()) + b.size() - 1;
  int64_t n = NextPow2(out_len);
  RealFft &fft = ThreadLocalFft(static_cast<int>(n));
  std::vector<double> buf(n, 0.0);
  std::vector<std::complex<double>> fa(fft.num_bins()), fb(fft.num_bins());
  std::copy(a.begin(), a.end(), buf.begin());
  fft.Forward(buf.data(), fa.data());
  std::fill(buf.begin(), buf.end(), 0.0);
  std::copy(b.begin(), b.end(), buf.begin());
  fft.Forward(buf.data(), fb.data());
  for (int i = 0; i < fft.num_bins(); ++i) fa[i] *= fb[i];
  fft.Inverse(fa.data(), buf.data());
  std::vector<float> out(out_len);
  double scale = 1.0 / static_cast<double>(n);
  for (int64_t i = 0; i < out_len; ++i)
    out[i] = static_cast<float>(buf[i] * scale);
  return out;
}

}  // namespace earseld

#endif  // EARSELD_FEATURES_FFT_H_
