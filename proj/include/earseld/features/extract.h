// earseld/features/extract.h
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
// 7-channel features for the SELD networks: log-mel spectrograms of the four
// FOA channels plus the 3-channel mel-banded acoustic intensity vector.

#ifndef EARSELD_FEATURES_EXTRACT_H_
#define EARSELD_FEATURES_EXTRACT_H_

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "earseld/common.h"
#include "earseld/features/fft.h"
#include "earseld/io/wav.h"
#include "earseld/spatial/foa.h"
#include "earseld/tensor.h"

namespace earseld {

enum class FeatureKind { kScene, kEcho };

inline int FeatureWindow(FeatureKind kind) {
  return kind == FeatureKind::kScene ? kSceneWindow : kEchoWindow;
}
inline int FeatureHop(FeatureKind kind) {
  return kind == FeatureKind::kScene ? kSceneHop : kEchoHop;
}

constexpr double kLogFloor = 1e-8;
constexpr double kIntensityEps = 1e-8;
constexpr double kMelLowHz = 50.0;

// values: (7, T, 64); channels 0-3 log-mel of W,Y,Z,X, channels 4-6
// mel-banded intensity (x, y, z).
struct FeatureMap {
  Tensor<float> values;
  double frame_rate = 0;
  FeatureKind kind = FeatureKind::kScene;

  int64_t frames() const { return values.dim(1); }
};

// HTK-style triangular mel filterbank, rows not normalized.
class MelFilterbank {
 public:
  MelFilterbank(int num_bands, int nfft, int sample_rate, double low_hz,
                double high_hz)
      : num_bands_(num_bands), num_bins_(nfft / 2 + 1) {
    auto hz_to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
    auto mel_to_hz = [](double m) {
      return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
    };
    double mlo = hz_to_mel(low_hz), mhi = hz_to_mel(high_hz);
    std::vector<double> edges(num_bands + 2);
    for (int i = 0; i < num_bands + 2; ++i)
      edges[i] = mel_to_hz(mlo + (mhi - mlo) * i / (num_bands + 1));
    weights_.assign(static_cast<size_t>(num_bands) * num_bins_, 0.0);
    for (int b = 0; b < num_bands; ++b) {
      double f0 = edges[b], f1 = edges[b + 1], f2 = edges[b + 2];
      for (int k = 0; k < num_bins_; ++k) {
        double f = static_cast<double>(k) * sample_rate / nfft;
        double w = 0.0;
        if (f > f0 && f < f2)
          w = (f <= f1) ? (f - f0) / (f1 - f0) : (f2 - f) / (f2 - f1);
        weights_[static_cast<size_t>(b) * num_bins_ + k] = w;
      }
    }
  }

  int num_bands() const { return num_bands_; }
  int num_bins() const { return num_bins_; }
  const double *band(int b) const { return &weights_[static_cast<size_t>(b) * num_bins_]; }

 private:
  int num_bands_, num_bins_;
  std::vector<double> weights_;
};

inline const MelFilterbank &SharedMelBank(int nfft, int sample_rate) {
  static std::mutex m;
  static std::vector<std::tuple<int, int, std::unique_ptr<MelFilterbank>>> cache;
  std::lock_guard<std::mutex> lock(m);
  for (auto &[n, sr, bank] : cache)
    if (n == nfft && sr == sample_rate) return *bank;
  cache.emplace_back(nfft, sample_rate,
                     std::make_unique<MelFilterbank>(
                         kNumMels, nfft, sample_rate, kMelLowHz,
                         sample_rate / 2.0));
  return *std::get<2>(cache.back());
}

// Hann-windowed STFT of all four channels; (4, T, nfft/2+1) complex.
struct FoaStft {
  int window = 0, hop = 0, num_bins = 0;
  int64_t num_frames = 0;
  int sample_rate = kSampleRate;
  // spectra[c][t * num_bins + k]
  std::array<std::vector<std::complex<double>>, 4> spectra;
};

inline FoaStft ComputeStft(const AudioBuffer &audio, FeatureKind kind) {
  EARSELD_CHECK(audio.num_channels() == 4, ShapeError,
                "FOA audio must have 4 channels, got "
                    << audio.num_channels());
  const int window = FeatureWindow(kind);
  const int hop = FeatureHop(kind);
  const int64_t n = audio.num_samples();
  EARSELD_CHECK(n >= window, InputTooShort,
                "need at least " << window << " samples, got " << n);

  FoaStft stft;
  stft.window = window;
  stft.hop = hop;
  stft.sample_rate = audio.sample_rate;
  stft.num_frames = (n - window) / hop + 1;
  stft.num_bins = window / 2 + 1;

  std::vector<double> hann(window);
  for (int i = 0; i < window; ++i)
    hann[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / window));

  RealFft fft(window);
  std::vector<double> buf(window);
  for (int c = 0; c < 4; ++c) {
    stft.spectra[c].resize(stft.num_frames * stft.num_bins);
    const auto &x = audio.channels[c];
    for (int64_t t = 0; t < stft.num_frames; ++t) {
      const int64_t off = t * hop;
      for (int i = 0; i < window; ++i)
        buf[i] = static_cast<double>(x[off + i]) * hann[i];
      fft.Forward(buf.data(), &stft.spectra[c][t * stft.num_bins]);
    }
  }
  return stft;
}

// Log-mel power spectrogram per FOA channel: (4, T, 64).
inline Tensor<float> StftLogmel(const FoaStft &stft) {
  const auto &mel = SharedMelBank(stft.window, stft.sample_rate);
  Tensor<float> out({4, stft.num_frames, kNumMels});
  for (int c = 0; c < 4; ++c) {
    for (int64_t t = 0; t < stft.num_frames; ++t) {
      const std::complex<double> *frame = &stft.spectra[c][t * stft.num_bins];
      for (int b = 0; b < kNumMels; ++b) {
        const double *w = mel.band(b);
        double acc = 0;
        for (int k = 0; k < stft.num_bins; ++k) {
          if (w[k] == 0.0) continue;
          acc += w[k] * std::norm(frame[k]);
        }
        out.at(c, t, b) = static_cast<float>(std::log(acc + kLogFloor));
      }
    }
  }
  return out;
}

// Mel-banded acoustic intensity vector, (3, T, 64), ordered (x, y, z).
// Per TF bin I = Re{conj(W) * (X, Y, Z)}; per band the mel-weighted I is
// normalized by the mel-weighted energy density (|W|^2 + |X|^2 + |Y|^2 +
// |Z|^2) / 2, which keeps every component in [-1, 1] and maps a plane wave
// to its unit direction vector.
inline Tensor<float> IntensityVector(const FoaStft &stft) {
  const auto &mel = SharedMelBank(stft.window, stft.sample_rate);
  Tensor<float> out({3, stft.num_frames, kNumMels});
  for (int64_t t = 0; t < stft.num_frames; ++t) {
    const std::complex<double> *w_ch = &stft.spectra[kW][t * stft.num_bins];
    const std::complex<double> *y_ch = &stft.spectra[kY][t * stft.num_bins];
    const std::complex<double> *z_ch = &stft.spectra[kZ][t * stft.num_bins];
    const std::complex<double> *x_ch = &stft.spectra[kX][t * stft.num_bins];
    for (int b = 0; b < kNumMels; ++b) {
      const double *wt = mel.band(b);
      double ix = 0, iy = 0, iz = 0, energy = 0;
      for (int k = 0; k < stft.num_bins; ++k) {
        if (wt[k] == 0.0) continue;
        const auto wc = std::conj(w_ch[k]);
        ix += wt[k] * (wc * x_ch[k]).real();
        iy += wt[k] * (wc * y_ch[k]).real();
        iz += wt[k] * (wc * z_ch[k]).real();
        energy += wt[k] * 0.5 *
                  (std::norm(w_ch[k]) + std::norm(x_ch[k]) +
                   std::norm(y_ch[k]) + std::norm(z_ch[k]));
      }
      double denom = energy + kIntensityEps;
      out.at(0, t, b) = static_cast<float>(ix / denom);
      out.at(1, t, b) = static_cast<float>(iy / denom);
      out.at(2, t, b) = static_cast<float>(iz / denom);
    }
  }
  return out;
}

// Full 7-channel feature map for one clip.
inline FeatureMap ExtractFeatures(const AudioBuffer &audio, FeatureKind kind) {
  FoaStft stft = ComputeStft(audio, kind);
  Tensor<float> logmel = StftLogmel(stft);
  Tensor<float> intensity = IntensityVector(stft);

  FeatureMap fm;
  fm.kind = kind;
  fm.frame_rate = static_cast<double>(audio.sample_rate) / stft.hop;
  fm.values = Tensor<float>({7, stft.num_frames, kNumMels});
  const int64_t plane = stft.num_frames * kNumMels;
  std::copy(logmel.data(), logmel.data() + 4 * plane, fm.values.data());
  std::copy(intensity.data(), intensity.data() + 3 * plane,
            fm.values.data() + 4 * plane);
  return fm;
}

// Per-channel standardization statistics, computed on training data only.
struct FeatureStats {
  std::array<double, 7> mean = {};
  std::array<double, 7> stddev = {1, 1, 1, 1, 1, 1, 1};
  bool valid = false;
};

template <typename FeatureRange>
FeatureStats ComputeFeatureStats(const FeatureRange &maps) {
  FeatureStats stats;
  std::array<double, 7> sum = {}, sumsq = {};
  int64_t count = 0;
  for (const FeatureMap &fm : maps) {
    const int64_t plane = fm.values.dim(1) * fm.values.dim(2);
    for (int c = 0; c < 7; ++c) {
      const float *p = fm.values.data() + c * plane;
      for (int64_t i = 0; i < plane; ++i) {
        sum[c] += p[i];
        sumsq[c] += static_cast<double>(p[i]) * p[i];
      }
    }
    count += plane;
  }
  EARSELD_CHECK(count > 0, MissingStats, "no feature maps given");
  for (int c = 0; c < 7; ++c) {
    stats.mean[c] = sum[c] / count;
    double var = sumsq[c] / count - stats.mean[c] * stats.mean[c];
    stats.stddev[c] = std::sqrt(std::max(var, 0.0));
    if (stats.stddev[c] < 1e-6) stats.stddev[c] = 1e-6;
  }
  stats.valid = true;
  return stats;
}

// Standardizes the log-mel channels in place; intensity channels (already
// bounded) pass through untouched.
inline void NormalizeFeatures(FeatureMap *fm, const FeatureStats &stats) {
  EARSELD_CHECK(stats.valid, MissingStats,
                "normalization stats were never computed");
  const int64_t plane = fm->values.dim(1) * fm->values.dim(2);
  for (int c = 0; c < 4; ++c) {
    float *p = fm->values.data() + c * plane;
    const float m = static_cast<float>(stats.mean[c]);
    const float inv = static_cast<float>(1.0 / stats.stddev[c]);
    for (int64_t i = 0; i < plane; ++i) p[i] = (p[i] - m) * inv;
  }
}

}  // namespace earseld

#endif  // EARSELD_FEATURES_EXTRACT_H_
