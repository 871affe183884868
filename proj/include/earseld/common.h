// earseld/common.h
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

#ifndef EARSELD_COMMON_H_
#define EARSELD_COMMON_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace earseld {

// Global constants shared by simulation, features and training.
constexpr int kSampleRate = 48000;
constexpr double kSpeedOfSound = 343.0;  // m/s
constexpr int kNumClasses = 12;
constexpr int kNumVariations = 20;
constexpr int kNumMels = 64;
constexpr double kLabelFrameSec = 0.1;  // 100 ms label frames
constexpr double kSnrClean = std::numeric_limits<double>::infinity();

// Scene / echo STFT settings (window, hop) in samples.
constexpr int kSceneWindow = 2048;
constexpr int kSceneHop = 960;
constexpr int kEchoWindow = 1024;
constexpr int kEchoHop = 512;

class Error : public std::runtime_error {
 public:
  Error(const std::string &kind, const std::string &msg)
      : std::runtime_error(kind + ": " + msg), kind_(kind) {}
  const std::string &kind() const { return kind_; }

 private:
  std::string kind_;
};

#define EARSELD_DEFINE_ERROR(NAME)                       \
  class NAME : public Error {                            \
   public:                                               \
    explicit NAME(const std::string &msg)                \
        : Error(#NAME, msg) {}                           \
  }

EARSELD_DEFINE_ERROR(ConfigError);
EARSELD_DEFINE_ERROR(GeometryError);
EARSELD_DEFINE_ERROR(PolyphonyError);
EARSELD_DEFINE_ERROR(MissingIRError);
EARSELD_DEFINE_ERROR(MissingStats);
EARSELD_DEFINE_ERROR(ShapeError);
EARSELD_DEFINE_ERROR(InputTooShort);
EARSELD_DEFINE_ERROR(LengthMismatch);
EARSELD_DEFINE_ERROR(DivergenceError);
EARSELD_DEFINE_ERROR(IoError);

#undef EARSELD_DEFINE_ERROR

#define EARSELD_CHECK(cond, ERROR_TYPE, msg)        \
  do {                                              \
    if (!(cond)) {                                  \
      std::ostringstream os__;                      \
      os__ << msg;                                  \
      throw ::earseld::ERROR_TYPE(os__.str());      \
    }                                               \
  } while (0)

inline bool IsClean(double snr_db) { return std::isinf(snr_db); }

}  // namespace earseld

#endif  // EARSELD_COMMON_H_
