// earseld/spatial/foa.h
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

#ifndef EARSELD_SPATIAL_FOA_H_
#define EARSELD_SPATIAL_FOA_H_

#include <array>
#include <cmath>

#include "earseld/geometry.h"

namespace earseld {

// Channel order is ACN (W, Y, Z, X) with SN3D normalization, the convention
// of the DCASE FOA datasets.
enum FoaChannel { kW = 0, kY = 1, kZ = 2, kX = 3 };

// First-order ambisonic panning gains for a plane wave from (az, el).
// Total over the angle ranges after wrapping/clamping.
inline std::array<double, 4> FoaGains(double az_deg, double el_deg) {
  double az = Deg2Rad(WrapAzimuthDeg(az_deg));
  double el = Deg2Rad(std::clamp(el_deg, -90.0, 90.0));
  return {1.0, std::sin(az) * std::cos(el), std::sin(el),
          std::cos(az) * std::cos(el)};
}

inline std::array<double, 4> FoaGains(const Vec3 &unit_dir) {
  return {1.0, unit_dir[1], unit_dir[2], unit_dir[0]};
}

}  // namespace earseld

#endif  // EARSELD_SPATIAL_FOA_H_
