// earseld/geometry.h
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

#ifndef EARSELD_GEOMETRY_H_
#define EARSELD_GEOMETRY_H_

#include <algorithm>
#include <array>
#include <cmath>

namespace earseld {

using Vec3 = std::array<double, 3>;

inline double Deg2Rad(double deg) { return deg * M_PI / 180.0; }
inline double Rad2Deg(double rad) { return rad * 180.0 / M_PI; }

// Wraps azimuth to [-180, 180).
inline double WrapAzimuthDeg(double az) {
  az = std::fmod(az + 180.0, 360.0);
  if (az < 0) az += 360.0;
  return az - 180.0;
}

// Azimuth 0 is +x (front), positive azimuth toward +y (left), elevation
// positive toward +z. Matches the ACN/SN3D panning in foa.h.
inline Vec3 UnitVectorFromAngles(double az_deg, double el_deg) {
  double az = Deg2Rad(az_deg), el = Deg2Rad(el_deg);
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
          std::sin(el)};
}

inline double AzimuthDegFromVector(const Vec3 &u) {
  return Rad2Deg(std::atan2(u[1], u[0]));
}

inline double ElevationDegFromVector(const Vec3 &u) {
  double h = std::hypot(u[0], u[1]);
  return Rad2Deg(std::atan2(u[2], h));
}

inline double Norm(const Vec3 &u) {
  return std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
}

inline double Dot(const Vec3 &a, const Vec3 &b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Angle between two unit vectors, in degrees.
inline double AngularErrorDeg(const Vec3 &a, const Vec3 &b) {
  double d = std::clamp(Dot(a, b), -1.0, 1.0);
  return Rad2Deg(std::acos(d));
}

}  // namespace earseld

#endif  // EARSELD_GEOMETRY_H_
