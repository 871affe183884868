// earseld/scene/labels.h
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

#ifndef EARSELD_SCENE_LABELS_H_
#define EARSELD_SCENE_LABELS_H_

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "earseld/common.h"
#include "earseld/geometry.h"

namespace earseld {

// One active source in one 100 ms label frame.
struct RefEntry {
  int class_id = 0;
  double azimuth_deg = 0;
  double elevation_deg = 0;

  Vec3 unit() const { return UnitVectorFromAngles(azimuth_deg, elevation_deg); }
};

// Frame-level SELD reference: per 100 ms frame, the set of active sources.
// The same class may appear twice with distinct DOAs (polyphony 2).
struct SELDReference {
  std::vector<std::vector<RefEntry>> frames;

  int64_t num_frames() const { return static_cast<int64_t>(frames.size()); }

  int64_t TotalEntries() const {
    int64_t n = 0;
    for (const auto &f : frames) n += static_cast<int64_t>(f.size());
    return n;
  }
};

// CSV format shared with external scorers:
// frame_index,class_id,azimuth_deg,elevation_deg per active class per frame.
inline void WriteLabelsCsv(const std::string &path, const SELDReference &ref) {
  std::ofstream f(path);
  EARSELD_CHECK(f.good(), IoError, "cannot write labels: " << path);
  f << "frame_index,class_id,azimuth_deg,elevation_deg\n";
  char line[128];
  for (int64_t t = 0; t < ref.num_frames(); ++t) {
    for (const auto &e : ref.frames[t]) {
      std::snprintf(line, sizeof(line), "%lld,%d,%.6f,%.6f\n",
                    static_cast<long long>(t), e.class_id, e.azimuth_deg,
                    e.elevation_deg);
      f << line;
    }
  }
}

// num_frames must be passed because trailing empty frames carry no rows.
inline SELDReference ReadLabelsCsv(const std::string &path,
                                   int64_t num_frames) {
  std::ifstream f(path);
  EARSELD_CHECK(f.good(), IoError, "cannot read labels: " << path);
  SELDReference ref;
  ref.frames.resize(num_frames);
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    long long frame;
    RefEntry e;
    if (std::sscanf(line.c_str(), "%lld,%d,%lf,%lf", &frame, &e.class_id,
                    &e.azimuth_deg, &e.elevation_deg) != 4)
      throw IoError("malformed label row in " + path + ": " + line);
    if (frame >= 0 && frame < num_frames) ref.frames[frame].push_back(e);
  }
  return ref;
}

}  // namespace earseld

#endif  // EARSELD_SCENE_LABELS_H_
