/*
 * Copyright 2026 The Relidar Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <map>
#include <string>
#include <vector>

#include "relidar/core/range_image.hpp"
#include "relidar/core/sensor.hpp"
#include "relidar/ingest/cuboids.hpp"

namespace relidar {

/// Instance point sets cut from real frames, stored in cuboid-local
/// coordinates together with the cuboid that produced them.
struct InstanceBank {
  struct Entry {
    PointCloud points;  // cuboid-local frame
    Cuboid cuboid;      // in the source sensor frame
    std::size_t source_frame = 0;
  };

  std::vector<Entry> entries;
  std::map<std::uint32_t, std::vector<std::size_t>> by_class;

  void rebuild_class_index();
};

struct ExtractParams {
  std::size_t min_points = 5;
  double score_threshold = 0.5;
  double containment_tol = 1e-6;
};

struct ExtractStats {
  std::size_t below_score = 0;
  std::size_t below_min_points = 0;
};

/// Cuts the points inside each accepted cuboid out of the frame, re-expresses
/// them in cuboid-local coordinates and relabels them with the cuboid class
/// and a fresh instance id (one per produced entry).
std::vector<InstanceBank::Entry> extract_instances(const PointCloud& frame,
                                                   const std::vector<Cuboid>& cuboids,
                                                   std::size_t source_frame,
                                                   const ExtractParams& params = {},
                                                   ExtractStats* stats = nullptr);

/// Per-class expected draws per generated frame plus the seed that makes
/// injection reproducible.
struct InjectionPolicy {
  std::map<std::uint32_t, double> rates;  // class -> expected instances/frame
  double score_threshold = 0.5;           // applied when banks are built
  std::uint64_t seed = 0;
};

struct InjectStats {
  std::size_t drawn = 0;
  std::map<std::uint32_t, std::size_t> drawn_per_class;
};

/// Draws Poisson(rate) entries per class (seeded by policy.seed and
/// frame_index), places each at its original sensor-relative pose with a
/// fresh instance id above the scene's maximum, and resolves occlusion by
/// range competition over the beam grid. The result is the flattened image,
/// so with empty draws it equals the re-projected input.
PointCloud inject_instances(const PointCloud& scene_frame, const SensorModel& sensor,
                            const InstanceBank& bank, const InjectionPolicy& policy,
                            std::uint64_t frame_index = 0,
                            InjectStats* stats = nullptr);

/// Bank persistence: KITTI-format point files plus a JSON index.
void write_bank(const InstanceBank& bank, const std::string& directory);
InstanceBank read_bank(const std::string& directory);

}  // namespace relidar
