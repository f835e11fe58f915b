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

#include <set>
#include <string>
#include <vector>

#include "relidar/core/sensor.hpp"
#include "relidar/ingest/manifest.hpp"

namespace relidar {

/// Static world-frame scene cloud accumulated from a sequence.
struct SceneCloud {
  PointCloud cloud;  // Frame::World
  std::string sensor_name;
  std::vector<std::uint32_t> source_frame_ids;    // per point
  std::vector<std::uint32_t> selected_frame_ids;  // frames that contributed
  std::vector<PoseSE3> sensor_poses;              // per selected frame, world
  std::vector<Eigen::Vector3d> sensor_origins;    // translations of the above

  const Eigen::Vector3d& origin_for_frame(std::uint32_t frame_id) const;
  const PoseSE3& pose_for_frame(std::uint32_t frame_id) const;
  /// Sensor origin of the frame a point came from.
  Eigen::Vector3d viewpoint_of(std::size_t point_index) const;
};

struct AggregateParams {
  std::size_t stride = 1;
  double world_radius_m = 120.0;  // points farther from their frame origin drop
  std::size_t frame_begin = 0;
  std::size_t frame_end = 0;  // 0 = to end of sequence
};

/// Exactly the points whose instance id is not in `dynamic_ids`; order kept.
PointCloud remove_dynamic(const PointCloud& cloud,
                          const std::set<std::uint32_t>& dynamic_ids);

/// Accumulates every stride-th frame: dynamic instances removed, the rest
/// transformed by pose * mount into the world frame. Errors name the frame.
SceneCloud accumulate(const SequenceManifest& sequence, const SensorModel& sensor,
                      const AggregateParams& params = {});

/// Scene persistence: KITTI point/label pair plus a JSON sidecar with the
/// per-point frame ids and per-frame sensor origins.
void write_scene(const SceneCloud& scene, const std::string& directory);
SceneCloud read_scene(const std::string& directory);

}  // namespace relidar
