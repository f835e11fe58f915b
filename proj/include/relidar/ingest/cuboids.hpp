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

#include <string>
#include <vector>

#include "relidar/core/types.hpp"

namespace relidar {

/// Oriented box annotation or detection, yaw about +z.
struct Cuboid {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // meters
  Eigen::Vector3d size = Eigen::Vector3d::Zero();    // length, width, height
  double yaw_rad = 0.0;
  std::uint32_t semantic_class = 0;
  std::uint32_t instance_id = kNoInstance;
  double score = 1.0;  // [0, 1]; ground truth defaults to 1

  /// Componentwise half-extent test in the cuboid's yaw-aligned frame.
  bool contains(const Eigen::Vector3d& point, double tol = 0.0) const;

  /// Cuboid-local coordinates of a point given in the cuboid's frame.
  Eigen::Vector3d to_local(const Eigen::Vector3d& point) const;
  Eigen::Vector3d to_parent(const Eigen::Vector3d& local) const;

  void validate() const;
};

/// Reads a JSON-lines cuboid file. One object per line with keys:
///   frame (int), center [x,y,z], size [l,w,h], yaw (rad), class (int),
///   instance (int), score (optional, default 1.0)
/// Empty lines are skipped; a missing mandatory key is an error.
std::vector<std::pair<std::size_t, Cuboid>> read_cuboids(const std::string& path);

void write_cuboids(const std::vector<std::pair<std::size_t, Cuboid>>& cuboids,
                   const std::string& path);

}  // namespace relidar
