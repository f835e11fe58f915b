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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace relidar {

/// Triangle mesh with per-vertex panoptic attributes.
struct LabeledMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  // Per-vertex attributes; empty until transfer_attributes() ran.
  std::vector<std::uint32_t> semantic_class;
  std::vector<std::uint32_t> instance_id;
  std::vector<float> intensity;

  bool has_attributes() const {
    return semantic_class.size() == vertices.size() &&
           instance_id.size() == vertices.size() &&
           intensity.size() == vertices.size();
  }

  /// Index bounds, degenerate triangles, attribute array sizes.
  void validate() const;
};

/// Binary little-endian PLY with per-vertex properties
/// x, y, z, intensity (float32) and semantic_class, instance_id (uint16).
/// Meshes without attributes write zeros for the attribute columns.
void write_mesh_ply(const LabeledMesh& mesh, const std::string& path);
LabeledMesh read_mesh_ply(const std::string& path);

/// Same vertex schema without faces, used for cloud inspection dumps.
void write_cloud_ply(const std::vector<Eigen::Vector3d>& points,
                     const std::vector<float>& intensity,
                     const std::vector<std::uint32_t>& semantic_class,
                     const std::vector<std::uint32_t>& instance_id,
                     const std::string& path);

}  // namespace relidar
