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

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relidar/core/types.hpp"

namespace relidar {

// SemanticKITTI on-disk conventions: points are raw little-endian float32
// quadruples (x, y, z, intensity); labels are little-endian uint32 with the
// semantic class in the low 16 bits and the instance id in the high 16 bits.

struct KittiFrameBytes {
  std::vector<std::uint8_t> points;
  std::vector<std::uint8_t> labels;
};

/// Parses raw point/label buffers. An absent label buffer yields class 0,
/// instance 0. Throws on truncated buffers or a point/label count mismatch.
PointCloud parse_kitti_frame(const std::vector<std::uint8_t>& point_bytes,
                             const std::vector<std::uint8_t>* label_bytes);

/// Serializes a cloud; coordinates and intensity are cast to float32.
/// Throws when a class or instance id does not fit 16 bits.
KittiFrameBytes serialize_kitti_frame(const PointCloud& cloud);

/// File variants of the above.
PointCloud read_kitti_frame(const std::string& point_file,
                            const std::optional<std::string>& label_file = std::nullopt);
void write_kitti_frame(const PointCloud& cloud, const std::string& point_file,
                       const std::string& label_file);

/// KITTI odometry poses: ASCII, 12 floats per line (row-major 3x4).
/// Rotations within 1e-4 of orthonormal are snapped to the nearest rotation;
/// anything worse is a parse error naming the line.
std::vector<PoseSE3> read_poses(const std::string& pose_file);
std::vector<PoseSE3> parse_poses(const std::string& text, const std::string& origin);
void write_poses(const std::vector<PoseSE3>& poses, const std::string& pose_file);

/// Per-point pseudo labels: packed little-endian {uint16 class,
/// float32 confidence} records, aligned 1:1 with a point file.
struct PseudoLabel {
  std::uint16_t semantic_class = 0;
  float confidence = 0.0f;
};

std::vector<PseudoLabel> read_pseudo_labels(const std::string& file,
                                            std::size_t expected_points);
void write_pseudo_labels(const std::vector<PseudoLabel>& labels,
                         const std::string& file);

/// Overwrites class/confidence from pseudo labels (sizes must match).
void apply_pseudo_labels(PointCloud& cloud, const std::vector<PseudoLabel>& labels);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace relidar
