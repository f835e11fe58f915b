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
#include <vector>

#include "relidar/core/range_image.hpp"
#include "relidar/core/sensor.hpp"
#include "relidar/core/types.hpp"

namespace relidar {

/// Dense truncated-signed-distance volume fused from range images.
///
/// Voxels store a clamped projective distance and an observation weight;
/// integration keeps a running average with weight 1 per observation.
/// Layout is z-fastest so vertical voxel spans are contiguous.
class TsdfVolume {
 public:
  TsdfVolume(double voxel_size, double truncation, const Eigen::Vector3d& origin,
             const std::array<int, 3>& dims);

  /// Volume covering [min, max] padded by the truncation band.
  static TsdfVolume for_bounds(const Eigen::Vector3d& min, const Eigen::Vector3d& max,
                               double voxel_size, double truncation);

  double voxel_size() const { return voxel_size_; }
  double truncation() const { return truncation_; }
  const Eigen::Vector3d& origin() const { return origin_; }
  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t voxel_count() const { return sdf_.size(); }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k;
  }
  Eigen::Vector3d voxel_center(int i, int j, int k) const {
    return origin_ + voxel_size_ * Eigen::Vector3d(i + 0.5, j + 0.5, k + 0.5);
  }

  float sdf_at(int i, int j, int k) const { return sdf_[index(i, j, k)]; }
  float weight_at(int i, int j, int k) const { return weight_[index(i, j, k)]; }

  std::vector<float>& sdf() { return sdf_; }
  const std::vector<float>& sdf() const { return sdf_; }
  std::vector<float>& weight() { return weight_; }
  const std::vector<float>& weight() const { return weight_; }

 private:
  double voxel_size_;
  double truncation_;
  Eigen::Vector3d origin_;
  std::array<int, 3> dims_;
  std::vector<float> sdf_;
  std::vector<float> weight_;
};

/// Internal path selection, exposed for equivalence tests. Auto picks the
/// column fast path when the sensor pose is yaw-only.
enum class IntegratePath { Auto, General, FastColumns };

/// Fuses one range image observed from `sensor_pose_world` (sensor in world
/// frame, mount already applied). Voxels in front of the measured surface
/// update with the distance clamped to +truncation; voxels behind it beyond
/// the truncation band stay untouched.
void integrate_frame(TsdfVolume& volume, const SensorModel& sensor,
                     const PoseSE3& sensor_pose_world, const RangeImage& image,
                     IntegratePath path = IntegratePath::Auto);

struct ReconstructionParams {
  double voxel_size_m = 0.1;
  double truncation_m = 0.3;
};

}  // namespace relidar
