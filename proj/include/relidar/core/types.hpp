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

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace relidar {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// Instance id meaning "not part of any instance".
inline constexpr std::uint32_t kNoInstance = 0;

/// One lidar return with panoptic attributes.
struct SemanticPoint {
  double x = 0.0;  // meters
  double y = 0.0;
  double z = 0.0;
  float intensity = 0.0f;  // [0, 1]
  std::uint32_t semantic_class = 0;
  std::uint32_t instance_id = kNoInstance;
  float confidence = 1.0f;  // [0, 1]

  Eigen::Vector3d position() const { return {x, y, z}; }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }

  friend bool operator==(const SemanticPoint& a, const SemanticPoint& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z &&
           a.intensity == b.intensity &&
           a.semantic_class == b.semantic_class &&
           a.instance_id == b.instance_id && a.confidence == b.confidence;
  }
};

enum class Frame { Sensor, World };

struct PointCloud {
  std::vector<SemanticPoint> points;
  Frame frame = Frame::Sensor;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Rigid transform, rotation orthonormal with det +1.
class PoseSE3 {
 public:
  PoseSE3() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  PoseSE3(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {}

  static PoseSE3 identity() { return {}; }
  static PoseSE3 from_yaw(double yaw_rad, const Eigen::Vector3d& translation);
  static PoseSE3 translation_only(const Eigen::Vector3d& t) {
    return {Eigen::Matrix3d::Identity(), t};
  }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation_ * p + translation_;
  }

  PoseSE3 inverse() const {
    Eigen::Matrix3d rt = rotation_.transpose();
    return {rt, -(rt * translation_)};
  }

  /// Composition: (a * b).apply(p) == a.apply(b.apply(p)).
  friend PoseSE3 operator*(const PoseSE3& a, const PoseSE3& b) {
    return {a.rotation_ * b.rotation_, a.rotation_ * b.translation_ + a.translation_};
  }

  /// Max deviation from orthonormality (|R^T R - I| plus |det - 1|).
  double orthonormality_error() const;
  bool valid(double tol = 1e-6) const;

  /// Nearest proper rotation by SVD, translation kept.
  PoseSE3 orthonormalized() const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// Transforms point coordinates; labels and intensity pass through.
PointCloud se3_apply(const PoseSE3& pose, const PointCloud& cloud);

inline PoseSE3 se3_compose(const PoseSE3& a, const PoseSE3& b) { return a * b; }

}  // namespace relidar
