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

#include <optional>
#include <string>
#include <vector>

#include "relidar/core/sensor.hpp"
#include "relidar/core/types.hpp"

namespace relidar {

// Joint class ids used by the synthetic world.
namespace synth_class {
inline constexpr std::uint32_t kCar = 0;
inline constexpr std::uint32_t kPedestrian = 4;
inline constexpr std::uint32_t kStructure = 6;
inline constexpr std::uint32_t kNature = 7;
inline constexpr std::uint32_t kRoad = 8;
inline constexpr std::uint32_t kTerrain = 10;
}  // namespace synth_class

/// Analytically intersectable scene element. Boxes are axis-aligned (moving
/// ones translate linearly); cylinders are vertical with a top cap; the
/// ground plane carries a road strip along x with terrain outside.
struct Primitive {
  enum class Shape { Ground, Box, Cylinder };
  Shape shape = Shape::Box;
  std::uint32_t semantic_class = 0;
  std::uint32_t instance_id = kNoInstance;
  float intensity = 0.5f;
  bool dynamic = false;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // m/s, dynamic only

  // Ground
  double ground_z = 0.0;
  double road_half_width = 4.0;
  std::uint32_t terrain_class = synth_class::kTerrain;
  float terrain_intensity = 0.25f;

  // Box
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // at time 0
  Eigen::Vector3d half_extent = Eigen::Vector3d::Zero();

  // Cylinder (center.xy, z in [center.z - half.z, center.z + half.z])
  double radius = 0.0;

  Eigen::Vector3d center_at(double time_s) const {
    return dynamic ? Eigen::Vector3d(center + time_s * velocity) : center;
  }
};

enum class Complexity { Small, Medium };

struct SynthWorld {
  std::vector<Primitive> primitives;
  std::uint64_t seed = 0;

  std::vector<std::uint32_t> dynamic_instance_ids() const;
};

/// Deterministic procedural world within a 120 m radius.
SynthWorld generate_world(std::uint64_t seed, Complexity complexity);

void write_world(const SynthWorld& world, const std::string& path);
SynthWorld read_world(const std::string& path);

struct RayHit {
  double range = 0.0;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();  // world frame
  std::uint32_t semantic_class = 0;
  std::uint32_t instance_id = 0;
  float intensity = 0.0f;
  int primitive = -1;
};

/// Closed-form nearest intersection along origin + s * direction, s > 0.
std::optional<RayHit> raytrace_ray(const SynthWorld& world,
                                   const Eigen::Vector3d& origin,
                                   const Eigen::Vector3d& direction, double max_range,
                                   double time_s, bool include_dynamic = true);

/// One exact frame: every beam of the sensor traced against the world at
/// `time_s`, sensor mounted on the vehicle pose. Beams whose nearest surface
/// is closer than the minimum range yield no point.
PointCloud raytrace_analytic(const SynthWorld& world, const SensorModel& sensor,
                             const PoseSE3& vehicle_pose, double time_s,
                             bool include_dynamic = true);

/// Distance from a surface point of class `point_class` to the nearest
/// surface of any other class (road/terrain split included). Used to exclude
/// class-boundary points from label-accuracy oracles.
double distance_to_class_boundary(const SynthWorld& world, const Eigen::Vector3d& point,
                                  std::uint32_t point_class, double time_s);

/// Distance to the nearest surface of any primitive; ~0 for ray-trace hits.
double distance_to_surface(const SynthWorld& world, const Eigen::Vector3d& point,
                           double time_s, bool include_dynamic = true);

struct SynthSequenceParams {
  std::size_t frames = 20;
  double frame_spacing_m = 0.4;    // vehicle advance along +x per frame
  double frame_dt_s = 0.1;
  double yaw_amplitude_rad = 0.0;  // optional yaw wobble (poses stay yaw-only)
};

/// Vehicle poses for an oracle sequence (yaw-only, along +x).
std::vector<PoseSE3> sequence_poses(const SynthSequenceParams& params);

/// Emits a full oracle dataset directory: KITTI frames, poses.txt, dataset
/// manifest, per-frame cuboids of dynamic boxes (sensor frame), world.json.
void emit_sequence(const SynthWorld& world, const SensorModel& sensor,
                   const SynthSequenceParams& params, const std::string& out_dir);

}  // namespace relidar
