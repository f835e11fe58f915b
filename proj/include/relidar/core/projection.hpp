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

#include "relidar/core/sensor.hpp"

namespace relidar {

/// Range limits are applied with this slack so that backproject/project
/// round trips at the exact limits survive rounding.
inline constexpr double kRangeSlack = 1e-9;

struct BeamHit {
  int row = 0;
  int col = 0;
  double range = 0.0;
};

/// Spherical projection of a sensor-frame point onto the beam grid.
///
/// Row is the nearest channel by elevation, rejected when the angular
/// distance exceeds half the local inter-channel gap (equidistant points go
/// to the smaller row). Column is floor-binned over the azimuth FOV; values
/// exactly on a bin edge go to the lower column. Returns nullopt when the
/// point is out of view.
std::optional<BeamHit> project(const SensorModel& sensor, const Eigen::Vector3d& point);

/// Same as project() with the Euclidean norm already computed.
std::optional<BeamHit> project_with_range(const SensorModel& sensor,
                                          const Eigen::Vector3d& point, double range);

/// Cartesian point at the channel elevation and column-center azimuth.
/// Throws std::out_of_range for invalid indices or a range outside limits.
Eigen::Vector3d backproject(const SensorModel& sensor, int row, int col, double range);

/// Unit direction for arbitrary angles, same convention as backproject().
Eigen::Vector3d beam_direction(double azimuth_deg, double elevation_deg);

/// Column for an azimuth already in degrees; -1 when outside the FOV.
int azimuth_to_col(const SensorModel& sensor, double azimuth_deg);

/// Nearest channel with half-gap rejection; -1 when rejected.
int elevation_to_row(const SensorModel& sensor, double elevation_deg);

}  // namespace relidar
