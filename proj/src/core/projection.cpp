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

#include "relidar/core/projection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace relidar {

int elevation_to_row(const SensorModel& sensor, double elevation_deg) {
  const auto& elev = sensor.elevation_deg;
  const int n = static_cast<int>(elev.size());

  // First channel with elevation <= query (list is descending).
  const auto it = std::lower_bound(elev.begin(), elev.end(), elevation_deg,
                                   std::greater<double>());
  int row;
  if (it == elev.begin()) {
    row = 0;
  } else if (it == elev.end()) {
    row = n - 1;
  } else {
    const int below = static_cast<int>(it - elev.begin());
    const int above = below - 1;
    const double dist_above = elev[above] - elevation_deg;
    const double dist_below = elevation_deg - elev[below];
    row = dist_above <= dist_below ? above : below;
  }

  const double delta = elevation_deg - elev[row];
  const double half_gap =
      0.5 * (delta >= 0.0 ? sensor.gap_above_deg(row) : sensor.gap_below_deg(row));
  if (std::abs(delta) > half_gap) return -1;
  return row;
}

int azimuth_to_col(const SensorModel& sensor, double azimuth_deg) {
  if (azimuth_deg < sensor.azimuth_min_deg || azimuth_deg > sensor.azimuth_max_deg) {
    return -1;
  }
  const double t = (azimuth_deg - sensor.azimuth_min_deg) / sensor.azimuth_step_deg();
  long col = static_cast<long>(std::floor(t));
  // Bin-edge ties go to the lower column.
  if (static_cast<double>(col) == t && col > 0) --col;
  if (col >= sensor.columns) col = sensor.columns - 1;
  if (col < 0) col = 0;
  return static_cast<int>(col);
}

std::optional<BeamHit> project_with_range(const SensorModel& sensor,
                                          const Eigen::Vector3d& point, double range) {
  if (range < sensor.range_min_m - kRangeSlack ||
      range > sensor.range_max_m + kRangeSlack) {
    return std::nullopt;
  }
  double sin_el = point.z() / range;
  sin_el = std::clamp(sin_el, -1.0, 1.0);
  const double elevation_deg = std::asin(sin_el) * kRadToDeg;
  const int row = elevation_to_row(sensor, elevation_deg);
  if (row < 0) return std::nullopt;

  const double azimuth_deg = std::atan2(point.y(), point.x()) * kRadToDeg;
  const int col = azimuth_to_col(sensor, azimuth_deg);
  if (col < 0) return std::nullopt;

  return BeamHit{row, col, range};
}

std::optional<BeamHit> project(const SensorModel& sensor, const Eigen::Vector3d& point) {
  const double range =
      std::sqrt((point.x() * point.x() + point.y() * point.y()) + point.z() * point.z());
  if (!(range > 0.0)) return std::nullopt;
  return project_with_range(sensor, point, range);
}

Eigen::Vector3d beam_direction(double azimuth_deg, double elevation_deg) {
  const double az = azimuth_deg * kDegToRad;
  const double el = elevation_deg * kDegToRad;
  const double cos_el = std::cos(el);
  return {cos_el * std::cos(az), cos_el * std::sin(az), std::sin(el)};
}

Eigen::Vector3d backproject(const SensorModel& sensor, int row, int col, double range) {
  if (row < 0 || row >= sensor.rows() || col < 0 || col >= sensor.columns) {
    throw std::out_of_range("backproject: cell (" + std::to_string(row) + ", " +
                            std::to_string(col) + ") outside " +
                            std::to_string(sensor.rows()) + "x" +
                            std::to_string(sensor.columns) + " grid");
  }
  if (range < sensor.range_min_m - kRangeSlack ||
      range > sensor.range_max_m + kRangeSlack) {
    throw std::out_of_range("backproject: range " + std::to_string(range) +
                            " outside [" + std::to_string(sensor.range_min_m) + ", " +
                            std::to_string(sensor.range_max_m) + "]");
  }
  const double azimuth_deg =
      sensor.azimuth_min_deg + (col + 0.5) * sensor.azimuth_step_deg();
  return range * beam_direction(azimuth_deg, sensor.elevation_deg[row]);
}

}  // namespace relidar
