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

#include "relidar/core/types.hpp"

namespace relidar {

/// Beam geometry of a rotating or directional lidar.
///
/// Channels are listed top to bottom (strictly decreasing elevation).
/// Azimuth is split into `columns` equal bins across the FOV; rotating
/// sensors use [-180, 180].
struct SensorModel {
  std::string name;
  std::vector<double> elevation_deg;  // strictly decreasing, within (-90, 90)
  double azimuth_min_deg = -180.0;
  double azimuth_max_deg = 180.0;
  int columns = 1;
  double range_min_m = 0.5;
  double range_max_m = 100.0;
  PoseSE3 mount;  // sensor in vehicle frame

  int rows() const { return static_cast<int>(elevation_deg.size()); }
  double azimuth_step_deg() const {
    return (azimuth_max_deg - azimuth_min_deg) / columns;
  }
  bool full_circle() const {
    return azimuth_max_deg - azimuth_min_deg >= 360.0 - 1e-9;
  }

  /// Inter-channel gap above/below channel `row`, degrees. Edge channels
  /// reuse their single adjacent gap; a one-channel sensor falls back to
  /// 1 degree.
  double gap_above_deg(int row) const;
  double gap_below_deg(int row) const;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Parses a plain-text sensor catalog.
///
/// One `[name]` section per sensor with keys:
///   elevations_deg  = comma/space separated list, top channel first
///   columns         = azimuth samples across the FOV
///   azimuth_fov_deg = min max
///   range_m         = min max
///   mount           = 12 row-major values of the 3x4 sensor-in-vehicle matrix
///                     (optional, defaults to identity)
/// `#` starts a comment.
std::map<std::string, SensorModel> load_sensor_catalog(const std::string& path);

/// Convenience lookup; throws when `name` is missing from the catalog.
SensorModel load_sensor(const std::string& catalog_path, const std::string& name);

/// Uniformly spaced channel table, handy for tests and synthetic sensors.
SensorModel make_uniform_sensor(const std::string& name, int channels,
                                double elevation_top_deg, double elevation_bottom_deg,
                                int columns, double range_min_m, double range_max_m,
                                const PoseSE3& mount = PoseSE3::identity());

}  // namespace relidar
