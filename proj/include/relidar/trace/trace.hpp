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
#include <vector>

#include "relidar/core/range_image.hpp"
#include "relidar/core/sensor.hpp"
#include "relidar/reconstruct/mesh.hpp"

namespace relidar {

struct TraceParams {
  int supersampling = 3;
  PoseSE3 virtual_pose;  // virtual sensor in world frame
  double band_m = 0.2;   // silhouette suppression band, 2 * reconstruction voxel
  // At grazing incidence the legitimate within-block depth spread grows with
  // range, so the band widens to this fraction of the block minimum.
  double relative_band = 0.15;
};

/// Supersampled spherical depth buffer. Sub-row angles are the
/// supersampling-refined channel elevations (each channel plus offsets of
/// local-gap fractions); sub-columns split every azimuth bin uniformly.
struct DepthBuffer {
  int rows = 0;  // supersampling * channels
  int cols = 0;  // supersampling * columns
  std::vector<double> depth;            // +inf where empty
  std::vector<std::int32_t> triangle;   // -1 where empty
  std::vector<double> elevation_deg;    // per sub-row
  std::vector<double> azimuth_deg;      // per sub-col

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * cols + col;
  }
};

struct RasterStats {
  std::size_t rejected_wide = 0;        // > 90 deg azimuth subtense
  std::size_t rejected_degenerate = 0;  // zero area or through the origin
};

/// Rasterizes the mesh in (azimuth, elevation) space with exact per-sample
/// ray/plane depths. Triangles spanning the +-180 seam are unwrapped;
/// triangles subtending more than 90 degrees of azimuth are rejected and
/// counted. Minimum depth wins per sample, ties go to the lower triangle id.
DepthBuffer rasterize_spherical(const LabeledMesh& mesh, const SensorModel& sensor,
                                const TraceParams& params, RasterStats* stats = nullptr);

/// Range image plus the covering triangle and exact sample direction per cell.
struct TracedImage {
  RangeImage image;
  std::vector<std::int32_t> triangle;       // per cell, -1 invalid
  std::vector<double> sample_azimuth_deg;   // per cell
  std::vector<double> sample_elevation_deg;
};

/// Per output cell, picks from the supersampling block the valid sample
/// angularly closest to the beam among those within band_m of the block's
/// minimum depth; cells whose nearest surface violates the range limits
/// stay invalid.
TracedImage subsample_to_sensor(const DepthBuffer& buffer, const SensorModel& sensor,
                                const TraceParams& params);

struct TraceStats {
  RasterStats raster;
  std::size_t valid_cells = 0;
};

/// Full resampling: rasterize, subsample, backproject every valid cell and
/// attach the attributes of the hit triangle's vertex nearest to the hit
/// point. Output is a sensor-frame cloud, one point per valid cell. The mesh
/// must carry attributes.
PointCloud trace_sensor(const LabeledMesh& mesh, const SensorModel& sensor,
                        const TraceParams& params, TraceStats* stats = nullptr);

}  // namespace relidar
