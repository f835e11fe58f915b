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
#include <string>
#include <vector>

#include "relidar/core/range_image.hpp"
#include "relidar/core/sensor.hpp"

namespace relidar {

struct FusionParams {
  double confidence_threshold = 0.85;
  std::uint64_t pairing_seed = 0;
  std::uint8_t generated_tag = kTagGenerated;
  std::uint8_t real_tag = kTagReal;
};

/// Exactly the points with confidence >= threshold, order preserved.
PointCloud filter_pseudo(const PointCloud& cloud, double threshold);

struct FuseResult {
  PointCloud cloud;                 // flattened valid cells
  std::vector<std::uint8_t> tags;   // provenance per output point
  std::size_t cells_from_generated = 0;
  std::size_t cells_from_real = 0;
};

/// Structure-preserving mix: both clouds are projected onto the sensor grid
/// and each cell keeps the nearer donor point verbatim (generated wins
/// ties). Both inputs must be sensor-frame clouds.
FuseResult fuse_frames(const PointCloud& generated, const PointCloud& real,
                       const SensorModel& sensor, const FusionParams& params = {});

/// Pairing plan for build_mixed_dataset: generated frame i fuses with
/// real_index[i], drawn uniformly with the seed.
std::vector<std::size_t> pair_frames(std::size_t generated_count,
                                     std::size_t real_count, std::uint64_t seed);

struct MixedDataset {
  std::vector<FuseResult> fused;     // one per generated frame
  std::vector<std::size_t> pairing;  // generated index -> real index
};

/// Fuses every generated frame with a seeded uniform draw from the real
/// pool. Confidence filtering of pseudo-labeled real frames happens here so
/// dropped points leave their cells to the generated donor. The emitted
/// dataset is these fused frames plus untouched copies of the real pool
/// (the copies are the caller's file-level concern).
MixedDataset build_mixed_dataset(const std::vector<PointCloud>& generated,
                                 const std::vector<PointCloud>& real,
                                 const SensorModel& sensor,
                                 const FusionParams& params);

}  // namespace relidar
