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

#include "relidar/fuse/fuse.hpp"

#include <random>
#include <stdexcept>

#include "relidar/kernels/kernels.hpp"

namespace relidar {

PointCloud filter_pseudo(const PointCloud& cloud, double threshold) {
  PointCloud out;
  out.frame = cloud.frame;
  out.points.reserve(cloud.size());
  for (const SemanticPoint& p : cloud.points) {
    if (static_cast<double>(p.confidence) >= threshold) out.points.push_back(p);
  }
  return out;
}

FuseResult fuse_frames(const PointCloud& generated, const PointCloud& real,
                       const SensorModel& sensor, const FusionParams& params) {
  if (generated.frame != Frame::Sensor || real.frame != Frame::Sensor) {
    throw std::invalid_argument("fuse_frames: both clouds must be sensor-frame");
  }

  const RangeImage gen_image =
      build_range_image(sensor, generated, nullptr, params.generated_tag);
  const RangeImage real_image =
      build_range_image(sensor, real, nullptr, params.real_tag);

  RangeImage fused(sensor.rows(), sensor.columns);
  const std::size_t cells = fused.cell_count();
  std::vector<std::uint8_t> real_won(cells);
  kernels::min_select(gen_image.ranges().data(), real_image.ranges().data(), cells,
                      fused.ranges().data(), real_won.data());

  FuseResult result;
  for (std::size_t i = 0; i < cells; ++i) {
    if (fused.ranges()[i] < 0.0) continue;
    const RangeImage& donor = real_won[i] ? real_image : gen_image;
    fused.points()[i] = donor.points()[i];
    fused.tags()[i] = donor.tags()[i];
    if (real_won[i]) {
      ++result.cells_from_real;
    } else {
      ++result.cells_from_generated;
    }
  }
  result.cloud = fused.flatten();
  result.tags = fused.flatten_tags();
  return result;
}

std::vector<std::size_t> pair_frames(std::size_t generated_count,
                                     std::size_t real_count, std::uint64_t seed) {
  if (generated_count == 0 || real_count == 0) {
    throw std::invalid_argument("pair_frames: both pools must be non-empty");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, real_count - 1);
  std::vector<std::size_t> pairing(generated_count);
  for (std::size_t i = 0; i < generated_count; ++i) pairing[i] = pick(rng);
  return pairing;
}

MixedDataset build_mixed_dataset(const std::vector<PointCloud>& generated,
                                 const std::vector<PointCloud>& real,
                                 const SensorModel& sensor,
                                 const FusionParams& params) {
  MixedDataset out;
  out.pairing = pair_frames(generated.size(), real.size(), params.pairing_seed);
  out.fused.resize(generated.size());
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const PointCloud filtered =
        filter_pseudo(real[out.pairing[i]], params.confidence_threshold);
    out.fused[i] = fuse_frames(generated[i], filtered, sensor, params);
  }
  return out;
}

}  // namespace relidar
