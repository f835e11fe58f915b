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

#include "relidar/core/range_image.hpp"

#include <stdexcept>

#include "relidar/kernels/kernels.hpp"

namespace relidar {

RangeImage::RangeImage(int rows, int cols)
    : rows_(rows),
      cols_(cols),
      ranges_(static_cast<std::size_t>(rows) * cols, kInvalidRange),
      points_(static_cast<std::size_t>(rows) * cols),
      tags_(static_cast<std::size_t>(rows) * cols, kTagUnset) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("RangeImage: rows and cols must be positive");
  }
}

void RangeImage::set_cell(int row, int col, double range, const SemanticPoint& point,
                          std::uint8_t tag) {
  const std::size_t i = index(row, col);
  ranges_[i] = range;
  points_[i] = point;
  tags_[i] = tag;
}

void RangeImage::clear_cell(int row, int col) {
  const std::size_t i = index(row, col);
  ranges_[i] = kInvalidRange;
  points_[i] = SemanticPoint{};
  tags_[i] = kTagUnset;
}

std::size_t RangeImage::valid_count() const {
  std::size_t n = 0;
  for (double r : ranges_) {
    if (r >= 0.0) ++n;
  }
  return n;
}

PointCloud RangeImage::flatten() const {
  PointCloud out;
  out.frame = Frame::Sensor;
  out.points.reserve(valid_count());
  for (std::size_t i = 0; i < ranges_.size(); ++i) {
    if (ranges_[i] >= 0.0) out.points.push_back(points_[i]);
  }
  return out;
}

std::vector<std::uint8_t> RangeImage::flatten_tags() const {
  std::vector<std::uint8_t> out;
  out.reserve(valid_count());
  for (std::size_t i = 0; i < ranges_.size(); ++i) {
    if (ranges_[i] >= 0.0) out.push_back(tags_[i]);
  }
  return out;
}

RangeImage build_range_image(const SensorModel& sensor, const PointCloud& cloud,
                             BuildStats* stats, std::uint8_t tag) {
  if (cloud.frame != Frame::Sensor) {
    throw std::invalid_argument("build_range_image: cloud must be in the sensor frame");
  }
  RangeImage image(sensor.rows(), sensor.columns);
  BuildStats local;

  const std::size_t n = cloud.size();
  std::vector<double> x(n), y(n), z(n), ranges(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = cloud.points[i].x;
    y[i] = cloud.points[i].y;
    z[i] = cloud.points[i].z;
  }
  kernels::ranges_soa(x.data(), y.data(), z.data(), n, ranges.data());

  for (std::size_t i = 0; i < n; ++i) {
    const SemanticPoint& p = cloud.points[i];
    if (!p.finite() || !(ranges[i] > 0.0)) {
      ++local.dropped_out_of_view;
      continue;
    }
    const auto hit = project_with_range(sensor, p.position(), ranges[i]);
    if (!hit) {
      ++local.dropped_out_of_view;
      continue;
    }
    const std::size_t cell = image.index(hit->row, hit->col);
    const double existing = image.ranges()[cell];
    if (existing >= 0.0) {
      ++local.cell_conflicts;
      if (hit->range >= existing) continue;  // keep the nearer point
    }
    image.ranges()[cell] = hit->range;
    image.points()[cell] = p;
    image.tags()[cell] = tag;
  }

  if (stats) *stats = local;
  return image;
}

}  // namespace relidar
