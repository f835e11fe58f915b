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

#include "relidar/core/projection.hpp"
#include "relidar/core/types.hpp"

namespace relidar {

/// Provenance tag values used by the fusion and injection stages.
enum SourceTag : std::uint8_t {
  kTagUnset = 0,
  kTagGenerated = 1,
  kTagReal = 2,
  kTagInjected = 3,
};

/// H x W beam grid holding at most one point per cell.
///
/// Each valid cell keeps the donor point verbatim so that flattening an
/// image never invents coordinates. Invalid cells carry a negative range
/// sentinel in memory; file serializations write 0 instead.
class RangeImage {
 public:
  static constexpr double kInvalidRange = -1.0;

  RangeImage() = default;
  RangeImage(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t cell_count() const { return ranges_.size(); }

  bool valid(int row, int col) const { return range(row, col) >= 0.0; }
  double range(int row, int col) const { return ranges_[index(row, col)]; }
  const SemanticPoint& point(int row, int col) const { return points_[index(row, col)]; }
  std::uint8_t tag(int row, int col) const { return tags_[index(row, col)]; }

  void set_cell(int row, int col, double range, const SemanticPoint& point,
                std::uint8_t tag = kTagUnset);
  void clear_cell(int row, int col);

  std::size_t valid_count() const;

  /// Valid cells in row-major order as a sensor-frame cloud.
  PointCloud flatten() const;
  /// Provenance tags aligned with flatten() output.
  std::vector<std::uint8_t> flatten_tags() const;

  // Planar ranges, row-major; shared with the kernel layer.
  const std::vector<double>& ranges() const { return ranges_; }
  std::vector<double>& ranges() { return ranges_; }
  const std::vector<SemanticPoint>& points() const { return points_; }
  std::vector<SemanticPoint>& points() { return points_; }
  const std::vector<std::uint8_t>& tags() const { return tags_; }
  std::vector<std::uint8_t>& tags() { return tags_; }

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * cols_ + col;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> ranges_;
  std::vector<SemanticPoint> points_;
  std::vector<std::uint8_t> tags_;
};

struct BuildStats {
  std::size_t dropped_out_of_view = 0;
  std::size_t cell_conflicts = 0;
};

/// Projects a sensor-frame cloud onto the beam grid. Per-cell conflicts keep
/// the smaller range (ties keep the earlier point); out-of-view points are
/// dropped and counted.
RangeImage build_range_image(const SensorModel& sensor, const PointCloud& cloud,
                             BuildStats* stats = nullptr,
                             std::uint8_t tag = kTagUnset);

}  // namespace relidar
