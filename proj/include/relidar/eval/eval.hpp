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

/// Joint id marking points excluded from scoring.
inline constexpr std::uint32_t kIgnoreClass = 0xFFFFFFFFu;

/// Source -> joint class table.
///
/// File format: `source_id joint_id name` per line, `#` comments; a joint id
/// of -1 (or the word `ignore`) sends the source class to the IGNORE sink.
struct ClassMap {
  std::map<std::uint32_t, std::uint32_t> table;  // source -> joint or kIgnoreClass
  std::vector<std::string> joint_names;          // indexed by joint id

  std::uint32_t joint_count() const {
    return static_cast<std::uint32_t>(joint_names.size());
  }

  /// Throws when `source` is not declared in the table, naming the id.
  std::uint32_t map_class(std::uint32_t source) const;
};

ClassMap read_class_map(const std::string& path);
void write_class_map(const ClassMap& map, const std::string& path);

/// Classes rewritten through the map; IGNORE-mapped points get kIgnoreClass.
PointCloud remap(const PointCloud& cloud, const ClassMap& map);

/// Row = ground truth, column = prediction, joint classes only.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::uint32_t classes);

  void add(std::uint32_t gt, std::uint32_t pred) { ++counts_[index(gt, pred)]; }
  void merge(const ConfusionMatrix& other);

  std::uint32_t classes() const { return classes_; }
  std::uint64_t at(std::uint32_t gt, std::uint32_t pred) const {
    return counts_[index(gt, pred)];
  }
  std::uint64_t total() const;
  std::uint64_t true_positive(std::uint32_t c) const { return at(c, c); }
  std::uint64_t false_positive(std::uint32_t c) const;
  std::uint64_t false_negative(std::uint32_t c) const;

 private:
  std::size_t index(std::uint32_t gt, std::uint32_t pred) const {
    return static_cast<std::size_t>(gt) * classes_ + pred;
  }
  std::uint32_t classes_;
  std::vector<std::uint64_t> counts_;
};

struct ScoreReport {
  ConfusionMatrix confusion{0};
  std::vector<double> iou;          // per joint class; NaN where unsupported
  std::vector<bool> scored;         // false when the class had no points
  double miou = 0.0;
  std::uint64_t scored_points = 0;
  std::vector<std::string> class_names;

  std::string to_text() const;
  std::string to_json() const;
};

/// Point-wise IoU scoring after remapping both sides to the joint set.
/// Pairs where either side maps to IGNORE are excluded; classes with no
/// ground truth and no predictions are excluded from the mean.
ScoreReport score(const std::vector<std::uint32_t>& gt_labels,
                  const std::vector<std::uint32_t>& pred_labels,
                  const ClassMap& map_gt, const ClassMap& map_pred);

}  // namespace relidar
