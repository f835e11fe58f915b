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

#include <Eigen/Dense>

namespace relidar {

/// Static 3D KD-tree for k-nearest-neighbor queries.
///
/// Queries are const and safe to run from parallel workers. Results are
/// sorted by squared distance with index as the tie breaker, so downstream
/// votes stay deterministic.
class KdTree3 {
 public:
  struct Neighbor {
    std::uint32_t index;
    double squared_distance;
  };

  KdTree3() = default;
  explicit KdTree3(const std::vector<Eigen::Vector3d>& points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  /// The k nearest points to `query` (fewer when the tree is smaller).
  std::vector<Neighbor> knn(const Eigen::Vector3d& query, std::size_t k) const;

 private:
  struct Node {
    std::uint32_t point = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis = 0;
  };

  std::int32_t build(std::vector<std::uint32_t>& indices, std::size_t begin,
                     std::size_t end);
  void search(std::int32_t node, const Eigen::Vector3d& query, std::size_t k,
              std::vector<Neighbor>& heap) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace relidar
