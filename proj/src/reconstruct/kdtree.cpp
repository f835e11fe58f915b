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

#include "relidar/reconstruct/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace relidar {

namespace {

// Worse-first ordering for the bounded max-heap; index breaks distance ties
// so the neighbor set is unique.
bool worse(const KdTree3::Neighbor& a, const KdTree3::Neighbor& b) {
  if (a.squared_distance != b.squared_distance) {
    return a.squared_distance < b.squared_distance;
  }
  return a.index < b.index;
}

}  // namespace

KdTree3::KdTree3(const std::vector<Eigen::Vector3d>& points) : points_(points) {
  if (points_.empty()) return;
  std::vector<std::uint32_t> indices(points_.size());
  std::iota(indices.begin(), indices.end(), 0u);
  nodes_.reserve(points_.size());
  root_ = build(indices, 0, indices.size());
}

std::int32_t KdTree3::build(std::vector<std::uint32_t>& indices, std::size_t begin,
                            std::size_t end) {
  if (begin >= end) return -1;

  // Split along the widest extent of the subset.
  Eigen::Vector3d lo = points_[indices[begin]];
  Eigen::Vector3d hi = lo;
  for (std::size_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[indices[i]]);
    hi = hi.cwiseMax(points_[indices[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(indices.begin() + begin, indices.begin() + mid,
                   indices.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
                     if (points_[a][axis] != points_[b][axis]) {
                       return points_[a][axis] < points_[b][axis];
                     }
                     return a < b;
                   });

  const auto node_index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{indices[mid], -1, -1, static_cast<std::uint8_t>(axis)});
  const std::int32_t left = build(indices, begin, mid);
  const std::int32_t right = build(indices, mid + 1, end);
  nodes_[node_index].left = left;
  nodes_[node_index].right = right;
  return node_index;
}

void KdTree3::search(std::int32_t node, const Eigen::Vector3d& query, std::size_t k,
                     std::vector<Neighbor>& heap) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Eigen::Vector3d& p = points_[n.point];

  const Neighbor candidate{n.point, (p - query).squaredNorm()};
  if (heap.size() < k) {
    heap.push_back(candidate);
    std::push_heap(heap.begin(), heap.end(), worse);
  } else if (worse(candidate, heap.front())) {
    std::pop_heap(heap.begin(), heap.end(), worse);
    heap.back() = candidate;
    std::push_heap(heap.begin(), heap.end(), worse);
  }

  const double delta = query[n.axis] - p[n.axis];
  const std::int32_t near = delta <= 0.0 ? n.left : n.right;
  const std::int32_t far = delta <= 0.0 ? n.right : n.left;
  search(near, query, k, heap);
  if (heap.size() < k || delta * delta <= heap.front().squared_distance) {
    search(far, query, k, heap);
  }
}

std::vector<KdTree3::Neighbor> KdTree3::knn(const Eigen::Vector3d& query,
                                            std::size_t k) const {
  std::vector<Neighbor> heap;
  if (k == 0 || points_.empty()) return heap;
  heap.reserve(std::min(k, points_.size()));
  search(root_, query, k, heap);
  std::sort(heap.begin(), heap.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.squared_distance != b.squared_distance) {
      return a.squared_distance < b.squared_distance;
    }
    return a.index < b.index;
  });
  return heap;
}

}  // namespace relidar
