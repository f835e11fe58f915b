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

#include "relidar/reconstruct/normals.hpp"

#include <atomic>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "relidar/core/parallel.hpp"
#include "relidar/reconstruct/kdtree.hpp"

namespace relidar {

NormalsResult estimate_normals(const PointCloud& cloud, int k,
                               const std::vector<Eigen::Vector3d>& viewpoints) {
  if (k < 3) throw std::invalid_argument("estimate_normals: k must be >= 3");
  if (cloud.size() < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("estimate_normals: cloud has fewer than k points");
  }
  if (viewpoints.size() != cloud.size()) {
    throw std::invalid_argument("estimate_normals: one viewpoint per point required");
  }

  std::vector<Eigen::Vector3d> positions(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) positions[i] = cloud.points[i].position();
  const KdTree3 tree(positions);

  NormalsResult result;
  result.normals.assign(cloud.size(), Eigen::Vector3d::Zero());
  result.valid.assign(cloud.size(), 0);
  std::atomic<std::size_t> degenerate{0};

  parallel_for(cloud.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto neighbors = tree.knn(positions[i], static_cast<std::size_t>(k));
      Eigen::Vector3d mean = Eigen::Vector3d::Zero();
      for (const auto& nb : neighbors) mean += positions[nb.index];
      mean /= static_cast<double>(neighbors.size());

      Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
      for (const auto& nb : neighbors) {
        const Eigen::Vector3d d = positions[nb.index] - mean;
        cov += d * d.transpose();
      }

      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
      const Eigen::Vector3d& values = eig.eigenvalues();  // ascending
      // Rank < 2: the two smallest eigenvalues vanish relative to the spread.
      const double scale = values[2];
      if (!(scale > 0.0) || values[1] <= 1e-9 * scale) {
        degenerate.fetch_add(1, std::memory_order_relaxed);
        continue;
      }
      Eigen::Vector3d normal = eig.eigenvectors().col(0);
      normal.normalize();
      if (normal.dot(viewpoints[i] - positions[i]) < 0.0) normal = -normal;
      result.normals[i] = normal;
      result.valid[i] = 1;
    }
  });

  result.degenerate_count = degenerate.load();
  return result;
}

}  // namespace relidar
