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

#include "relidar/reconstruct/attributes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "relidar/core/parallel.hpp"
#include "relidar/reconstruct/kdtree.hpp"

namespace relidar {

namespace {

// Majority vote; ties resolve to the smallest id.
std::uint32_t mode_vote(const std::map<std::uint32_t, int>& counts) {
  std::uint32_t best_id = 0;
  int best_count = -1;
  for (const auto& [id, count] : counts) {
    if (count > best_count) {
      best_id = id;
      best_count = count;
    }
  }
  return best_id;
}

}  // namespace

LabeledMesh transfer_attributes(const LabeledMesh& mesh, const SceneCloud& scene,
                                const AttributeTransferParams& params) {
  if (scene.cloud.empty()) {
    throw std::invalid_argument("transfer_attributes: scene cloud is empty");
  }
  if (params.k < 1) throw std::invalid_argument("transfer_attributes: k must be >= 1");

  std::vector<Eigen::Vector3d> positions(scene.cloud.size());
  for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
    positions[i] = scene.cloud.points[i].position();
  }
  const KdTree3 tree(positions);

  LabeledMesh out = mesh;
  out.semantic_class.assign(mesh.vertices.size(), 0);
  out.instance_id.assign(mesh.vertices.size(), 0);
  out.intensity.assign(mesh.vertices.size(), 0.0f);

  parallel_for(mesh.vertices.size(), [&](std::size_t begin, std::size_t end) {
    std::map<std::uint32_t, int> class_votes;
    std::map<std::uint32_t, int> instance_votes;
    for (std::size_t v = begin; v < end; ++v) {
      const auto neighbors =
          tree.knn(mesh.vertices[v], static_cast<std::size_t>(params.k));
      class_votes.clear();
      instance_votes.clear();
      double weight_sum = 0.0;
      double intensity_sum = 0.0;
      for (const auto& nb : neighbors) {
        const SemanticPoint& p = scene.cloud.points[nb.index];
        ++class_votes[p.semantic_class];
        ++instance_votes[p.instance_id];
        const double d =
            std::max(std::sqrt(nb.squared_distance), params.min_distance_m);
        const double w = 1.0 / d;
        weight_sum += w;
        intensity_sum += w * static_cast<double>(p.intensity);
      }
      out.semantic_class[v] = mode_vote(class_votes);
      out.instance_id[v] = mode_vote(instance_votes);
      out.intensity[v] = static_cast<float>(intensity_sum / weight_sum);
    }
  });
  return out;
}

}  // namespace relidar
