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

#include <vector>

#include "relidar/core/types.hpp"

namespace relidar {

struct NormalsResult {
  std::vector<Eigen::Vector3d> normals;  // unit length where valid
  std::vector<std::uint8_t> valid;       // 0 = degenerate neighborhood
  std::size_t degenerate_count = 0;
};

/// PCA normals from the k nearest neighbors, oriented toward the per-point
/// viewpoint. Neighborhoods of rank < 2 are flagged invalid instead of
/// guessing. Requires k >= 3 and at least k points.
NormalsResult estimate_normals(const PointCloud& cloud, int k,
                               const std::vector<Eigen::Vector3d>& viewpoints);

}  // namespace relidar
