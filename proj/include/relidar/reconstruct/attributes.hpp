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

#include "relidar/aggregate/aggregate.hpp"
#include "relidar/reconstruct/mesh.hpp"

namespace relidar {

struct AttributeTransferParams {
  int k = 10;
  double min_distance_m = 1e-6;  // inverse-distance weight floor
};

/// Labels every mesh vertex from its k nearest scene points: class and
/// instance by majority vote (ties to the smallest id), intensity by
/// inverse-distance weighting. Throws on an empty scene.
LabeledMesh transfer_attributes(const LabeledMesh& mesh, const SceneCloud& scene,
                                const AttributeTransferParams& params = {});

}  // namespace relidar
