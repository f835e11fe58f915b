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

#include "relidar/reconstruct/mesh.hpp"
#include "relidar/reconstruct/tsdf.hpp"

namespace relidar {

/// Extracts the sdf = 0 isosurface. Vertex positions are interpolated
/// linearly along cell edges; only cells whose 8 corners all carry weight
/// emit geometry. Vertices are welded by global grid-edge key, so the
/// slab-parallel extraction is deterministic. Attributes stay unset.
LabeledMesh marching_cubes(const TsdfVolume& volume);

}  // namespace relidar
