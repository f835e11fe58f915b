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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "relidar/core/types.hpp"

namespace relidar {

/// One frame entry of a sequence manifest. Paths are relative to the
/// manifest file's directory.
struct FrameEntry {
  std::string point_file;
  std::optional<std::string> label_file;
  std::optional<std::string> pseudo_file;
  PoseSE3 pose;  // vehicle in world frame
  double timestamp = 0.0;
  std::set<std::uint32_t> dynamic_instance_ids;  // per-frame additions
};

/// Generic JSON dataset description; the dataset-agnostic replacement for
/// native ingestion of any particular benchmark layout.
///
/// Schema (all paths relative to the manifest):
///   {
///     "sensor": "<catalog name>",
///     "intensity_divisor": 1.0,
///     "dynamic_instance_ids": [ ... ],          // sequence-wide, optional
///     "dynamic_class_ids": [ 252, ..., 259 ],   // optional, default below
///     "frames": [
///       { "point_file": "...", "label_file": "...", "pseudo_file": "...",
///         "pose": [12 row-major 3x4 values], "timestamp": 0.0,
///         "dynamic_instance_ids": [ ... ] }
///     ]
///   }
struct SequenceManifest {
  std::string sensor;
  double intensity_divisor = 1.0;
  std::set<std::uint32_t> dynamic_instance_ids;
  std::set<std::uint32_t> dynamic_class_ids;  // classes whose instances are dynamic
  std::vector<FrameEntry> frames;
  std::string base_dir;  // directory of the manifest file

  std::string resolve(const std::string& relative) const;

  /// Dynamic instance ids for one frame: the union of the sequence set, the
  /// frame set, and the instances of points whose class is in
  /// dynamic_class_ids.
  std::set<std::uint32_t> dynamic_ids_for(std::size_t frame_index,
                                          const PointCloud& cloud) const;

  /// Loads one frame with labels (and pseudo labels when present) applied
  /// and intensity normalized by intensity_divisor.
  PointCloud load_frame(std::size_t frame_index) const;
};

/// SemanticKITTI raw moving-object classes, the shipped default for
/// dynamic_class_ids.
const std::set<std::uint32_t>& default_dynamic_classes();

SequenceManifest read_manifest(const std::string& path);
void write_manifest(const SequenceManifest& manifest, const std::string& path);

}  // namespace relidar
