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
#include <string>
#include <vector>

#include "relidar/cli/config.hpp"

namespace relidar::stages {

// Pipeline stages communicate only through on-disk artifacts. Every runner
// writes a run_manifest.json (inputs, parameters, output checksums) into its
// output directory and prints a one-line JSON report to stdout.

struct SynthStage {
  std::string out_dir;
  std::string catalog;
  std::string sensor;
  std::uint64_t seed = 7;
  std::string complexity = "medium";
  std::size_t frames = 20;
  double spacing_m = 0.4;
  double dt_s = 0.1;
};
void run_synth(const SynthStage& stage);

struct AggregateStage {
  std::string manifest;
  std::string catalog;
  std::string out_dir;  // receives scene_000/, scene_001/, ...
  std::size_t stride = 1;
  double world_radius_m = 120.0;
  std::size_t window = 200;  // frames per scene window
  std::size_t overlap = 50;
};
std::vector<std::string> run_aggregate(const AggregateStage& stage);

struct MeshStage {
  std::string scenes_dir;  // root produced by run_aggregate
  std::string catalog;
  double voxel_size_m = 0.1;
  double truncation_m = 0.3;
  int transfer_k = 10;
  bool with_normals = false;  // also estimate scene normals (diagnostic)
};
std::vector<std::string> run_mesh(const MeshStage& stage);  // mesh paths

struct TraceStage {
  std::string scenes_dir;  // scene dirs with mesh.ply
  std::string manifest;    // source manifest (poses)
  std::string catalog;
  std::string target_sensor;
  std::string out_dir;
  int supersampling = 3;
  std::size_t pose_stride = 1;
  double band_m = 0.2;  // defaulted to 2 * voxel by the pipeline
  bool dump_ply = false;
};
void run_trace(const TraceStage& stage);

struct InjectStage {
  std::string frames_manifest;  // generated frames receiving instances
  std::string real_manifest;    // source of instance cuts (unless bank reused)
  std::string cuboids;          // JSON-lines cuboid file
  std::string bank_dir;         // built here, or reused when already present
  std::string catalog;
  std::string out_dir;
  std::string rates;  // "class:rate, ..."
  double score_threshold = 0.5;
  std::size_t min_points = 5;
  std::uint64_t seed = 0;
};
void run_inject(const InjectStage& stage);

struct FuseStage {
  std::string gen_manifest;
  std::string real_manifest;
  std::string catalog;
  std::string out_dir;
  double confidence_threshold = 0.85;
  std::uint64_t seed = 0;
};
void run_fuse(const FuseStage& stage);

struct EvalStage {
  std::string gt_manifest;
  std::string pred_manifest;
  std::string gt_map;
  std::string pred_map;
  std::string out_dir;
};
void run_eval(const EvalStage& stage);

/// Chains aggregate -> mesh -> trace [-> inject] [-> fuse] [-> eval] from a
/// config file; section keys are documented in the example config.
void run_pipeline(const ConfigFile& config);

/// Global knobs shared by all commands.
void apply_runtime_options(int workers, bool force_scalar);

}  // namespace relidar::stages
