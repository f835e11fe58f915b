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

// relidar: rebuild labeled lidar sequences as a mesh world, resample them in
// the beam structure of a different sensor, and narrow the remaining gap by
// instance injection and range-competition fusion.

#include <iostream>

#include <CLI11.hpp>

#include "relidar/cli/config.hpp"
#include "relidar/cli/stages.hpp"

namespace {

struct GlobalOptions {
  int workers = 0;
  bool force_scalar = false;
};

void add_global(CLI::App* cmd, GlobalOptions& global) {
  cmd->add_option("--workers", global.workers,
                  "Worker threads (0 = hardware concurrency)");
  cmd->add_flag("--force-scalar", global.force_scalar,
                "Disable the SIMD kernel backend");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "relidar - lidar dataset resampling, injection and fusion toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  relidar::stages::SynthStage synth;
  relidar::stages::AggregateStage aggregate;
  relidar::stages::MeshStage mesh;
  relidar::stages::TraceStage trace;
  relidar::stages::InjectStage inject;
  relidar::stages::FuseStage fuse;
  relidar::stages::EvalStage eval;
  std::string pipeline_config;

  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic oracle dataset");
  synth_cmd->add_option("--out", synth.out_dir, "Output dataset directory")
      ->required();
  synth_cmd->add_option("--catalog", synth.catalog, "Sensor catalog file")
      ->required();
  synth_cmd->add_option("--sensor", synth.sensor, "Sensor name")->required();
  synth_cmd->add_option("--seed", synth.seed, "World seed");
  synth_cmd->add_option("--complexity", synth.complexity, "small or medium");
  synth_cmd->add_option("--frames", synth.frames, "Frame count");
  synth_cmd->add_option("--spacing", synth.spacing_m, "Vehicle advance per frame [m]");
  synth_cmd->add_option("--dt", synth.dt_s, "Frame time step [s]");
  add_global(synth_cmd, global);

  auto* aggregate_cmd =
      app.add_subcommand("aggregate", "Accumulate static scene clouds");
  aggregate_cmd->add_option("--manifest", aggregate.manifest, "Dataset manifest")
      ->required();
  aggregate_cmd->add_option("--catalog", aggregate.catalog, "Sensor catalog")
      ->required();
  aggregate_cmd->add_option("--out", aggregate.out_dir, "Scenes output directory")
      ->required();
  aggregate_cmd->add_option("--stride", aggregate.stride, "Frame stride");
  aggregate_cmd->add_option("--radius", aggregate.world_radius_m,
                            "World radius bound [m]");
  aggregate_cmd->add_option("--window", aggregate.window, "Frames per scene window");
  aggregate_cmd->add_option("--overlap", aggregate.overlap, "Window overlap");
  add_global(aggregate_cmd, global);

  auto* mesh_cmd = app.add_subcommand("mesh", "Reconstruct labeled scene meshes");
  mesh_cmd->add_option("--scenes", mesh.scenes_dir, "Scenes directory")->required();
  mesh_cmd->add_option("--catalog", mesh.catalog, "Sensor catalog")->required();
  mesh_cmd->add_option("--voxel", mesh.voxel_size_m, "Voxel size [m]");
  mesh_cmd->add_option("--truncation", mesh.truncation_m, "TSDF truncation [m]");
  mesh_cmd->add_option("--transfer-k", mesh.transfer_k,
                       "Neighbors for attribute transfer");
  mesh_cmd->add_flag("--with-normals", mesh.with_normals,
                     "Also estimate scene normals (diagnostic)");
  add_global(mesh_cmd, global);

  auto* trace_cmd =
      app.add_subcommand("trace", "Resample meshes with a virtual sensor");
  trace_cmd->add_option("--scenes", trace.scenes_dir, "Scenes directory with meshes")
      ->required();
  trace_cmd->add_option("--manifest", trace.manifest, "Source dataset manifest")
      ->required();
  trace_cmd->add_option("--catalog", trace.catalog, "Sensor catalog")->required();
  trace_cmd->add_option("--sensor", trace.target_sensor, "Target sensor name")
      ->required();
  trace_cmd->add_option("--out", trace.out_dir, "Traced dataset directory")
      ->required();
  trace_cmd->add_option("--supersampling", trace.supersampling,
                        "Rendering supersampling factor");
  trace_cmd->add_option("--pose-stride", trace.pose_stride, "Virtual pose stride");
  trace_cmd->add_option("--band", trace.band_m,
                        "Silhouette suppression band [m] (2 x voxel)");
  trace_cmd->add_flag("--dump-ply", trace.dump_ply, "Dump traced clouds as PLY");
  add_global(trace_cmd, global);

  auto* inject_cmd =
      app.add_subcommand("inject", "Inject real instances into generated frames");
  inject_cmd
      ->add_option("--frames", inject.frames_manifest, "Generated dataset manifest")
      ->required();
  inject_cmd->add_option("--real-manifest", inject.real_manifest,
                         "Real dataset manifest (bank source)");
  inject_cmd->add_option("--cuboids", inject.cuboids, "Cuboid JSON-lines file");
  inject_cmd->add_option("--bank", inject.bank_dir, "Instance bank directory")
      ->required();
  inject_cmd->add_option("--catalog", inject.catalog, "Sensor catalog")->required();
  inject_cmd->add_option("--out", inject.out_dir, "Output dataset directory")
      ->required();
  inject_cmd->add_option("--rates", inject.rates, "Per-class rates, class:rate,...")
      ->required();
  inject_cmd->add_option("--score-threshold", inject.score_threshold,
                         "Cuboid score threshold");
  inject_cmd->add_option("--min-points", inject.min_points,
                         "Minimum points per bank entry");
  inject_cmd->add_option("--seed", inject.seed, "Injection seed");
  add_global(inject_cmd, global);

  auto* fuse_cmd =
      app.add_subcommand("fuse", "Mix generated frames with real frames by range");
  fuse_cmd->add_option("--gen", fuse.gen_manifest, "Generated dataset manifest")
      ->required();
  fuse_cmd->add_option("--real", fuse.real_manifest, "Real dataset manifest")
      ->required();
  fuse_cmd->add_option("--catalog", fuse.catalog, "Sensor catalog")->required();
  fuse_cmd->add_option("--out", fuse.out_dir, "Output dataset directory")->required();
  fuse_cmd->add_option("--threshold", fuse.confidence_threshold,
                       "Pseudo-label confidence threshold");
  fuse_cmd->add_option("--seed", fuse.seed, "Pairing seed");
  add_global(fuse_cmd, global);

  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against labels");
  eval_cmd->add_option("--gt", eval.gt_manifest, "Ground-truth manifest")->required();
  eval_cmd->add_option("--pred", eval.pred_manifest, "Prediction manifest")
      ->required();
  eval_cmd->add_option("--gt-map", eval.gt_map, "Ground-truth class map")->required();
  eval_cmd->add_option("--pred-map", eval.pred_map, "Prediction class map")
      ->required();
  eval_cmd->add_option("--out", eval.out_dir, "Report directory")->required();
  add_global(eval_cmd, global);

  auto* pipeline_cmd =
      app.add_subcommand("pipeline", "Run the configured stage chain");
  pipeline_cmd->add_option("--config", pipeline_config, "Pipeline config file")
      ->required();
  add_global(pipeline_cmd, global);

  CLI11_PARSE(app, argc, argv);

  try {
    relidar::stages::apply_runtime_options(global.workers, global.force_scalar);
    if (synth_cmd->parsed()) {
      relidar::stages::run_synth(synth);
    } else if (aggregate_cmd->parsed()) {
      relidar::stages::run_aggregate(aggregate);
    } else if (mesh_cmd->parsed()) {
      relidar::stages::run_mesh(mesh);
    } else if (trace_cmd->parsed()) {
      relidar::stages::run_trace(trace);
    } else if (inject_cmd->parsed()) {
      relidar::stages::run_inject(inject);
    } else if (fuse_cmd->parsed()) {
      relidar::stages::run_fuse(fuse);
    } else if (eval_cmd->parsed()) {
      relidar::stages::run_eval(eval);
    } else if (pipeline_cmd->parsed()) {
      relidar::stages::run_pipeline(relidar::ConfigFile::parse_file(pipeline_config));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
