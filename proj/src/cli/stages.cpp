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

#include "relidar/cli/stages.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "relidar/aggregate/aggregate.hpp"
#include "relidar/core/parallel.hpp"
#include "relidar/eval/eval.hpp"
#include "relidar/fuse/fuse.hpp"
#include "relidar/ingest/cuboids.hpp"
#include "relidar/ingest/kitti.hpp"
#include "relidar/ingest/manifest.hpp"
#include "relidar/inject/inject.hpp"
#include "relidar/kernels/kernels.hpp"
#include "relidar/reconstruct/attributes.hpp"
#include "relidar/reconstruct/marching_cubes.hpp"
#include "relidar/reconstruct/mesh.hpp"
#include "relidar/reconstruct/normals.hpp"
#include "relidar/reconstruct/tsdf.hpp"
#include "relidar/synth/synthworld.hpp"
#include "relidar/trace/trace.hpp"

namespace relidar::stages {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const std::uint8_t b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string checksum_of(const std::string& path) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(read_file_bytes(path))));
  return buf;
}

std::string frame_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06zu", index);
  return buf;
}

/// Inputs are keyed relative to out_dir (like the outputs), so a rerun into
/// a sibling directory produces byte-identical manifests.
void write_run_manifest(const std::string& out_dir, const std::string& command,
                        const json& parameters,
                        const std::vector<std::string>& inputs,
                        const std::vector<std::string>& outputs_rel) {
  json doc;
  doc["command"] = command;
  doc["parameters"] = parameters;
  doc["kernel_backend"] = kernels::backend_name();
  json in = json::object();
  for (const auto& path : inputs) {
    std::error_code ec;
    const fs::path rel = fs::relative(fs::absolute(path), fs::absolute(out_dir), ec);
    const std::string key = (ec || rel.empty()) ? path : rel.generic_string();
    in[key] = checksum_of(path);
  }
  doc["inputs"] = std::move(in);
  json out = json::object();
  for (const auto& rel : outputs_rel) {
    out[rel] = checksum_of((fs::path(out_dir) / rel).string());
  }
  doc["outputs"] = std::move(out);

  std::ofstream file(fs::path(out_dir) / "run_manifest.json", std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write run manifest in " + out_dir);
  file << doc.dump(2) << '\n';
}

void report(const std::string& stage, const json& extra) {
  json doc = extra;
  doc["stage"] = stage;
  std::cout << doc.dump() << std::endl;
}

void log_line(const std::string& message) { std::cerr << message << '\n'; }

std::vector<std::string> list_scene_dirs(const std::string& root) {
  std::vector<std::string> dirs;
  if (!fs::is_directory(root)) {
    throw std::runtime_error("not a directory: " + root);
  }
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() &&
        fs::exists(entry.path() / "scene_meta.json")) {
      dirs.push_back(entry.path().string());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw std::runtime_error("no scene directories under " + root);
  return dirs;
}

struct DatasetWriter {
  fs::path root;
  SequenceManifest manifest;
  std::vector<std::string> written;  // relative paths

  explicit DatasetWriter(const std::string& out_dir, const std::string& sensor)
      : root(out_dir) {
    fs::create_directories(root / "points");
    fs::create_directories(root / "labels");
    manifest.sensor = sensor;
    manifest.dynamic_class_ids = default_dynamic_classes();
  }

  void add_frame(const PointCloud& cloud, const PoseSE3& pose, double timestamp) {
    const std::string name = frame_name(manifest.frames.size());
    const std::string point_rel = "points/" + name + ".bin";
    const std::string label_rel = "labels/" + name + ".label";
    write_kitti_frame(cloud, (root / point_rel).string(), (root / label_rel).string());
    FrameEntry entry;
    entry.point_file = point_rel;
    entry.label_file = label_rel;
    entry.pose = pose;
    entry.timestamp = timestamp;
    manifest.frames.push_back(std::move(entry));
    written.push_back(point_rel);
    written.push_back(label_rel);
  }

  void finish() {
    write_manifest(manifest, (root / "manifest.json").string());
    written.push_back("manifest.json");
  }
};

}  // namespace

void apply_runtime_options(int workers, bool force_scalar) {
  set_worker_count(workers);
  if (force_scalar) kernels::force_backend(kernels::Backend::Scalar);
}

void run_synth(const SynthStage& stage) {
  const SensorModel sensor = load_sensor(stage.catalog, stage.sensor);
  Complexity complexity;
  if (stage.complexity == "small") {
    complexity = Complexity::Small;
  } else if (stage.complexity == "medium") {
    complexity = Complexity::Medium;
  } else {
    throw std::runtime_error("synth: complexity must be small or medium");
  }

  const SynthWorld world = generate_world(stage.seed, complexity);
  SynthSequenceParams params;
  params.frames = stage.frames;
  params.frame_spacing_m = stage.spacing_m;
  params.frame_dt_s = stage.dt_s;
  emit_sequence(world, sensor, params, stage.out_dir);

  std::vector<std::string> outputs = {"poses.txt", "manifest.json", "cuboids.jsonl",
                                      "world.json"};
  for (std::size_t i = 0; i < stage.frames; ++i) {
    outputs.push_back("points/" + frame_name(i) + ".bin");
    outputs.push_back("labels/" + frame_name(i) + ".label");
  }
  json params_json{{"seed", stage.seed},
                   {"complexity", stage.complexity},
                   {"frames", stage.frames},
                   {"spacing_m", stage.spacing_m},
                   {"dt_s", stage.dt_s},
                   {"sensor", stage.sensor}};
  write_run_manifest(stage.out_dir, "synth", params_json, {stage.catalog}, outputs);
  report("synth", {{"out_dir", stage.out_dir},
                   {"frames", stage.frames},
                   {"primitives", world.primitives.size()}});
}

std::vector<std::string> run_aggregate(const AggregateStage& stage) {
  const SequenceManifest manifest = read_manifest(stage.manifest);
  const SensorModel sensor = load_sensor(stage.catalog, manifest.sensor);

  const std::size_t total = manifest.frames.size();
  const std::size_t window = stage.window == 0 ? total : stage.window;
  if (stage.overlap >= window) {
    throw std::runtime_error("aggregate: overlap must be smaller than the window");
  }

  std::vector<std::string> scene_dirs;
  std::size_t begin = 0;
  std::size_t scene_index = 0;
  while (begin < total) {
    const std::size_t end = std::min(total, begin + window);
    AggregateParams params;
    params.stride = stage.stride;
    params.world_radius_m = stage.world_radius_m;
    params.frame_begin = begin;
    params.frame_end = end;
    log_line("aggregate: frames [" + std::to_string(begin) + ", " +
             std::to_string(end) + ")");
    const SceneCloud scene = accumulate(manifest, sensor, params);

    const fs::path dir = fs::path(stage.out_dir) / ("scene_" + frame_name(scene_index));
    write_scene(scene, dir.string());
    json params_json{{"stride", stage.stride},
                     {"world_radius_m", stage.world_radius_m},
                     {"frame_begin", begin},
                     {"frame_end", end},
                     {"points", scene.cloud.size()}};
    write_run_manifest(dir.string(), "aggregate", params_json,
                       {stage.manifest, stage.catalog},
                       {"scene.bin", "scene.label", "scene_meta.json"});
    scene_dirs.push_back(dir.string());
    ++scene_index;
    if (end == total) break;
    begin = end - stage.overlap;
  }
  report("aggregate", {{"out_dir", stage.out_dir}, {"scenes", scene_dirs.size()}});
  return scene_dirs;
}

std::vector<std::string> run_mesh(const MeshStage& stage) {
  const auto scene_dirs = list_scene_dirs(stage.scenes_dir);
  std::vector<std::string> mesh_paths;

  for (const std::string& dir : scene_dirs) {
    const SceneCloud scene = read_scene(dir);
    if (scene.cloud.empty()) {
      throw std::runtime_error("mesh: scene " + dir + " is empty");
    }
    const SensorModel sensor = load_sensor(stage.catalog, scene.sensor_name);

    Eigen::Vector3d lo = scene.cloud.points.front().position();
    Eigen::Vector3d hi = lo;
    for (const SemanticPoint& p : scene.cloud.points) {
      lo = lo.cwiseMin(p.position());
      hi = hi.cwiseMax(p.position());
    }
    TsdfVolume volume =
        TsdfVolume::for_bounds(lo, hi, stage.voxel_size_m, stage.truncation_m);
    log_line("mesh: " + dir + " volume " + std::to_string(volume.dims()[0]) + "x" +
             std::to_string(volume.dims()[1]) + "x" + std::to_string(volume.dims()[2]));

    // Per-frame static range images, re-expressed in each sensor pose.
    for (std::size_t s = 0; s < scene.selected_frame_ids.size(); ++s) {
      const std::uint32_t frame_id = scene.selected_frame_ids[s];
      PointCloud frame_points;
      frame_points.frame = Frame::Sensor;
      for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        if (scene.source_frame_ids[i] == frame_id) {
          frame_points.points.push_back(scene.cloud.points[i]);
        }
      }
      if (frame_points.empty()) continue;
      const PoseSE3& sensor_pose = scene.sensor_poses[s];
      frame_points = se3_apply(sensor_pose.inverse(), frame_points);
      frame_points.frame = Frame::Sensor;
      const RangeImage image = build_range_image(sensor, frame_points);
      integrate_frame(volume, sensor, sensor_pose, image);
    }

    LabeledMesh mesh = marching_cubes(volume);
    if (mesh.vertices.empty()) {
      throw std::runtime_error("mesh: empty isosurface for " + dir);
    }
    mesh = transfer_attributes(mesh, scene,
                               AttributeTransferParams{stage.transfer_k, 1e-6});

    if (stage.with_normals) {
      std::vector<Eigen::Vector3d> viewpoints(scene.cloud.size());
      for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        viewpoints[i] = scene.viewpoint_of(i);
      }
      const auto normals = estimate_normals(scene.cloud, 16, viewpoints);
      log_line("mesh: normals degenerate " + std::to_string(normals.degenerate_count) +
               " / " + std::to_string(scene.cloud.size()));
    }

    const std::string mesh_path = (fs::path(dir) / "mesh.ply").string();
    write_mesh_ply(mesh, mesh_path);
    mesh_paths.push_back(mesh_path);
    log_line("mesh: " + std::to_string(mesh.vertices.size()) + " vertices, " +
             std::to_string(mesh.triangles.size()) + " triangles");
  }
  report("mesh", {{"scenes_dir", stage.scenes_dir}, {"meshes", mesh_paths.size()}});
  return mesh_paths;
}

void run_trace(const TraceStage& stage) {
  const SequenceManifest source = read_manifest(stage.manifest);
  const SensorModel target = load_sensor(stage.catalog, stage.target_sensor);
  const auto scene_dirs = list_scene_dirs(stage.scenes_dir);

  DatasetWriter writer(stage.out_dir, stage.target_sensor);
  std::set<std::uint32_t> emitted;
  std::size_t rejected = 0;

  for (const std::string& dir : scene_dirs) {
    const SceneCloud scene = read_scene(dir);
    const std::string mesh_path = (fs::path(dir) / "mesh.ply").string();
    if (!fs::exists(mesh_path)) {
      throw std::runtime_error("trace: missing mesh artifact " + mesh_path +
                               " (run the mesh stage first)");
    }
    const LabeledMesh mesh = read_mesh_ply(mesh_path);

    for (std::size_t s = 0; s < scene.selected_frame_ids.size();
         s += stage.pose_stride) {
      const std::uint32_t frame_id = scene.selected_frame_ids[s];
      if (emitted.count(frame_id)) continue;  // window overlap
      emitted.insert(frame_id);

      const FrameEntry& entry = source.frames.at(frame_id);
      TraceParams params;
      params.supersampling = stage.supersampling;
      params.band_m = stage.band_m;
      params.virtual_pose = entry.pose * target.mount;
      TraceStats trace_stats;
      const PointCloud cloud = trace_sensor(mesh, target, params, &trace_stats);
      rejected += trace_stats.raster.rejected_wide;
      writer.add_frame(cloud, entry.pose, entry.timestamp);

      if (stage.dump_ply) {
        std::vector<Eigen::Vector3d> pts;
        std::vector<float> intensity;
        std::vector<std::uint32_t> classes, instances;
        for (const SemanticPoint& p : cloud.points) {
          pts.push_back(p.position());
          intensity.push_back(p.intensity);
          classes.push_back(p.semantic_class);
          instances.push_back(p.instance_id);
        }
        const std::string rel =
            "points/" + frame_name(writer.manifest.frames.size() - 1) + ".ply";
        write_cloud_ply(pts, intensity, classes, instances,
                        (writer.root / rel).string());
        writer.written.push_back(rel);
      }
    }
  }
  writer.finish();

  json params_json{{"target_sensor", stage.target_sensor},
                   {"supersampling", stage.supersampling},
                   {"pose_stride", stage.pose_stride},
                   {"band_m", stage.band_m},
                   {"rejected_triangles", rejected}};
  write_run_manifest(stage.out_dir, "trace", params_json,
                     {stage.manifest, stage.catalog}, writer.written);
  report("trace", {{"out_dir", stage.out_dir},
                   {"frames", writer.manifest.frames.size()},
                   {"rejected_triangles", rejected}});
}

void run_inject(const InjectStage& stage) {
  const SequenceManifest frames = read_manifest(stage.frames_manifest);
  const SensorModel sensor = load_sensor(stage.catalog, frames.sensor);

  InstanceBank bank;
  if (fs::exists(fs::path(stage.bank_dir) / "bank_index.json")) {
    log_line("inject: reusing bank " + stage.bank_dir);
    bank = read_bank(stage.bank_dir);
  } else {
    if (stage.real_manifest.empty() || stage.cuboids.empty()) {
      throw std::runtime_error(
          "inject: need --real-manifest and --cuboids to build a bank");
    }
    const SequenceManifest real = read_manifest(stage.real_manifest);
    const auto cuboids = read_cuboids(stage.cuboids);
    std::map<std::size_t, std::vector<Cuboid>> by_frame;
    for (const auto& [frame, cuboid] : cuboids) by_frame[frame].push_back(cuboid);

    ExtractParams extract;
    extract.min_points = stage.min_points;
    extract.score_threshold = stage.score_threshold;
    ExtractStats totals;
    for (const auto& [frame_index, frame_cuboids] : by_frame) {
      if (frame_index >= real.frames.size()) {
        throw std::runtime_error("inject: cuboid frame " +
                                 std::to_string(frame_index) +
                                 " outside the real manifest");
      }
      const PointCloud cloud = real.load_frame(frame_index);
      ExtractStats stats;
      auto entries = extract_instances(cloud, frame_cuboids, frame_index, extract,
                                       &stats);
      totals.below_score += stats.below_score;
      totals.below_min_points += stats.below_min_points;
      for (auto& e : entries) bank.entries.push_back(std::move(e));
    }
    bank.rebuild_class_index();
    write_bank(bank, stage.bank_dir);
    log_line("inject: bank " + std::to_string(bank.entries.size()) +
             " entries (dropped " + std::to_string(totals.below_score) +
             " by score, " + std::to_string(totals.below_min_points) +
             " by min points)");
  }

  InjectionPolicy policy;
  policy.rates = parse_rates(stage.rates);
  policy.score_threshold = stage.score_threshold;
  policy.seed = stage.seed;

  DatasetWriter writer(stage.out_dir, frames.sensor);
  std::size_t total_drawn = 0;
  for (std::size_t i = 0; i < frames.frames.size(); ++i) {
    const PointCloud cloud = frames.load_frame(i);
    InjectStats stats;
    const PointCloud out = inject_instances(cloud, sensor, bank, policy, i, &stats);
    total_drawn += stats.drawn;
    writer.add_frame(out, frames.frames[i].pose, frames.frames[i].timestamp);
  }
  writer.finish();

  json params_json{{"rates", stage.rates},
                   {"score_threshold", stage.score_threshold},
                   {"min_points", stage.min_points},
                   {"seed", stage.seed},
                   {"bank_entries", bank.entries.size()}};
  std::vector<std::string> inputs = {stage.frames_manifest, stage.catalog};
  write_run_manifest(stage.out_dir, "inject", params_json, inputs, writer.written);
  report("inject", {{"out_dir", stage.out_dir},
                    {"frames", writer.manifest.frames.size()},
                    {"instances_drawn", total_drawn}});
}

void run_fuse(const FuseStage& stage) {
  const SequenceManifest gen = read_manifest(stage.gen_manifest);
  const SequenceManifest real = read_manifest(stage.real_manifest);
  if (gen.sensor != real.sensor) {
    throw std::runtime_error("fuse: sensor mismatch between pools (" + gen.sensor +
                             " vs " + real.sensor + ")");
  }
  const SensorModel sensor = load_sensor(stage.catalog, gen.sensor);

  FusionParams params;
  params.confidence_threshold = stage.confidence_threshold;
  params.pairing_seed = stage.seed;
  const auto pairing = pair_frames(gen.frames.size(), real.frames.size(), stage.seed);

  DatasetWriter writer(stage.out_dir, gen.sensor);
  json provenance = json::array();
  for (std::size_t i = 0; i < gen.frames.size(); ++i) {
    const PointCloud gen_cloud = gen.load_frame(i);
    const PointCloud real_cloud =
        filter_pseudo(real.load_frame(pairing[i]), params.confidence_threshold);
    const FuseResult fused = fuse_frames(gen_cloud, real_cloud, sensor, params);
    writer.add_frame(fused.cloud, gen.frames[i].pose, gen.frames[i].timestamp);
    provenance.push_back({{"frame", writer.manifest.frames.size() - 1},
                          {"kind", "fused"},
                          {"generated_index", i},
                          {"real_index", pairing[i]},
                          {"cells_from_generated", fused.cells_from_generated},
                          {"cells_from_real", fused.cells_from_real}});
  }
  // Untouched copies of the real pool.
  for (std::size_t i = 0; i < real.frames.size(); ++i) {
    const PointCloud real_cloud = real.load_frame(i);
    writer.add_frame(real_cloud, real.frames[i].pose, real.frames[i].timestamp);
    provenance.push_back({{"frame", writer.manifest.frames.size() - 1},
                          {"kind", "real"},
                          {"real_index", i}});
  }
  writer.finish();

  {
    std::ofstream out(fs::path(stage.out_dir) / "fusion_manifest.json",
                      std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write fusion manifest");
    json doc;
    doc["confidence_threshold"] = stage.confidence_threshold;
    doc["pairing_seed"] = stage.seed;
    doc["frames"] = std::move(provenance);
    out << doc.dump(2) << '\n';
  }
  writer.written.push_back("fusion_manifest.json");

  json params_json{{"confidence_threshold", stage.confidence_threshold},
                   {"seed", stage.seed}};
  write_run_manifest(stage.out_dir, "fuse", params_json,
                     {stage.gen_manifest, stage.real_manifest, stage.catalog},
                     writer.written);
  report("fuse", {{"out_dir", stage.out_dir},
                  {"fused_frames", gen.frames.size()},
                  {"real_frames", real.frames.size()}});
}

void run_eval(const EvalStage& stage) {
  const SequenceManifest gt = read_manifest(stage.gt_manifest);
  const SequenceManifest pred = read_manifest(stage.pred_manifest);
  if (gt.frames.size() != pred.frames.size()) {
    throw std::runtime_error("eval: frame count mismatch (" +
                             std::to_string(gt.frames.size()) + " vs " +
                             std::to_string(pred.frames.size()) + ")");
  }
  const ClassMap map_gt = read_class_map(stage.gt_map);
  const ClassMap map_pred = read_class_map(stage.pred_map);

  std::vector<std::uint32_t> gt_labels, pred_labels;
  for (std::size_t i = 0; i < gt.frames.size(); ++i) {
    const PointCloud a = gt.load_frame(i);
    const PointCloud b = pred.load_frame(i);
    if (a.size() != b.size()) {
      throw std::runtime_error("eval: frame " + std::to_string(i) +
                               " point count mismatch (" + std::to_string(a.size()) +
                               " vs " + std::to_string(b.size()) + ")");
    }
    for (const SemanticPoint& p : a.points) gt_labels.push_back(p.semantic_class);
    for (const SemanticPoint& p : b.points) pred_labels.push_back(p.semantic_class);
  }

  const ScoreReport result = score(gt_labels, pred_labels, map_gt, map_pred);
  fs::create_directories(stage.out_dir);
  {
    std::ofstream out(fs::path(stage.out_dir) / "report.json", std::ios::trunc);
    out << result.to_json() << '\n';
  }
  {
    std::ofstream out(fs::path(stage.out_dir) / "report.txt", std::ios::trunc);
    out << result.to_text();
  }
  log_line(result.to_text());

  json params_json{{"gt_map", stage.gt_map}, {"pred_map", stage.pred_map}};
  write_run_manifest(stage.out_dir, "eval", params_json,
                     {stage.gt_manifest, stage.pred_manifest, stage.gt_map,
                      stage.pred_map},
                     {"report.json", "report.txt"});
  report("eval", {{"out_dir", stage.out_dir},
                  {"miou", result.miou},
                  {"scored_points", result.scored_points}});
}

void run_pipeline(const ConfigFile& config) {
  apply_runtime_options(static_cast<int>(config.get_int("pipeline.workers", 0)),
                        config.get_bool("pipeline.force_scalar", false));
  const std::string out_root = config.get("pipeline.output_dir");
  if (out_root.empty()) {
    throw std::runtime_error("pipeline: missing pipeline.output_dir");
  }
  const auto seed = static_cast<std::uint64_t>(config.get_int("pipeline.seed", 0));
  const std::string manifest = config.get("dataset.manifest");
  const std::string catalog = config.get("dataset.catalog");
  const std::string target_sensor = config.get("dataset.target_sensor");
  if (manifest.empty() || catalog.empty() || target_sensor.empty()) {
    throw std::runtime_error(
        "pipeline: dataset.manifest, dataset.catalog and dataset.target_sensor "
        "are required");
  }

  AggregateStage aggregate;
  aggregate.manifest = manifest;
  aggregate.catalog = catalog;
  aggregate.out_dir = (fs::path(out_root) / "scenes").string();
  aggregate.stride = static_cast<std::size_t>(config.get_int("aggregate.stride", 1));
  aggregate.world_radius_m = config.get_double("aggregate.world_radius_m", 120.0);
  aggregate.window = static_cast<std::size_t>(config.get_int("aggregate.window", 200));
  aggregate.overlap = static_cast<std::size_t>(config.get_int("aggregate.overlap", 50));
  run_aggregate(aggregate);

  MeshStage mesh;
  mesh.scenes_dir = aggregate.out_dir;
  mesh.catalog = catalog;
  mesh.voxel_size_m = config.get_double("mesh.voxel_size_m", 0.1);
  mesh.truncation_m = config.get_double("mesh.truncation_m", 0.3);
  mesh.transfer_k = static_cast<int>(config.get_int("mesh.transfer_k", 10));
  mesh.with_normals = config.get_bool("mesh.with_normals", false);
  run_mesh(mesh);

  TraceStage trace;
  trace.scenes_dir = aggregate.out_dir;
  trace.manifest = manifest;
  trace.catalog = catalog;
  trace.target_sensor = target_sensor;
  trace.out_dir = (fs::path(out_root) / "traced").string();
  trace.supersampling = static_cast<int>(config.get_int("trace.supersampling", 3));
  trace.pose_stride = static_cast<std::size_t>(config.get_int("trace.pose_stride", 1));
  trace.band_m = config.get_double("trace.band_m", 2.0 * mesh.voxel_size_m);
  trace.dump_ply = config.get_bool("trace.dump_ply", false);
  run_trace(trace);

  std::string current = trace.out_dir;

  if (config.get_bool("inject.enabled", false)) {
    InjectStage inject;
    inject.frames_manifest = (fs::path(current) / "manifest.json").string();
    inject.real_manifest = config.get("inject.real_manifest", manifest);
    inject.cuboids = config.get("inject.cuboids");
    inject.bank_dir = (fs::path(out_root) / "bank").string();
    inject.catalog = catalog;
    inject.out_dir = (fs::path(out_root) / "injected").string();
    inject.rates = config.get("inject.rates");
    inject.score_threshold = config.get_double("inject.score_threshold", 0.5);
    inject.min_points =
        static_cast<std::size_t>(config.get_int("inject.min_points", 5));
    inject.seed = seed;
    run_inject(inject);
    current = inject.out_dir;
  }

  if (config.get_bool("fuse.enabled", false)) {
    FuseStage fuse;
    fuse.gen_manifest = (fs::path(current) / "manifest.json").string();
    fuse.real_manifest = config.get("fuse.real_manifest");
    if (fuse.real_manifest.empty()) {
      throw std::runtime_error("pipeline: fuse.enabled needs fuse.real_manifest");
    }
    fuse.catalog = catalog;
    fuse.out_dir = (fs::path(out_root) / "fused").string();
    fuse.confidence_threshold = config.get_double("fuse.confidence_threshold", 0.85);
    fuse.seed = seed;
    run_fuse(fuse);
    current = fuse.out_dir;
  }

  if (config.get_bool("eval.enabled", false)) {
    EvalStage eval;
    eval.gt_manifest = config.get("eval.gt_manifest");
    eval.pred_manifest = (fs::path(current) / "manifest.json").string();
    eval.gt_map = config.get("eval.gt_map");
    eval.pred_map = config.get("eval.pred_map");
    eval.out_dir = (fs::path(out_root) / "eval").string();
    if (eval.gt_manifest.empty() || eval.gt_map.empty() || eval.pred_map.empty()) {
      throw std::runtime_error(
          "pipeline: eval.enabled needs eval.gt_manifest, eval.gt_map, eval.pred_map");
    }
    run_eval(eval);
  }

  report("pipeline", {{"output_dir", out_root}, {"final_dataset", current}});
}

}  // namespace relidar::stages
