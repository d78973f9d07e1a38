// mistaken-lab: generate belief scenes, report dataset statistics, train and
// evaluate mistaken-belief classifiers, run ablations and baselines, and
// render scenes as SVG. Every subcommand writes a run manifest so a run can
// be reproduced from its output directory alone.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mistaken/beliefs.hpp"
#include "mistaken/eval.hpp"
#include "mistaken/run_config.hpp"
#include "mistaken/stats.hpp"
#include "mistaken/svg.hpp"

namespace {

using namespace mistaken;

std::string frame_file_name(const char* stem, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%03d.svg", stem, index);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

int cmd_generate(const std::string& out, int count, std::uint64_t seed,
                 const RunConfig& cfg) {
  const Dataset ds = generate_dataset(count, seed, cfg.targets, std::nullopt, cfg.jobs);
  ensure_dir(out);
  save_dataset(ds, out);
  nlohmann::json outcome;
  outcome["count"] = count;
  outcome["master_seed"] = seed;
  outcome["mistaken_fraction"] = ds.manifest.measured.mistaken_frame_fraction;
  outcome["characters_per_frame"] = ds.manifest.measured.mean_characters_per_frame;
  save_manifest(cfg, "generate", outcome, out + "/run-manifest.json");
  std::printf("wrote %d scenes (mistaken fraction %s, characters/frame %s)\n", count,
              fmt2(100.0 * ds.manifest.measured.mistaken_frame_fraction).c_str(),
              fmt2(ds.manifest.measured.mean_characters_per_frame).c_str());
  return 0;
}

int cmd_stats(const std::string& data, const std::string& out, const RunConfig& cfg) {
  const Dataset ds = load_dataset(data, cfg.jobs);
  const StatsReport report = dataset_stats(ds);
  ensure_dir(out);
  write_stats(report, out);
  nlohmann::json outcome;
  outcome["scenes"] = ds.scenes.size();
  outcome["present_cells"] = report.present_cells;
  outcome["mistaken_cells"] = report.mistaken_cells;
  save_manifest(cfg, "stats", outcome, out + "/run-manifest.json");
  std::printf("stats over %zu scenes: %lld of %lld present cells mistaken\n",
              ds.scenes.size(), report.mistaken_cells, report.present_cells);
  return 0;
}

int cmd_train(const std::string& data, const std::string& model_path, RunConfig cfg,
              const std::string& variant_flag) {
  if (!variant_flag.empty()) {
    const std::optional<Variant> v = variant_from_name(variant_flag);
    if (!v) throw ValidationError("unknown variant '" + variant_flag + "'");
    cfg.variant = *v;
  }
  const Dataset ds = load_dataset(data, cfg.jobs);
  const FeatureStore store = build_store(ds, MethodId::MultipleImage, cfg.variant, cfg.jobs);
  const SplitIndices split =
      split_dataset(static_cast<int>(ds.scenes.size()), cfg.train.seed);
  std::vector<TrainExample> rows = make_training_rows(ds, store, split.train);
  rows = balance_training_rows(rows, cfg.train.seed);
  std::vector<TrainExample> val_rows = make_training_rows(ds, store, split.val);
  if (cfg.variant == Variant::Rewind) {
    rewind_targets(rows);
    rewind_targets(val_rows);
  }
  const TrainResult result = train(rows, val_rows, cfg.train);
  save_model(model_path, result.params, cfg.train, result.history);
  nlohmann::json outcome;
  outcome["variant"] = variant_name(cfg.variant);
  outcome["epochs"] = result.history.size();
  outcome["best_val_accuracy"] =
      result.history.empty() ? 0.0 : result.history.back().val_accuracy;
  double best = 0.0;
  for (const EpochStat& e : result.history) best = std::max(best, e.val_accuracy);
  outcome["best_val_accuracy"] = best;
  save_manifest(cfg, "train", outcome, model_path + ".manifest.json");
  std::printf("trained %zu epochs, best val accuracy %s\n", result.history.size(),
              fmt2(best).c_str());
  return 0;
}

int cmd_eval(const std::string& data, const std::string& model_path,
             const std::string& task, int reps, std::uint64_t seed,
             const std::string& out, RunConfig cfg) {
  std::vector<TaskKind> tasks;
  if (task == "who") {
    tasks = {TaskKind::Who};
  } else if (task == "when") {
    tasks = {TaskKind::When};
  } else if (task == "joint") {
    tasks = {TaskKind::Joint};
  } else if (task == "all") {
    tasks = {TaskKind::Joint, TaskKind::Who, TaskKind::When};
  } else {
    throw ValidationError("unknown task '" + task + "' (who|when|joint|all)");
  }
  if (reps < 1) throw ValidationError("--reps must be >= 1");
  const Dataset ds = load_dataset(data, cfg.jobs);
  const LoadedModel model = load_model(model_path);
  if (model.params.D != kFeatDim)
    throw ValidationError("model dimension " + std::to_string(model.params.D) +
                          " does not match grid features (" +
                          std::to_string(kFeatDim) + ")");
  const FeatureStore store =
      build_store(ds, MethodId::MultipleImage, Variant::Standard, cfg.jobs);

  // The loaded model is fixed; repetitions resample the evaluation split and
  // the balancing draw.
  EvalReport report;
  for (TaskKind tk : tasks) {
    EvalReport::Row row;
    row.method = "model";
    row.task = tk;
    for (int r = 0; r < reps; ++r) {
      const std::uint64_t rep_seed = seed + static_cast<std::uint64_t>(r);
      const SplitIndices split =
          split_dataset(static_cast<int>(ds.scenes.size()), rep_seed);
      std::vector<EvalExample> ex = make_eval_examples(ds, store, split.test, tk);
      ex = balance(ex, rep_seed + static_cast<std::uint64_t>(tk));
      row.values.push_back(run_task(model.params, ds, store, ex, cfg.jobs));
    }
    finish_row(row);
    report.rows.push_back(std::move(row));
  }
  ensure_dir(out);
  write_report(report, out);
  nlohmann::json outcome;
  outcome["task"] = task;
  outcome["repetitions"] = reps;
  outcome["base_seed"] = seed;
  for (const auto& row : report.rows)
    outcome[std::string("mean_") + task_name(row.task)] = row.mean;
  save_manifest(cfg, "eval", outcome, out + "/run-manifest.json");
  for (const auto& row : report.rows)
    std::printf("%s: %s (%s)\n", task_name(row.task), fmt2(row.mean).c_str(),
                fmt2(row.stdev).c_str());
  return 0;
}

int cmd_baselines(const std::string& data, const std::string& out, RunConfig cfg) {
  const Dataset ds = load_dataset(data, cfg.jobs);
  ExperimentConfig ec;
  ec.repetitions = cfg.repetitions;
  ec.base_seed = cfg.base_seed;
  ec.train = cfg.train;
  ec.jobs = cfg.jobs;

  const std::vector<MethodId> methods = resolved_methods(cfg);
  bool needs_visual = false;
  for (MethodId id : methods) needs_visual = needs_visual || method_traits(id).visual;
  std::optional<FeatureStore> visual;
  if (needs_visual)
    visual.emplace(build_store(ds, MethodId::MultipleImage, Variant::Standard, cfg.jobs));

  std::vector<EvalReport> parts;
  for (MethodId id : methods) {
    const MethodTraits& tr = method_traits(id);
    const FeatureStore* shared = tr.visual ? &*visual : nullptr;
    parts.push_back(run_experiment(ds, id, ec, shared));
    std::printf("%s done\n", tr.name);
  }
  const EvalReport report = merge_reports(parts);
  ensure_dir(out);
  write_report(report, out);
  nlohmann::json outcome;
  outcome["repetitions"] = ec.repetitions;
  outcome["base_seed"] = ec.base_seed;
  nlohmann::json names = nlohmann::json::array();
  for (MethodId id : methods) names.push_back(method_traits(id).name);
  outcome["methods"] = names;
  save_manifest(cfg, "baselines", outcome, out + "/run-manifest.json");
  return 0;
}

int cmd_ablate(const std::string& data, const std::string& out, RunConfig cfg,
               int reps) {
  const Dataset ds = load_dataset(data, cfg.jobs);
  ExperimentConfig ec;
  ec.repetitions = reps;
  ec.base_seed = cfg.base_seed;
  ec.train = cfg.train;
  ec.jobs = cfg.jobs;

  const FeatureStore standard =
      build_store(ds, MethodId::MultipleImage, Variant::Standard, cfg.jobs);
  std::vector<EvalReport> parts;
  parts.push_back(run_experiment(ds, MethodId::MultipleImage, ec, &standard));
  std::printf("multiple_image done\n");
  for (Variant v : {Variant::Flipped, Variant::Centered, Variant::Rewind}) {
    parts.push_back(run_ablation(ds, v, ec, &standard));
    std::printf("%s done\n", variant_name(v));
  }
  const EvalReport report = merge_reports(parts);
  ensure_dir(out);
  write_report(report, out);
  nlohmann::json outcome;
  outcome["repetitions"] = reps;
  outcome["base_seed"] = ec.base_seed;
  save_manifest(cfg, "ablate", outcome, out + "/run-manifest.json");
  return 0;
}

int cmd_animate(const std::string& scene_path, int steps, const std::string& out,
                const RunConfig& cfg) {
  if (steps < 1) throw ValidationError("--steps must be >= 1");
  const Scene scene = load_scene(scene_path);
  ensure_dir(out);
  const int total = (kFrameCount - 1) * steps + 1;
  for (int s = 0; s < total; ++s) {
    const int t = std::min(kFrameCount - 2, s / steps);
    const double alpha = static_cast<double>(s - t * steps) / steps;
    const Frame frame = interpolate_frame(scene, t, alpha);
    write_text_file(out + "/" + frame_file_name("frame", s), render_svg(frame));
  }
  nlohmann::json outcome;
  outcome["steps_per_gap"] = steps;
  outcome["frames_written"] = total;
  outcome["scene_seed"] = scene.seed;
  save_manifest(cfg, "animate", outcome, out + "/run-manifest.json");
  std::printf("wrote %d interpolated frames\n", total);
  return 0;
}

int cmd_render(const std::string& scene_path, const std::string& out, int highlight,
               const RunConfig& cfg) {
  const Scene scene = load_scene(scene_path);
  std::optional<CharacterId> mark;
  if (highlight >= 0) {
    if (highlight >= kCharacterCount)
      throw ValidationError("--highlight must be in [0, 19]");
    mark = CharacterId{highlight};
  }
  ensure_dir(out);
  for (int t = 0; t < kFrameCount; ++t)
    write_text_file(out + "/" + frame_file_name("frame", t),
                    render_svg(scene.frames[static_cast<std::size_t>(t)], mark));
  nlohmann::json outcome;
  outcome["frames_written"] = kFrameCount;
  outcome["scene_seed"] = scene.seed;
  outcome["highlight"] = highlight;
  save_manifest(cfg, "render", outcome, out + "/run-manifest.json");
  std::printf("wrote %d frames\n", kFrameCount);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mistaken-lab: synthetic mistaken-belief scenes and classifiers"};
  app.require_subcommand(1);

  std::string config_path, data, out, model_path, scene_path, task = "all";
  std::string variant_flag;
  int count = 0, reps = 0, steps = 4, jobs = 0, highlight = -1;
  std::uint64_t seed = 0;

  auto add_jobs = [&](CLI::App* sub) {
    sub->add_option("--jobs", jobs, "worker bound (default: MISTAKEN_LAB_JOBS or cores)");
  };
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file");
  };

  CLI::App* generate = app.add_subcommand("generate", "generate a labeled dataset");
  generate->add_option("--count", count, "number of scenes")->required();
  generate->add_option("--seed", seed, "master seed")->required();
  generate->add_option("--out", out, "output directory")->required();
  add_config(generate);
  add_jobs(generate);

  CLI::App* stats = app.add_subcommand("stats", "dataset statistics report");
  stats->add_option("--data", data, "dataset directory")->required();
  stats->add_option("--out", out, "output directory")->required();
  add_config(stats);
  add_jobs(stats);

  CLI::App* train = app.add_subcommand("train", "train one classifier");
  train->add_option("--data", data, "dataset directory")->required();
  train->add_option("--config", config_path, "key = value config file")->required();
  train->add_option("--model", model_path, "model output file")->required();
  train->add_option("--variant", variant_flag,
                    "standard|flipped|centered|rewind (default from config)");
  add_jobs(train);

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a trained model");
  eval_cmd->add_option("--data", data, "dataset directory")->required();
  eval_cmd->add_option("--model", model_path, "model file")->required();
  eval_cmd->add_option("--task", task, "who|when|joint|all")->required();
  eval_cmd->add_option("--reps", reps, "evaluation repetitions")->required();
  eval_cmd->add_option("--seed", seed, "base seed")->required();
  eval_cmd->add_option("--out", out, "output directory")->required();
  add_config(eval_cmd);
  add_jobs(eval_cmd);

  CLI::App* ablate = app.add_subcommand("ablate", "feature-variant ablations");
  ablate->add_option("--data", data, "dataset directory")->required();
  ablate->add_option("--config", config_path, "key = value config file")->required();
  ablate->add_option("--reps", reps, "repetitions")->default_val(6);
  ablate->add_option("--out", out, "output directory")->required();
  add_jobs(ablate);

  CLI::App* baselines = app.add_subcommand("baselines", "full method roster");
  baselines->add_option("--data", data, "dataset directory")->required();
  baselines->add_option("--out", out, "output directory")->required();
  add_config(baselines);
  baselines->add_option("--reps", reps, "override config repetitions");
  add_jobs(baselines);

  CLI::App* animate = app.add_subcommand("animate", "interpolated SVG flip-book");
  animate->add_option("--scene", scene_path, "scene file")->required();
  animate->add_option("--steps", steps, "interpolation steps per frame gap")->required();
  animate->add_option("--out", out, "output directory")->required();

  CLI::App* render = app.add_subcommand("render", "render the 8 keyframes");
  render->add_option("--scene", scene_path, "scene file")->required();
  render->add_option("--out", out, "output directory")->required();
  render->add_option("--highlight", highlight, "character id to mark with an arrow");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (jobs > 0) cfg.jobs = jobs;
    if (baselines->parsed() && reps > 0) cfg.repetitions = reps;

    if (generate->parsed()) return cmd_generate(out, count, seed, cfg);
    if (stats->parsed()) return cmd_stats(data, out, cfg);
    if (train->parsed()) return cmd_train(data, model_path, cfg, variant_flag);
    if (eval_cmd->parsed()) return cmd_eval(data, model_path, task, reps, seed, out, cfg);
    if (ablate->parsed()) return cmd_ablate(data, out, cfg, reps);
    if (baselines->parsed()) return cmd_baselines(data, out, cfg);
    if (animate->parsed()) return cmd_animate(scene_path, steps, out, cfg);
    if (render->parsed()) return cmd_render(scene_path, out, highlight, cfg);
    std::fprintf(stderr, "error: no subcommand\n");
    return 1;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
