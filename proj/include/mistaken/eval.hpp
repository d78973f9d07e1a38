#pragma once

// Task definitions (who / when / joint), scene-level splits, 50/50
// balancing, max aggregation, the method roster (chance anchors, hand-feature
// baselines, single- and multiple-image models), repeated experiments with
// mean/std reporting, and the ablation runner.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mistaken/dataset_io.hpp"
#include "mistaken/features.hpp"
#include "mistaken/parallel.hpp"
#include "mistaken/trainer.hpp"

namespace mistaken {

enum class TaskKind : std::uint8_t { Who, When, Joint };

inline const char* task_name(TaskKind t) {
  switch (t) {
    case TaskKind::Who: return "who";
    case TaskKind::When: return "when";
    case TaskKind::Joint: return "joint";
  }
  return "?";
}

struct EvalExample {
  TaskKind task = TaskKind::Joint;
  int scene_index = -1;
  int character_id = -1;  // unused for When
  int frame = -1;         // unused for Who
  bool label = false;
};

struct SplitIndices {
  std::vector<int> train, val, test;
};

inline SplitIndices split_dataset(int scene_count, std::uint64_t seed) {
  if (scene_count < 10)
    throw ValidationError("split_dataset: need at least 10 scenes, got " +
                          std::to_string(scene_count));
  std::vector<int> order(static_cast<std::size_t>(scene_count));
  for (int i = 0; i < scene_count; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(mix_seed(seed, 0x59717ull));
  rng.shuffle(order);
  const int n_train = static_cast<int>(0.8 * scene_count);
  const int n_val = static_cast<int>(0.1 * scene_count);
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  return s;
}

namespace eval_detail {

// Undersamples the majority class to the minority count, then shuffles.
// `label_of` reads the class of element i.
template <typename T, typename LabelFn>
std::vector<T> balance_impl(const std::vector<T>& items, LabelFn label_of,
                            std::uint64_t seed, const char* what) {
  std::vector<int> pos, neg;
  for (std::size_t i = 0; i < items.size(); ++i)
    (label_of(items[i]) ? pos : neg).push_back(static_cast<int>(i));
  if (pos.empty())
    throw ValidationError(std::string(what) + ": no positive examples");
  if (neg.empty())
    throw ValidationError(std::string(what) + ": no negative examples");
  Rng rng(mix_seed(seed, 0xBA1ull));
  rng.shuffle(pos);
  rng.shuffle(neg);
  const std::size_t keep = std::min(pos.size(), neg.size());
  std::vector<int> chosen;
  chosen.insert(chosen.end(), pos.begin(), pos.begin() + keep);
  chosen.insert(chosen.end(), neg.begin(), neg.begin() + keep);
  rng.shuffle(chosen);
  std::vector<T> out;
  out.reserve(chosen.size());
  for (int i : chosen) out.push_back(items[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace eval_detail

inline std::vector<EvalExample> balance(const std::vector<EvalExample>& examples,
                                        std::uint64_t seed) {
  return eval_detail::balance_impl(
      examples, [](const EvalExample& e) { return e.label; }, seed, "balance");
}

inline double aggregate_max(const std::vector<double>& scores) {
  if (scores.empty()) throw ValidationError("aggregate_max: empty score list");
  double m = scores[0];
  for (double s : scores) m = std::max(m, s);
  return m;
}

// --- feature store ----------------------------------------------------------

// Features for every (scene, character-with-any-presence) pair of a dataset,
// built once and shared across repetitions (splits never change features).
class FeatureStore {
 public:
  FeatureStore(const Dataset& ds,
               const std::function<FeatureSeq(const Scene&, CharacterId)>& build,
               int jobs = 0) {
    const int n = static_cast<int>(ds.scenes.size());
    candidates_.resize(static_cast<std::size_t>(n));
    seqs_.resize(static_cast<std::size_t>(n));
    parallel_for(n, jobs, [&](int i) {
      const Scene& scene = ds.scenes[static_cast<std::size_t>(i)];
      for (int c = 0; c < kCharacterCount; ++c) {
        bool ever = false;
        for (const Frame& f : scene.frames) ever = ever || f.characters[c].present;
        if (!ever) continue;
        candidates_[static_cast<std::size_t>(i)].push_back(c);
        seqs_[static_cast<std::size_t>(i)][c] =
            std::make_shared<const FeatureSeq>(build(scene, CharacterId{c}));
      }
    });
  }

  const std::vector<int>& candidates(int scene_index) const {
    return candidates_[static_cast<std::size_t>(scene_index)];
  }
  const std::shared_ptr<const FeatureSeq>& get(int scene_index, int character) const {
    const auto& p = seqs_[static_cast<std::size_t>(scene_index)][character];
    if (!p) throw ValidationError("FeatureStore: no features for character " +
                                  std::to_string(character) + " in scene " +
                                  std::to_string(scene_index));
    return p;
  }

 private:
  std::vector<std::vector<int>> candidates_;
  std::vector<std::array<std::shared_ptr<const FeatureSeq>, kCharacterCount>> seqs_;
};

// --- methods ----------------------------------------------------------------

enum class MethodId : std::uint8_t {
  ChanceConstant,
  ChanceShuffled,
  Time,
  Pose,
  TimePose,
  Expression,
  CharacterId,
  Present,
  SingleImage,
  MultipleImage,
};
inline constexpr int kMethodCount = 10;

struct MethodTraits {
  const char* name;
  bool trains;
  bool visual;  // uses the grid features rather than a hand encoding
  BaselineKind baseline;
  int K;
};

inline const MethodTraits& method_traits(MethodId id) {
  static constexpr MethodTraits kTable[kMethodCount] = {
      {"chance", false, false, BaselineKind::Time, 1},
      {"chance_shuffled", false, false, BaselineKind::Time, 1},
      {"time", true, false, BaselineKind::Time, 1},
      {"pose", true, false, BaselineKind::Pose, 1},
      {"time_pose", true, false, BaselineKind::TimePose, 1},
      {"expression", true, false, BaselineKind::Expression, 7},
      {"character_id", true, false, BaselineKind::CharacterId, 7},
      {"present", true, false, BaselineKind::Present, 7},
      {"single_image", true, true, BaselineKind::SingleImage, 1},
      {"multiple_image", true, true, BaselineKind::SingleImage, 7},
  };
  return kTable[static_cast<int>(id)];
}

inline std::optional<MethodId> method_from_name(const std::string& name) {
  for (int i = 0; i < kMethodCount; ++i)
    if (name == method_traits(static_cast<MethodId>(i)).name)
      return static_cast<MethodId>(i);
  return std::nullopt;
}

inline FeatureStore build_store(const Dataset& ds, MethodId id, Variant variant,
                                int jobs = 0) {
  const MethodTraits& tr = method_traits(id);
  if (tr.visual)
    return FeatureStore(
        ds,
        [variant](const Scene& s, CharacterId c) {
          return featurize_sequence(s, c, variant);
        },
        jobs);
  return FeatureStore(
      ds,
      [kind = tr.baseline](const Scene& s, CharacterId c) {
        return baseline_features(s, c, kind);
      },
      jobs);
}

// --- example construction ---------------------------------------------------

inline std::vector<EvalExample> make_eval_examples(const Dataset& ds,
                                                   const FeatureStore& store,
                                                   const std::vector<int>& scenes,
                                                   TaskKind task) {
  std::vector<EvalExample> out;
  for (int si : scenes) {
    const Scene& scene = ds.scenes[static_cast<std::size_t>(si)];
    const std::vector<int>& cands = store.candidates(si);
    if (task == TaskKind::Who) {
      for (int c : cands) {
        bool row_or = false;
        for (int t = 0; t < kFrameCount; ++t)
          row_or = row_or || scene.labels.matrix[c][t];
        if (row_or != scene.labels.any[c])
          throw ValidationError("make_eval_examples: any-row aggregate broken");
        out.push_back({TaskKind::Who, si, c, -1, scene.labels.any[c]});
      }
    } else if (task == TaskKind::When) {
      for (int t = 0; t < kFrameCount; ++t) {
        bool any_present = false, col_or = false;
        for (int c = 0; c < kCharacterCount; ++c) {
          const bool present = scene.frames[t].characters[c].present;
          any_present = any_present || present;
          col_or = col_or || (present && scene.labels.matrix[c][t]);
        }
        if (!any_present) continue;  // no candidate can be mistaken here
        out.push_back({TaskKind::When, si, -1, t, col_or});
      }
    } else {
      for (int c : cands)
        for (int t = 0; t < kFrameCount; ++t)
          out.push_back({TaskKind::Joint, si, c, t, scene.labels.matrix[c][t]});
    }
  }
  return out;
}

inline std::vector<TrainExample> make_training_rows(const Dataset& ds,
                                                    const FeatureStore& store,
                                                    const std::vector<int>& scenes) {
  std::vector<TrainExample> rows;
  for (int si : scenes) {
    const Scene& scene = ds.scenes[static_cast<std::size_t>(si)];
    for (int c : store.candidates(si)) {
      TrainExample ex;
      ex.features = store.get(si, c);
      ex.scene_index = si;
      ex.character_id = c;
      for (int t = 0; t < kFrameCount; ++t) ex.targets[t] = scene.labels.matrix[c][t];
      rows.push_back(std::move(ex));
    }
  }
  return rows;
}

inline std::vector<TrainExample> balance_training_rows(
    const std::vector<TrainExample>& rows, std::uint64_t seed) {
  return eval_detail::balance_impl(
      rows,
      [](const TrainExample& r) {
        bool any = false;
        for (bool t : r.targets) any = any || t;
        return any;
      },
      seed, "balance_training_rows");
}

// Reverses both features and targets, keeping supervision aligned with the
// reversed story.
inline void rewind_targets(std::vector<TrainExample>& rows) {
  for (TrainExample& r : rows) {
    for (int t = 0; t < kFrameCount / 2; ++t)
      std::swap(r.targets[t], r.targets[kFrameCount - 1 - t]);
  }
}

// --- scoring ----------------------------------------------------------------

// Per-(scene, character) score vectors for every candidate in the given
// scenes, computed once per model.
class ScoreTable {
 public:
  ScoreTable(const Dataset& ds, const FeatureStore& store, const ModelParams& params,
             const std::vector<int>& scenes, int jobs = 0) {
    (void)ds;
    const int n = static_cast<int>(scenes.size());
    std::vector<std::map<int, std::vector<double>>> partial(
        static_cast<std::size_t>(n));
    parallel_for(n, jobs, [&](int i) {
      const int si = scenes[static_cast<std::size_t>(i)];
      for (int c : store.candidates(si))
        partial[static_cast<std::size_t>(i)][c] = forward(params, *store.get(si, c));
    });
    for (int i = 0; i < n; ++i)
      scores_[scenes[static_cast<std::size_t>(i)]] =
          std::move(partial[static_cast<std::size_t>(i)]);
  }

  const std::vector<double>& at(int scene_index, int character) const {
    return scores_.at(scene_index).at(character);
  }
  const std::map<int, std::vector<double>>& scene(int scene_index) const {
    return scores_.at(scene_index);
  }

 private:
  std::map<int, std::map<int, std::vector<double>>> scores_;
};

inline void require_balanced(const std::vector<EvalExample>& examples,
                             const char* what) {
  long long pos = 0;
  for (const EvalExample& e : examples) pos += e.label ? 1 : 0;
  if (examples.empty() || 2 * pos != static_cast<long long>(examples.size()))
    throw ValidationError(std::string(what) + ": evaluation set is not 50/50 (" +
                          std::to_string(pos) + " of " +
                          std::to_string(examples.size()) + " positive)");
}

inline double score_example(const EvalExample& e, const Dataset& ds,
                            const ScoreTable& table) {
  switch (e.task) {
    case TaskKind::Who:
      return aggregate_max(table.at(e.scene_index, e.character_id));
    case TaskKind::When: {
      const Scene& scene = ds.scenes[static_cast<std::size_t>(e.scene_index)];
      std::vector<double> per_char;
      for (const auto& [c, scores] : table.scene(e.scene_index))
        if (scene.frames[e.frame].characters[c].present)
          per_char.push_back(scores[static_cast<std::size_t>(e.frame)]);
      return aggregate_max(per_char);
    }
    case TaskKind::Joint:
      return table.at(e.scene_index, e.character_id)[static_cast<std::size_t>(e.frame)];
  }
  throw ValidationError("score_example: bad task");
}

// Accuracy in percent at threshold 0.5, a score exactly at threshold counting
// as a positive call. Requires a pre-balanced set.
inline double run_task_with_scores(const std::vector<double>& scores,
                                   const std::vector<EvalExample>& examples) {
  require_balanced(examples, "run_task");
  if (scores.size() != examples.size())
    throw ValidationError("run_task: score/example count mismatch");
  long long hit = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const bool call = scores[i] >= 0.5;
    hit += call == examples[i].label;
  }
  return 100.0 * static_cast<double>(hit) / static_cast<double>(examples.size());
}

inline double run_task(const ModelParams& params, const Dataset& ds,
                       const FeatureStore& store,
                       const std::vector<EvalExample>& examples, int jobs = 0) {
  require_balanced(examples, "run_task");
  std::vector<int> scenes;
  for (const EvalExample& e : examples) scenes.push_back(e.scene_index);
  std::sort(scenes.begin(), scenes.end());
  scenes.erase(std::unique(scenes.begin(), scenes.end()), scenes.end());
  const ScoreTable table(ds, store, params, scenes, jobs);
  std::vector<double> scores;
  scores.reserve(examples.size());
  for (const EvalExample& e : examples) scores.push_back(score_example(e, ds, table));
  return run_task_with_scores(scores, examples);
}

// Label-shuffle chance anchor: uses a seeded shuffle of the label vector as
// scores and averages accuracy over all cyclic shifts. On a 50/50 set the
// match count across shifts is exactly n^2/2, so the mean is exactly 50.
inline double chance_shuffled_accuracy(const std::vector<EvalExample>& examples,
                                       std::uint64_t seed) {
  require_balanced(examples, "chance_shuffled");
  const std::size_t n = examples.size();
  std::vector<int> shuffled(n);
  for (std::size_t i = 0; i < n; ++i) shuffled[i] = examples[i].label ? 1 : 0;
  Rng rng(mix_seed(seed, 0x5F1Eull));
  rng.shuffle(shuffled);
  long long hits = 0;
  for (std::size_t shift = 0; shift < n; ++shift)
    for (std::size_t i = 0; i < n; ++i)
      hits += shuffled[(i + shift) % n] == (examples[i].label ? 1 : 0);
  return 100.0 * static_cast<double>(hits) /
         (static_cast<double>(n) * static_cast<double>(n));
}

// --- reports ----------------------------------------------------------------

struct EvalReport {
  struct Row {
    std::string method;
    TaskKind task = TaskKind::Joint;
    std::vector<double> values;  // one per repetition
    double mean = 0.0;
    double stdev = 0.0;
  };
  std::vector<Row> rows;
};

inline void finish_row(EvalReport::Row& row) {
  const double n = static_cast<double>(row.values.size());
  double sum = 0.0;
  for (double v : row.values) sum += v;
  row.mean = sum / n;
  double ss = 0.0;
  for (double v : row.values) ss += (v - row.mean) * (v - row.mean);
  row.stdev = row.values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median: empty");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// --- experiment runners -------------------------------------------------------

struct ExperimentConfig {
  int repetitions = 20;
  std::uint64_t base_seed = 0;
  TrainConfig train;
  int jobs = 0;
};

// One repetition of one method: split, balance, train when the method
// learns, evaluate all three tasks on balanced test sets. `train_store` and
// `eval_store` differ only for ablations.
inline std::array<double, 3> run_repetition(const Dataset& ds,
                                            const FeatureStore& train_store,
                                            const FeatureStore& eval_store,
                                            MethodId id, Variant train_variant,
                                            std::uint64_t seed,
                                            const ExperimentConfig& cfg) {
  const MethodTraits& tr = method_traits(id);
  const SplitIndices split = split_dataset(static_cast<int>(ds.scenes.size()), seed);

  ModelParams params;
  if (tr.trains) {
    std::vector<TrainExample> rows = make_training_rows(ds, train_store, split.train);
    rows = balance_training_rows(rows, seed);
    std::vector<TrainExample> val_rows = make_training_rows(ds, train_store, split.val);
    if (train_variant == Variant::Rewind) {
      rewind_targets(rows);
      rewind_targets(val_rows);
    }
    TrainConfig tc = cfg.train;
    tc.K = tr.K;
    tc.seed = seed;
    params = train(rows, val_rows, tc).params;
  }

  std::array<double, 3> acc{};
  const TaskKind tasks[3] = {TaskKind::Joint, TaskKind::Who, TaskKind::When};
  for (int i = 0; i < 3; ++i) {
    std::vector<EvalExample> ex =
        make_eval_examples(ds, eval_store, split.test, tasks[i]);
    ex = balance(ex, seed + static_cast<std::uint64_t>(i));
    if (id == MethodId::ChanceConstant) {
      const std::vector<double> half(ex.size(), 0.5);
      acc[i] = run_task_with_scores(half, ex);
    } else if (id == MethodId::ChanceShuffled) {
      acc[i] = chance_shuffled_accuracy(ex, seed + static_cast<std::uint64_t>(i));
    } else {
      acc[i] = run_task(params, ds, eval_store, ex, cfg.jobs);
    }
  }
  return acc;
}

inline EvalReport run_experiment(const Dataset& ds, MethodId id,
                                 const ExperimentConfig& cfg,
                                 const FeatureStore* shared_store = nullptr) {
  if (cfg.repetitions < 2)
    throw ValidationError("run_experiment: need at least 2 repetitions");
  std::optional<FeatureStore> own;
  if (shared_store == nullptr) {
    own.emplace(build_store(ds, id, Variant::Standard, cfg.jobs));
    shared_store = &*own;
  }

  EvalReport report;
  const TaskKind tasks[3] = {TaskKind::Joint, TaskKind::Who, TaskKind::When};
  std::array<EvalReport::Row, 3> rows;
  for (int i = 0; i < 3; ++i) {
    rows[i].method = method_traits(id).name;
    rows[i].task = tasks[i];
  }
  for (int r = 0; r < cfg.repetitions; ++r) {
    try {
      const auto acc =
          run_repetition(ds, *shared_store, *shared_store, id, Variant::Standard,
                         cfg.base_seed + static_cast<std::uint64_t>(r), cfg);
      for (int i = 0; i < 3; ++i) rows[i].values.push_back(acc[i]);
    } catch (const Error& e) {
      throw ValidationError("repetition " + std::to_string(r) + ": " + e.what());
    }
  }
  for (int i = 0; i < 3; ++i) {
    finish_row(rows[i]);
    report.rows.push_back(rows[i]);
  }
  return report;
}

// Ablation: train on transformed features, evaluate on Standard features.
inline EvalReport run_ablation(const Dataset& ds, Variant variant,
                               const ExperimentConfig& cfg,
                               const FeatureStore* standard_store = nullptr) {
  if (variant == Variant::Standard)
    throw ValidationError("run_ablation: Standard is the non-ablated configuration");
  if (cfg.repetitions < 2)
    throw ValidationError("run_ablation: need at least 2 repetitions");
  std::optional<FeatureStore> own_std;
  if (standard_store == nullptr) {
    own_std.emplace(build_store(ds, MethodId::MultipleImage, Variant::Standard, cfg.jobs));
    standard_store = &*own_std;
  }
  const FeatureStore variant_store =
      build_store(ds, MethodId::MultipleImage, variant, cfg.jobs);

  EvalReport report;
  const TaskKind tasks[3] = {TaskKind::Joint, TaskKind::Who, TaskKind::When};
  std::array<EvalReport::Row, 3> rows;
  for (int i = 0; i < 3; ++i) {
    rows[i].method = variant_name(variant);
    rows[i].task = tasks[i];
  }
  for (int r = 0; r < cfg.repetitions; ++r) {
    try {
      const auto acc =
          run_repetition(ds, variant_store, *standard_store, MethodId::MultipleImage,
                         variant, cfg.base_seed + static_cast<std::uint64_t>(r), cfg);
      for (int i = 0; i < 3; ++i) rows[i].values.push_back(acc[i]);
    } catch (const Error& e) {
      throw ValidationError("repetition " + std::to_string(r) + ": " + e.what());
    }
  }
  for (int i = 0; i < 3; ++i) {
    finish_row(rows[i]);
    report.rows.push_back(rows[i]);
  }
  return report;
}

// --- report files -------------------------------------------------------------

inline std::string results_csv(const EvalReport& report) {
  std::string out = "method,task,repetition,accuracy\n";
  for (const auto& row : report.rows)
    for (std::size_t r = 0; r < row.values.size(); ++r)
      out += row.method + "," + task_name(row.task) + "," + std::to_string(r) + "," +
             fmt2(row.values[r]) + "\n";
  return out;
}

inline std::string results_md(const EvalReport& report) {
  // Collect methods in first-appearance order; columns joint/who/when.
  std::vector<std::string> methods;
  for (const auto& row : report.rows)
    if (std::find(methods.begin(), methods.end(), row.method) == methods.end())
      methods.push_back(row.method);

  auto cell = [&](const std::string& method, TaskKind task) -> std::string {
    for (const auto& row : report.rows)
      if (row.method == method && row.task == task)
        return fmt2(row.mean) + " (" + fmt2(row.stdev) + ")";
    return "-";
  };

  std::string out;
  out += "# Results\n\n";
  out += "Accuracy percent, mean (std) over repetitions. All learned methods use\n";
  out += "the shared temporal convolutional logistic learner (K=1 for per-frame\n";
  out += "hand baselines and the single-image model, K=7 otherwise); threshold\n";
  out += "0.5 with ties counting positive. Chance rows are computed constructions,\n";
  out += "not trained models.\n\n";
  out += "| method | joint | who | when |\n";
  out += "|---|---|---|---|\n";
  for (const std::string& m : methods)
    out += "| " + m + " | " + cell(m, TaskKind::Joint) + " | " + cell(m, TaskKind::Who) +
           " | " + cell(m, TaskKind::When) + " |\n";
  return out;
}

inline void write_report(const EvalReport& report, const std::string& dir) {
  write_text_file(dir + "/results.csv", results_csv(report));
  write_text_file(dir + "/results.md", results_md(report));
}

inline EvalReport merge_reports(const std::vector<EvalReport>& parts) {
  EvalReport merged;
  for (const EvalReport& p : parts)
    merged.rows.insert(merged.rows.end(), p.rows.begin(), p.rows.end());
  return merged;
}

}  // namespace mistaken
