#pragma once

// Procedural story generation. Each template builds an 8-frame scene around
// one "victim" character and a tracked subject object: the subject changes
// state mid-story while the victim cannot see it (blocked, turned away, or
// out of the room), bystanders watch or ignore the stage, and ground-truth
// labels come from replaying the belief model. Construction is randomized
// but checked: a candidate that misses any postcondition is discarded and
// rebuilt from the next sub-seed.

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "mistaken/beliefs.hpp"
#include "mistaken/core.hpp"
#include "mistaken/json_codec.hpp"
#include "mistaken/parallel.hpp"
#include "mistaken/rng.hpp"
#include "mistaken/visibility.hpp"

namespace mistaken {

struct GenParams {
  double no_mistake_share = 0.25;
  double bystander_level = 0.5;   // scales how many onlookers join a scene
  double co_victim_prob = 0.35;   // second blocked character in OccludedChange
  double reobserve_prob = 0.30;   // victim later sees the changed state
  double hide_change_prob = 0.40; // change hides the subject instead of moving it
};

struct GenTargets {
  double mistaken_frame_fraction = 0.2365;
  double fraction_tolerance = 0.03;
  double mean_characters_per_frame = 1.71;
  double characters_tolerance = 0.3;
};

struct DatasetMeasure {
  double mistaken_frame_fraction = 0.0;
  double mean_characters_per_frame = 0.0;
};

struct DatasetManifest {
  int count = 0;
  std::uint64_t master_seed = 0;
  GenTargets targets;
  GenParams params;
  std::vector<std::uint64_t> scene_seeds;
  std::vector<TemplateKind> kinds;
  DatasetMeasure measured;
};

struct Dataset {
  std::vector<Scene> scenes;
  DatasetManifest manifest;
};

namespace gen_detail {

struct RetryBuild {};

constexpr int kMaxBuildAttempts = 32;

inline double jit(Rng& rng, double base, int amp) {
  return base + rng.next_int(-amp, amp);
}

inline int weighted_change_frame(Rng& rng) {
  static const std::vector<double> w = {0.2, 0.3, 0.3, 0.2};
  return 2 + rng.next_weighted(w);
}

inline ObjectKind pick_subject(Rng& rng) {
  static constexpr ObjectKind kSubjects[] = {ObjectKind::Chair, ObjectKind::Ball,
                                             ObjectKind::Pie, ObjectKind::Painting,
                                             ObjectKind::Plant, ObjectKind::Dog};
  return kSubjects[rng.next_int(0, 5)];
}

inline ObjectKind pick_occluder(Rng& rng) {
  static constexpr ObjectKind kOccluders[] = {ObjectKind::Couch, ObjectKind::Table,
                                              ObjectKind::Bookshelf, ObjectKind::Box};
  return kOccluders[rng.next_int(0, 3)];
}

// Keeps an object's bbox at least 5 units inside the canvas.
inline Vec2 clamped_center(ObjectKind kind, Vec2 c) {
  const auto& t = object_traits(kind);
  c.x = std::clamp(c.x, 5 + t.width / 2, kCanvasW - 5 - t.width / 2);
  c.y = std::clamp(c.y, 5 + t.height / 2, kCanvasH - 5 - t.height / 2);
  return c;
}

inline Rect inflate(const Rect& r, double by) {
  return Rect{r.x0 - by, r.y0 - by, r.x1 + by, r.y1 + by};
}

inline bool rects_overlap(const Rect& a, const Rect& b) {
  return a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1;
}

inline Expression pick_expression(Rng& rng, bool victim_role) {
  static const std::vector<double> kVictim = {0.18, 0.12, 0.24, 0.12, 0.34};
  static const std::vector<double> kOther = {0.34, 0.36, 0.10, 0.10, 0.10};
  return static_cast<Expression>(rng.next_weighted(victim_role ? kVictim : kOther));
}

// Ids 0..19 with linearly decaying weight, so low ids end up mistaken more
// often and character identity carries dataset-level signal.
inline int pick_victim_id(Rng& rng) {
  std::vector<double> w(kCharacterCount);
  for (int i = 0; i < kCharacterCount; ++i)
    w[i] = 2.0 - 1.5 * static_cast<double>(i) / (kCharacterCount - 1);
  return rng.next_weighted(w);
}

inline int pick_unused_id(Rng& rng, const std::vector<int>& used) {
  for (int tries = 0; tries < 64; ++tries) {
    const int id = rng.next_int(0, kCharacterCount - 1);
    if (std::find(used.begin(), used.end(), id) == used.end()) return id;
  }
  throw RetryBuild{};
}

// Per-character schedule, assembled into frames at the end.
struct CharPlan {
  int id = -1;
  Expression expr = Expression::Neutral;
  std::array<bool, kFrameCount> present{};
  std::array<Vec2, kFrameCount> head{};
  std::array<Facing, kFrameCount> facing{};

  void hold(int from, int to, Vec2 pos, Facing f) {
    for (int t = from; t <= to; ++t) {
      present[t] = true;
      head[t] = pos;
      facing[t] = f;
    }
  }
};

struct StageBuild {
  ObjectKind subject;
  Predicate predicate = Predicate::AtLocation;
  std::array<StateTag, kFrameCount> subj_tag{};
  std::array<Vec2, kFrameCount> subj_pos{};
  std::vector<SceneObject> fixed;  // stage occluder + decor, constant per scene
  std::vector<CharPlan> plans;
  int victim_plan = 0;
};

inline std::vector<SceneObject> objects_at(const StageBuild& s, int t) {
  std::vector<SceneObject> out;
  out.push_back(make_object(s.subject, s.subj_pos[t], s.subj_tag[t]));
  for (const SceneObject& o : s.fixed) out.push_back(o);
  return out;
}

inline bool probe_visible(const StageBuild& s, int t, Vec2 eye, Facing facing,
                          Vec2 target) {
  Frame f = empty_frame(t);
  f.objects = objects_at(s, t);
  CharacterInstance obs;
  obs.id = CharacterId{0};
  obs.head = eye;
  obs.facing = facing;
  obs.present = true;
  return is_visible(obs, target, f);
}

// Subject timeline: state A until the change frame, then B (move) or Hidden
// in place (hide). slot_a/slot_b index the scene's location table.
inline void set_timeline(StageBuild& s, int change_frame, bool hide, Vec2 a, Vec2 b,
                         int slot_a, int slot_b) {
  for (int t = 0; t < kFrameCount; ++t) {
    const bool changed = change_frame >= 0 && t >= change_frame;
    if (!changed) {
      s.subj_tag[t] = static_cast<StateTag>(slot_a);
      s.subj_pos[t] = a;
    } else if (hide) {
      s.subj_tag[t] = StateTag::Hidden;
      s.subj_pos[t] = a;
    } else {
      s.subj_tag[t] = static_cast<StateTag>(slot_b);
      s.subj_pos[t] = b;
    }
  }
}

inline void add_decor(StageBuild& s, Rng& rng, ObjectKind stage_occluder_or_subject,
                      const std::vector<Rect>& keep_clear) {
  std::vector<ObjectKind> pool;
  for (int k = 0; k < kObjectKindCount; ++k) {
    const ObjectKind kind = static_cast<ObjectKind>(k);
    if (kind == s.subject || kind == stage_occluder_or_subject) continue;
    pool.push_back(kind);
  }
  rng.shuffle(pool);
  const Vec2 anchors[4] = {{jit(rng, 642, 8), jit(rng, 362, 6)},
                           {jit(rng, 78, 8), jit(rng, 48, 6)},
                           {jit(rng, 360, 10), jit(rng, 368, 6)},
                           {jit(rng, 620, 8), jit(rng, 46, 6)}};
  const int want = rng.next_int(1, 2);
  int placed = 0;
  for (int i = 0; i < 4 && placed < want; ++i) {
    const ObjectKind kind = pool[static_cast<std::size_t>(i) % pool.size()];
    const Vec2 c = clamped_center(kind, anchors[i]);
    const Rect box = inflate(bbox_for(kind, c), 8);
    bool clear = true;
    for (const Rect& r : keep_clear) clear = clear && !rects_overlap(box, r);
    for (const SceneObject& o : s.fixed) clear = clear && !rects_overlap(box, o.bbox);
    if (!clear) continue;
    s.fixed.push_back(make_object(kind, c, StateTag::Fixed));
    ++placed;
  }
}

// Tries the fixed onlooker anchors until one sees the subject's position in
// every frame of [from, to]. Throws RetryBuild when no anchor works.
inline std::pair<Vec2, Facing> place_watcher(const StageBuild& s, Rng& rng, int from,
                                             int to) {
  struct Anchor {
    double x, y;
    Facing facing;
  };
  const Anchor anchors[4] = {{jit(rng, 618, 10), jit(rng, 82, 10), Facing::Left},
                             {jit(rng, 92, 8), jit(rng, 76, 10), Facing::Right},
                             {jit(rng, 628, 8), jit(rng, 332, 8), Facing::Left},
                             {jit(rng, 86, 8), jit(rng, 334, 8), Facing::Right}};
  const int first = rng.next_int(0, 3);
  for (int i = 0; i < 4; ++i) {
    const Anchor& a = anchors[(first + i) % 4];
    const Vec2 eye{a.x, a.y};
    bool ok = true;
    for (int t = from; t <= to && ok; ++t)
      ok = probe_visible(s, t, eye, a.facing, s.subj_pos[t]);
    if (ok) return {eye, a.facing};
  }
  throw RetryBuild{};
}

inline Vec2 place_blind(Rng& rng) {
  return Vec2{jit(rng, 58, 6), jit(rng, 206, 50)};
}

// Shared bystander machinery: watchers see the subject at every present
// frame (always right), blind onlookers face the empty side of the room
// (never an opinion). AbsenceChange forces one full-length bystander so no
// frame is ever empty.
inline void add_bystanders(StageBuild& s, Rng& rng, const GenParams& params,
                           std::vector<int>& used_ids, bool force_full_window) {
  // P(0 bystanders) shrinks as the level rises; P(1) stays at 0.45 and the
  // remainder goes to 2.
  const double p0 = std::max(0.0, 0.45 - 0.4 * params.bystander_level);
  const double u = rng.next_double();
  int n = u < p0 ? 0 : (u < p0 + 0.45 ? 1 : 2);
  if (force_full_window && n == 0) n = 1;

  for (int i = 0; i < n; ++i) {
    CharPlan plan;
    plan.id = pick_unused_id(rng, used_ids);
    used_ids.push_back(plan.id);
    plan.expr = pick_expression(rng, false);
    int from = 0, to = kFrameCount - 1;
    if (!(force_full_window && i == 0)) {
      const int len = rng.next_int(4, kFrameCount);
      from = rng.next_int(0, kFrameCount - len);
      to = from + len - 1;
    }
    if (rng.next_bool(0.55)) {
      const auto [eye, facing] = place_watcher(s, rng, from, to);
      plan.hold(from, to, eye, facing);
    } else {
      plan.hold(from, to, place_blind(rng), Facing::Left);
    }
    s.plans.push_back(plan);
  }
}

inline Scene assemble(const StageBuild& s, Rng& rng, std::uint64_t seed,
                      TemplateKind kind) {
  Scene scene;
  scene.seed = seed;
  scene.template_kind = kind;
  for (int t = 0; t < kFrameCount; ++t) {
    Frame f = empty_frame(t);
    f.objects = objects_at(s, t);
    for (const CharPlan& p : s.plans) {
      if (!p.present[t]) continue;
      CharacterInstance& ch = f.characters[p.id];
      ch.present = true;
      ch.head = p.head[t];
      ch.facing = p.facing[t];
      ch.expression = p.expr;
    }
    if (f.present_count() < 1 || f.present_count() > kMaxPresentPerFrame)
      throw RetryBuild{};
    scene.frames.push_back(std::move(f));
  }
  scene.proposition.subject = s.subject;
  scene.proposition.predicate = s.predicate;
  scene.proposition.truth = derive_truth(scene.frames, s.subject, s.predicate);
  if (!validate_scene(scene).empty()) throw RetryBuild{};
  scene.labels = derive_labels(scene);

  // Random horizontal mirror; labels are invariant under it.
  if (rng.next_bool(0.5)) {
    for (Frame& f : scene.frames) {
      for (CharacterInstance& ch : f.characters) {
        if (!ch.present) continue;
        ch.head.x = kCanvasW - ch.head.x;
        ch.facing = opposite(ch.facing);
      }
      for (SceneObject& o : f.objects)
        o = make_object(o.id, Vec2{kCanvasW - o.position.x, o.position.y}, o.state_tag);
    }
    if (derive_labels(scene) != scene.labels) throw RetryBuild{};
  }
  if (!validate_scene(scene).empty()) throw RetryBuild{};
  return scene;
}

// Expected label rows: victims mistaken exactly on [first, last_end), all
// other characters clean everywhere.
struct ExpectedRow {
  int id;
  int first;
  int end;  // one past the last mistaken frame
};

inline void check_labels(const Scene& scene, const std::vector<ExpectedRow>& rows) {
  std::array<bool, kCharacterCount> is_victim{};
  for (const ExpectedRow& r : rows) is_victim[r.id] = true;
  for (int c = 0; c < kCharacterCount; ++c) {
    if (is_victim[c]) continue;
    if (scene.labels.any[c]) throw RetryBuild{};
  }
  for (const ExpectedRow& r : rows) {
    for (int t = 0; t < kFrameCount; ++t) {
      const bool want = t >= r.first && t < r.end &&
                        scene.frames[t].characters[r.id].present;
      if (scene.labels.matrix[r.id][t] != want) throw RetryBuild{};
    }
    bool hit = false;
    for (int t = r.first; t < r.end; ++t) hit = hit || scene.labels.matrix[r.id][t];
    if (!hit) throw RetryBuild{};
  }
}

inline Scene build_occluded(Rng& rng, const GenParams& params, std::uint64_t seed) {
  StageBuild s;
  s.subject = pick_subject(rng);
  s.predicate = Predicate::AtLocation;  // subject moves behind the occluder
  const int c = weighted_change_frame(rng);

  const Vec2 v{jit(rng, 140, 12), jit(rng, 210, 12)};
  const Vec2 a{jit(rng, 316, 10), jit(rng, 198, 10)};
  const Vec2 b{jit(rng, 570, 10), jit(rng, 208, 10)};
  const ObjectKind wall_kind = pick_occluder(rng);
  const Vec2 wall_c = clamped_center(wall_kind, Vec2{jit(rng, 432, 8), jit(rng, 206, 8)});
  s.fixed.push_back(make_object(wall_kind, wall_c, StateTag::Fixed));

  const int slot_a = rng.next_int(0, 5);
  const int slot_b = (slot_a + 1 + rng.next_int(0, 4)) % 6;
  set_timeline(s, c, false, a, b, slot_a, slot_b);

  std::vector<Rect> keep_clear = {inflate(bbox_for(s.subject, a), 10),
                                  inflate(bbox_for(s.subject, b), 10),
                                  inflate(s.fixed[0].bbox, 10)};
  add_decor(s, rng, wall_kind, keep_clear);

  // Victim watches slot A, loses sight once the subject moves behind the wall.
  for (int t = 0; t < c; ++t)
    if (!probe_visible(s, t, v, Facing::Right, s.subj_pos[t])) throw RetryBuild{};
  for (int t = c; t < kFrameCount; ++t) {
    if (s.subj_pos[t].x <= v.x) throw RetryBuild{};  // must be a blocked view, not a turned back
    if (probe_visible(s, t, v, Facing::Right, s.subj_pos[t])) throw RetryBuild{};
  }

  CharPlan victim;
  victim.id = pick_victim_id(rng);
  victim.expr = pick_expression(rng, true);
  victim.hold(0, kFrameCount - 1, v, Facing::Right);

  int reveal_end = kFrameCount;
  if (rng.next_bool(params.reobserve_prob) && c + 1 <= kFrameCount - 1) {
    const int r2 = rng.next_int(c + 1, kFrameCount - 1);
    const Vec2 spots[3] = {{jit(rng, b.x - 52, 6), jit(rng, b.y - 54, 6)},
                           {jit(rng, b.x - 52, 6), jit(rng, b.y + 54, 6)},
                           {jit(rng, b.x + 56, 6), jit(rng, b.y, 8)}};
    bool placed = false;
    for (const Vec2& raw : spots) {
      const Vec2 spot{std::clamp(raw.x, 10.0, kCanvasW - 10), std::clamp(raw.y, 10.0, kCanvasH - 10)};
      const Facing facing = spot.x < b.x ? Facing::Right : Facing::Left;
      bool ok = true;
      for (int t = r2; t < kFrameCount && ok; ++t)
        ok = probe_visible(s, t, spot, facing, s.subj_pos[t]);
      if (ok) {
        victim.hold(r2, kFrameCount - 1, spot, facing);
        reveal_end = r2;
        placed = true;
        break;
      }
    }
    if (!placed) throw RetryBuild{};
  }
  s.plans.push_back(victim);
  std::vector<int> used = {victim.id};
  std::vector<ExpectedRow> rows = {{victim.id, c, reveal_end}};

  if (rng.next_bool(params.co_victim_prob)) {
    CharPlan co;
    co.id = pick_unused_id(rng, used);
    used.push_back(co.id);
    co.expr = pick_expression(rng, true);
    const Vec2 v2{jit(rng, v.x + 34, 6), jit(rng, v.y, 28)};
    for (int t = 0; t < c; ++t)
      if (!probe_visible(s, t, v2, Facing::Right, s.subj_pos[t])) throw RetryBuild{};
    for (int t = c; t < kFrameCount; ++t)
      if (probe_visible(s, t, v2, Facing::Right, s.subj_pos[t])) throw RetryBuild{};
    co.hold(0, kFrameCount - 1, v2, Facing::Right);
    s.plans.push_back(co);
    rows.push_back({co.id, c, kFrameCount});
  }

  add_bystanders(s, rng, params, used, false);
  Scene scene = assemble(s, rng, seed, TemplateKind::OccludedChange);
  check_labels(scene, rows);
  return scene;
}

inline Scene build_out_of_fov(Rng& rng, const GenParams& params, std::uint64_t seed) {
  StageBuild s;
  s.subject = pick_subject(rng);
  const bool hide = rng.next_bool(params.hide_change_prob);
  s.predicate = hide ? Predicate::ExistsVisible : Predicate::AtLocation;
  const int c = weighted_change_frame(rng);

  const Vec2 v{jit(rng, 342, 12), jit(rng, 212, 12)};
  const Vec2 a{jit(rng, 548, 10), jit(rng, 198, 10)};
  const Vec2 b{jit(rng, 590, 10), jit(rng, 300, 10)};
  const int slot_a = rng.next_int(0, 5);
  const int slot_b = (slot_a + 1 + rng.next_int(0, 4)) % 6;
  set_timeline(s, c, hide, a, b, slot_a, slot_b);

  std::vector<Rect> keep_clear = {inflate(bbox_for(s.subject, a), 10),
                                  inflate(bbox_for(s.subject, b), 10)};
  add_decor(s, rng, s.subject, keep_clear);

  for (int t = 0; t < c; ++t)
    if (!probe_visible(s, t, v, Facing::Right, s.subj_pos[t])) throw RetryBuild{};
  for (int t = c; t < kFrameCount; ++t)
    if (s.subj_pos[t].x <= v.x) throw RetryBuild{};  // stays behind the turned victim

  CharPlan victim;
  victim.id = pick_victim_id(rng);
  victim.expr = pick_expression(rng, true);
  victim.hold(0, c - 1, v, Facing::Right);
  victim.hold(c, kFrameCount - 1, v, Facing::Left);

  int reveal_end = kFrameCount;
  if (rng.next_bool(params.reobserve_prob) && c + 1 <= kFrameCount - 1) {
    const int r2 = rng.next_int(c + 1, kFrameCount - 1);
    bool ok = true;
    for (int t = r2; t < kFrameCount && ok; ++t)
      ok = probe_visible(s, t, v, Facing::Right, s.subj_pos[t]);
    if (!ok) throw RetryBuild{};
    victim.hold(r2, kFrameCount - 1, v, Facing::Right);
    reveal_end = r2;
  }
  s.plans.push_back(victim);
  std::vector<int> used = {victim.id};

  add_bystanders(s, rng, params, used, false);
  Scene scene = assemble(s, rng, seed, TemplateKind::OutOfFovChange);
  check_labels(scene, {{victim.id, c, reveal_end}});
  return scene;
}

inline Scene build_absence(Rng& rng, const GenParams& params, std::uint64_t seed) {
  StageBuild s;
  s.subject = pick_subject(rng);
  const bool hide = rng.next_bool(params.hide_change_prob);
  s.predicate = hide ? Predicate::ExistsVisible : Predicate::AtLocation;
  const int c = weighted_change_frame(rng);
  const int back = std::min(kFrameCount - 1, c + 1 + (rng.next_bool(0.4) ? 1 : 0));

  const Vec2 v{jit(rng, 150, 12), jit(rng, 206, 12)};
  const Vec2 vr{jit(rng, 208, 10), jit(rng, 240, 10)};
  const Vec2 a{jit(rng, 358, 10), jit(rng, 196, 10)};
  const Vec2 b{jit(rng, 560, 10), jit(rng, 212, 10)};
  const int slot_a = rng.next_int(0, 5);
  const int slot_b = (slot_a + 1 + rng.next_int(0, 4)) % 6;
  set_timeline(s, c, hide, a, b, slot_a, slot_b);

  std::vector<Rect> keep_clear = {inflate(bbox_for(s.subject, a), 10),
                                  inflate(bbox_for(s.subject, b), 10)};
  add_decor(s, rng, s.subject, keep_clear);

  for (int t = 0; t < c; ++t)
    if (!probe_visible(s, t, v, Facing::Right, s.subj_pos[t])) throw RetryBuild{};
  for (int t = back; t < kFrameCount; ++t)
    if (s.subj_pos[t].x <= vr.x) throw RetryBuild{};  // returns facing the empty side

  CharPlan victim;
  victim.id = pick_victim_id(rng);
  victim.expr = pick_expression(rng, true);
  victim.hold(0, c - 1, v, Facing::Right);
  victim.hold(back, kFrameCount - 1, vr, Facing::Left);

  int reveal_end = kFrameCount;
  if (rng.next_bool(params.reobserve_prob) && back + 1 <= kFrameCount - 1) {
    const int r2 = rng.next_int(back + 1, kFrameCount - 1);
    bool ok = true;
    for (int t = r2; t < kFrameCount && ok; ++t)
      ok = probe_visible(s, t, vr, Facing::Right, s.subj_pos[t]);
    if (!ok) throw RetryBuild{};
    victim.hold(r2, kFrameCount - 1, vr, Facing::Right);
    reveal_end = r2;
  }
  s.plans.push_back(victim);
  std::vector<int> used = {victim.id};

  add_bystanders(s, rng, params, used, true);
  Scene scene = assemble(s, rng, seed, TemplateKind::AbsenceChange);
  check_labels(scene, {{victim.id, back, reveal_end}});
  return scene;
}

inline Scene build_no_mistake(Rng& rng, const GenParams& params, std::uint64_t seed) {
  StageBuild s;
  s.subject = pick_subject(rng);
  const bool observed_change = rng.next_bool(0.5);

  std::vector<int> used;
  if (observed_change) {
    // Everyone who ever holds an opinion watches the change happen.
    s.predicate = Predicate::AtLocation;
    const int c = weighted_change_frame(rng);
    const Vec2 v{jit(rng, 200, 12), jit(rng, 210, 12)};
    const Vec2 a{jit(rng, 395, 10), jit(rng, 200, 10)};
    const Vec2 b{jit(rng, 560, 10), jit(rng, 230, 10)};
    const int slot_a = rng.next_int(0, 5);
    const int slot_b = (slot_a + 1 + rng.next_int(0, 4)) % 6;
    set_timeline(s, c, false, a, b, slot_a, slot_b);
    add_decor(s, rng, s.subject,
              {inflate(bbox_for(s.subject, a), 10), inflate(bbox_for(s.subject, b), 10)});
    for (int t = 0; t < kFrameCount; ++t)
      if (!probe_visible(s, t, v, Facing::Right, s.subj_pos[t])) throw RetryBuild{};

    CharPlan watcher;
    watcher.id = pick_victim_id(rng);
    watcher.expr = pick_expression(rng, false);
    watcher.hold(0, kFrameCount - 1, v, Facing::Right);
    s.plans.push_back(watcher);
    used.push_back(watcher.id);
  } else {
    // Nothing changes; an occluded-style stage is fine since a stale belief
    // about a static subject is still a correct one.
    s.predicate = rng.next_bool(0.5) ? Predicate::AtLocation : Predicate::ExistsVisible;
    const Vec2 v{jit(rng, 140, 12), jit(rng, 210, 12)};
    const Vec2 a{jit(rng, 316, 10), jit(rng, 198, 10)};
    const int slot_a = rng.next_int(0, 5);
    set_timeline(s, -1, false, a, a, slot_a, slot_a);
    if (rng.next_bool(0.5)) {
      const ObjectKind wall_kind = pick_occluder(rng);
      const Vec2 wall_c =
          clamped_center(wall_kind, Vec2{jit(rng, 432, 8), jit(rng, 206, 8)});
      s.fixed.push_back(make_object(wall_kind, wall_c, StateTag::Fixed));
    }
    add_decor(s, rng,
              s.fixed.empty() ? s.subject : s.fixed[0].id,
              {inflate(bbox_for(s.subject, a), 10)});
    for (int t = 0; t < kFrameCount; ++t)
      if (!probe_visible(s, t, v, Facing::Right, s.subj_pos[t])) throw RetryBuild{};

    CharPlan watcher;
    watcher.id = pick_victim_id(rng);
    watcher.expr = pick_expression(rng, false);
    watcher.hold(0, kFrameCount - 1, v, Facing::Right);
    s.plans.push_back(watcher);
    used.push_back(watcher.id);
  }

  add_bystanders(s, rng, params, used, false);
  Scene scene = assemble(s, rng, seed, TemplateKind::NoMistake);
  check_labels(scene, {});
  return scene;
}

inline Scene build_template(TemplateKind kind, Rng& rng, const GenParams& params,
                            std::uint64_t seed) {
  switch (kind) {
    case TemplateKind::OccludedChange: return build_occluded(rng, params, seed);
    case TemplateKind::OutOfFovChange: return build_out_of_fov(rng, params, seed);
    case TemplateKind::AbsenceChange: return build_absence(rng, params, seed);
    case TemplateKind::NoMistake: return build_no_mistake(rng, params, seed);
  }
  throw Error("build_template: bad kind");
}

}  // namespace gen_detail

inline Scene generate_scene(TemplateKind kind, std::uint64_t seed,
                            const GenParams& params = GenParams{}) {
  for (int attempt = 0; attempt < gen_detail::kMaxBuildAttempts; ++attempt) {
    Rng rng(mix_seed(seed, 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(attempt)));
    try {
      return gen_detail::build_template(kind, rng, params, seed);
    } catch (const gen_detail::RetryBuild&) {
      continue;
    }
  }
  throw Error("generate_scene: no valid construction for template " +
              std::string(template_kind_name(kind)) + " seed " + std::to_string(seed));
}

inline DatasetMeasure measure_dataset(const std::vector<Scene>& scenes) {
  long long mistaken = 0, present = 0;
  for (const Scene& s : scenes) {
    for (int t = 0; t < kFrameCount; ++t) {
      for (int c = 0; c < kCharacterCount; ++c) {
        if (!s.frames[t].characters[c].present) continue;
        ++present;
        mistaken += s.labels.matrix[c][t] ? 1 : 0;
      }
    }
  }
  DatasetMeasure m;
  m.mistaken_frame_fraction =
      present > 0 ? static_cast<double>(mistaken) / static_cast<double>(present) : 0.0;
  m.mean_characters_per_frame =
      static_cast<double>(present) /
      (static_cast<double>(scenes.size()) * kFrameCount);
  return m;
}

namespace gen_detail {

inline TemplateKind draw_kind(Rng& rng, const std::array<double, kTemplateKindCount>& mix) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (int k = 0; k < kTemplateKindCount; ++k) {
    acc += mix[k];
    if (u < acc) return static_cast<TemplateKind>(k);
  }
  return TemplateKind::NoMistake;
}

inline std::array<double, kTemplateKindCount> mix_from_share(double no_mistake_share) {
  const double rest = 1.0 - no_mistake_share;
  return {0.36 * rest, 0.36 * rest, 0.28 * rest, no_mistake_share};
}

}  // namespace gen_detail

// Generates `count` scenes from per-scene seeds derived from the master seed.
// The template mix and bystander density start at the defaults and get
// nudged (a bounded number of times) until the dataset-level mistaken-cell
// fraction and crowding hit their targets; a forced mix freezes the template
// shares, so only crowding can move. Throws when the targets stay out of
// reach.
inline Dataset generate_dataset(
    int count, std::uint64_t master_seed, const GenTargets& targets = GenTargets{},
    std::optional<std::array<double, kTemplateKindCount>> forced_mix = std::nullopt,
    int jobs = 0) {
  if (count < 1) throw ValidationError("generate_dataset: count must be >= 1");

  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    seeds[static_cast<std::size_t>(i)] =
        mix_seed(master_seed, 0x6d174cull + static_cast<std::uint64_t>(i));

  GenParams params;
  constexpr int kMaxAdjust = 16;
  Dataset best;
  for (int iter = 0; iter < kMaxAdjust; ++iter) {
    const auto mix = forced_mix.has_value()
                         ? *forced_mix
                         : gen_detail::mix_from_share(params.no_mistake_share);
    std::vector<TemplateKind> kinds(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      Rng krng(mix_seed(seeds[static_cast<std::size_t>(i)], 0xa11ull));
      kinds[static_cast<std::size_t>(i)] = gen_detail::draw_kind(krng, mix);
    }
    std::vector<Scene> scenes(static_cast<std::size_t>(count));
    parallel_for(count, jobs, [&](int i) {
      scenes[static_cast<std::size_t>(i)] = generate_scene(
          kinds[static_cast<std::size_t>(i)], seeds[static_cast<std::size_t>(i)], params);
    });
    const DatasetMeasure m = measure_dataset(scenes);

    best.scenes = std::move(scenes);
    best.manifest.count = count;
    best.manifest.master_seed = master_seed;
    best.manifest.targets = targets;
    best.manifest.params = params;
    best.manifest.scene_seeds = seeds;
    best.manifest.kinds = std::move(kinds);
    best.manifest.measured = m;

    const bool fraction_ok = std::abs(m.mistaken_frame_fraction -
                                      targets.mistaken_frame_fraction) <=
                             targets.fraction_tolerance;
    const bool chars_ok = std::abs(m.mean_characters_per_frame -
                                   targets.mean_characters_per_frame) <=
                          targets.characters_tolerance;
    if (fraction_ok && chars_ok) return best;

    // Crowding responds linearly to the bystander knob; the mistaken
    // fraction scales with the non-NoMistake mass.
    params.bystander_level =
        std::clamp(params.bystander_level +
                       (targets.mean_characters_per_frame - m.mean_characters_per_frame) / 0.6,
                   0.0, 1.0);
    if (!forced_mix.has_value()) {
      if (m.mistaken_frame_fraction <= 0.0) {
        params.no_mistake_share = std::max(0.02, params.no_mistake_share * 0.5);
      } else {
        const double scale =
            targets.mistaken_frame_fraction / m.mistaken_frame_fraction;
        const double new_mistake_mass =
            std::clamp((1.0 - params.no_mistake_share) * scale, 0.1, 0.98);
        params.no_mistake_share = 1.0 - new_mistake_mass;
      }
    }
  }
  char msg[256];
  std::snprintf(msg, sizeof(msg),
                "generate_dataset: targets infeasible after %d mix adjustments "
                "(mistaken fraction %.4f vs %.4f±%.4f, characters per frame %.3f vs "
                "%.3f±%.3f)",
                kMaxAdjust, best.manifest.measured.mistaken_frame_fraction,
                targets.mistaken_frame_fraction, targets.fraction_tolerance,
                best.manifest.measured.mean_characters_per_frame,
                targets.mean_characters_per_frame, targets.characters_tolerance);
  throw ValidationError(msg);
}

}  // namespace mistaken
