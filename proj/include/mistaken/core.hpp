#pragma once

// Domain types for multi-frame abstract scenes: a fixed 700x400 canvas, 20
// character identities, per-frame object states, a tracked proposition, and
// the per-character mistaken-label matrix. Scene validation and frame
// interpolation live here too.

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mistaken {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Bad inputs, schema mismatches, violated preconditions. CLI exit code 1.
struct ValidationError : Error {
  using Error::Error;
};
// Filesystem and stream failures. CLI exit code 2.
struct IoError : Error {
  using Error::Error;
};
// Malformed or unsupported serialized documents.
struct CodecError : Error {
  using Error::Error;
};

inline constexpr double kCanvasW = 700.0;
inline constexpr double kCanvasH = 400.0;
inline constexpr int kFrameCount = 8;
inline constexpr int kCharacterCount = 20;
inline constexpr int kMaxPresentPerFrame = 4;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

// Axis-aligned, closed rectangle in scene units.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  bool contains(const Vec2& p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct CharacterId {
  int value = -1;
  friend bool operator==(const CharacterId&, const CharacterId&) = default;
  friend auto operator<=>(const CharacterId&, const CharacterId&) = default;
};

enum class Facing : std::uint8_t { Left, Right };

inline Facing opposite(Facing f) {
  return f == Facing::Left ? Facing::Right : Facing::Left;
}

enum class Expression : std::uint8_t { Neutral, Happy, Sad, Angry, Surprised };
inline constexpr int kExpressionCount = 5;

// When present is false, head/facing/expression carry no meaning and every
// consumer must ignore them.
struct CharacterInstance {
  CharacterId id;
  Vec2 head;
  Facing facing = Facing::Left;
  Expression expression = Expression::Neutral;
  bool present = false;
  friend bool operator==(const CharacterInstance&, const CharacterInstance&) = default;
};

enum class ObjectKind : std::uint8_t {
  Couch,
  Table,
  Bookshelf,
  Box,
  Chair,
  Ball,
  Pie,
  Painting,
  Plant,
  Dog,
};
inline constexpr int kObjectKindCount = 10;

// Where an object currently is. Hidden means removed from view (taken away,
// put inside something); the object keeps its last position so observers can
// notice the empty spot. Fixed marks static props that never move.
enum class StateTag : std::uint8_t {
  Slot0,
  Slot1,
  Slot2,
  Slot3,
  Slot4,
  Slot5,
  Hidden,
  Fixed,
};

struct ObjectTraits {
  const char* name;
  double width;
  double height;
  bool occluder;
};

inline const ObjectTraits& object_traits(ObjectKind k) {
  static constexpr ObjectTraits kTable[kObjectKindCount] = {
      {"couch", 120, 90, true},   {"table", 100, 70, true},
      {"bookshelf", 80, 120, true}, {"box", 70, 64, true},
      {"chair", 44, 60, false},   {"ball", 24, 24, false},
      {"pie", 30, 20, false},     {"painting", 50, 40, false},
      {"plant", 34, 50, false},   {"dog", 50, 34, false},
  };
  return kTable[static_cast<int>(k)];
}

struct SceneObject {
  ObjectKind id = ObjectKind::Ball;
  Vec2 position;  // bbox center
  Rect bbox;
  bool is_occluder = false;
  StateTag state_tag = StateTag::Fixed;
  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

inline Rect bbox_for(ObjectKind kind, const Vec2& center) {
  const auto& t = object_traits(kind);
  return Rect{center.x - t.width / 2, center.y - t.height / 2,
              center.x + t.width / 2, center.y + t.height / 2};
}

inline SceneObject make_object(ObjectKind kind, const Vec2& center, StateTag tag) {
  return SceneObject{kind, center, bbox_for(kind, center),
                     object_traits(kind).occluder, tag};
}

struct Frame {
  int index = 0;
  // Exactly kCharacterCount slots, slot i holding identity i; most absent.
  std::vector<CharacterInstance> characters;
  std::vector<SceneObject> objects;

  const CharacterInstance* find_character(CharacterId c) const {
    for (const auto& ch : characters)
      if (ch.id == c) return &ch;
    return nullptr;
  }
  CharacterInstance* find_character(CharacterId c) {
    for (auto& ch : characters)
      if (ch.id == c) return &ch;
    return nullptr;
  }
  const SceneObject* find_object(ObjectKind k) const {
    for (const auto& o : objects)
      if (o.id == k) return &o;
    return nullptr;
  }
  SceneObject* find_object(ObjectKind k) {
    for (auto& o : objects)
      if (o.id == k) return &o;
    return nullptr;
  }
  int present_count() const {
    int n = 0;
    for (const auto& ch : characters) n += ch.present ? 1 : 0;
    return n;
  }
  friend bool operator==(const Frame&, const Frame&) = default;
};

inline Frame empty_frame(int index) {
  Frame f;
  f.index = index;
  f.characters.resize(kCharacterCount);
  for (int i = 0; i < kCharacterCount; ++i) f.characters[i].id = CharacterId{i};
  return f;
}

enum class Predicate : std::uint8_t {
  // Is the subject at the location it held in frame 0?
  AtLocation,
  // Is the subject out in the open (not hidden away)?
  ExistsVisible,
};

struct Proposition {
  ObjectKind subject = ObjectKind::Ball;
  Predicate predicate = Predicate::AtLocation;
  std::array<bool, kFrameCount> truth{};
  friend bool operator==(const Proposition&, const Proposition&) = default;
};

// Evaluates the proposition against a concrete object state. The reference
// state is the subject's state in frame 0, so truth is derivable from the
// frames alone.
inline bool evaluate_predicate(Predicate p, StateTag state, StateTag frame0_state) {
  switch (p) {
    case Predicate::AtLocation:
      return state == frame0_state;
    case Predicate::ExistsVisible:
      return state != StateTag::Hidden;
  }
  return false;
}

struct MistakenLabels {
  // matrix[c][t]: character c holds a wrong answer at frame t.
  std::array<std::array<bool, kFrameCount>, kCharacterCount> matrix{};
  // any[c] = OR over matrix[c].
  std::array<bool, kCharacterCount> any{};

  void fill_any() {
    for (int c = 0; c < kCharacterCount; ++c) {
      bool v = false;
      for (int t = 0; t < kFrameCount; ++t) v = v || matrix[c][t];
      any[c] = v;
    }
  }
  friend bool operator==(const MistakenLabels&, const MistakenLabels&) = default;
};

enum class TemplateKind : std::uint8_t {
  OccludedChange,
  OutOfFovChange,
  AbsenceChange,
  NoMistake,
};
inline constexpr int kTemplateKindCount = 4;

struct Scene {
  std::vector<Frame> frames;  // exactly kFrameCount when valid
  Proposition proposition;
  MistakenLabels labels;
  std::uint64_t seed = 0;
  TemplateKind template_kind = TemplateKind::NoMistake;
  friend bool operator==(const Scene&, const Scene&) = default;
};

namespace detail {
inline std::string fmt_point(const Vec2& p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}
}  // namespace detail

// Derives the proposition truth row from the frames. Requires the subject to
// be listed in frame 0 (validated separately); frames missing the subject
// contribute false.
inline std::array<bool, kFrameCount> derive_truth(const std::vector<Frame>& frames,
                                                  ObjectKind subject,
                                                  Predicate predicate) {
  std::array<bool, kFrameCount> truth{};
  if (frames.empty()) return truth;
  const SceneObject* first = frames[0].find_object(subject);
  if (first == nullptr) return truth;
  const StateTag reference = first->state_tag;
  for (int t = 0; t < static_cast<int>(frames.size()) && t < kFrameCount; ++t) {
    const SceneObject* obj = frames[t].find_object(subject);
    truth[t] = obj != nullptr && evaluate_predicate(predicate, obj->state_tag, reference);
  }
  return truth;
}

// Returns one description per violated invariant; empty means valid.
// Violations are data, not failures.
inline std::vector<std::string> validate_scene(const Scene& scene) {
  std::vector<std::string> out;
  const int n = static_cast<int>(scene.frames.size());
  if (n != kFrameCount)
    out.push_back("frame count " + std::to_string(n) + " != " +
                  std::to_string(kFrameCount));

  for (int t = 0; t < n; ++t) {
    const Frame& f = scene.frames[t];
    const std::string at = "frame " + std::to_string(t);
    if (f.index != t)
      out.push_back(at + " carries index " + std::to_string(f.index));
    if (static_cast<int>(f.characters.size()) != kCharacterCount) {
      out.push_back(at + " has " + std::to_string(f.characters.size()) +
                    " character slots, expected " + std::to_string(kCharacterCount));
    } else {
      for (int i = 0; i < kCharacterCount; ++i)
        if (f.characters[i].id.value != i)
          out.push_back(at + " slot " + std::to_string(i) + " holds id " +
                        std::to_string(f.characters[i].id.value));
    }
    if (f.present_count() > kMaxPresentPerFrame)
      out.push_back(at + " has " + std::to_string(f.present_count()) +
                    " present characters (max " +
                    std::to_string(kMaxPresentPerFrame) + ")");
    for (const auto& ch : f.characters) {
      if (!ch.present) continue;
      if (ch.head.x < 0 || ch.head.x > kCanvasW || ch.head.y < 0 ||
          ch.head.y > kCanvasH)
        out.push_back(at + " character " + std::to_string(ch.id.value) +
                      " head out of canvas " + detail::fmt_point(ch.head));
    }
    for (std::size_t i = 0; i < f.objects.size(); ++i) {
      const SceneObject& o = f.objects[i];
      const std::string name = object_traits(o.id).name;
      if (o.bbox.x0 > o.bbox.x1 || o.bbox.y0 > o.bbox.y1)
        out.push_back(at + " object " + name + " has an inverted bbox");
      if (o.bbox != bbox_for(o.id, o.position))
        out.push_back(at + " object " + name + " bbox does not match its kind footprint");
      if (o.is_occluder != object_traits(o.id).occluder)
        out.push_back(at + " object " + name + " has a wrong occluder flag");
      if (o.bbox.x0 < 0 || o.bbox.x1 > kCanvasW || o.bbox.y0 < 0 ||
          o.bbox.y1 > kCanvasH)
        out.push_back(at + " object " + name + " bbox out of canvas");
      for (std::size_t j = i + 1; j < f.objects.size(); ++j)
        if (f.objects[j].id == o.id)
          out.push_back(at + " lists object kind " + name + " twice");
    }
    if (f.find_object(scene.proposition.subject) == nullptr)
      out.push_back(at + " is missing the proposition subject " +
                    std::string(object_traits(scene.proposition.subject).name));
  }

  // Labels only where present.
  for (int c = 0; c < kCharacterCount; ++c) {
    for (int t = 0; t < kFrameCount && t < n; ++t) {
      if (!scene.labels.matrix[c][t]) continue;
      const Frame& f = scene.frames[t];
      const CharacterInstance* ch = f.find_character(CharacterId{c});
      if (ch == nullptr || !ch->present)
        out.push_back("label true for absent character " + std::to_string(c) +
                      " at frame " + std::to_string(t));
    }
    bool row_or = false;
    for (int t = 0; t < kFrameCount; ++t) row_or = row_or || scene.labels.matrix[c][t];
    if (row_or != scene.labels.any[c])
      out.push_back("any-frame aggregate mismatch for character " + std::to_string(c));
  }

  if (n == kFrameCount) {
    const auto truth = derive_truth(scene.frames, scene.proposition.subject,
                                    scene.proposition.predicate);
    for (int t = 0; t < kFrameCount; ++t)
      if (truth[t] != scene.proposition.truth[t])
        out.push_back("proposition truth not derivable from frames at frame " +
                      std::to_string(t));
  }
  return out;
}

inline void require_valid(const Scene& scene, const char* where) {
  const auto violations = validate_scene(scene);
  if (!violations.empty())
    throw ValidationError(std::string(where) + ": invalid scene: " + violations.front());
}

// Linear interpolation between frames t and t+1 of a valid scene. Positions
// of entities present on both sides are blended; discrete fields snap to the
// nearer endpoint (threshold 0.5). Interpolated frames are viewing aids only
// and never feed training.
inline Frame interpolate_frame(const Scene& scene, int t, double alpha) {
  if (t < 0 || t > kFrameCount - 2)
    throw ValidationError("interpolate_frame: t must be in [0, 6], got " +
                          std::to_string(t));
  if (alpha < 0.0 || alpha > 1.0)
    throw ValidationError("interpolate_frame: alpha must be in [0, 1]");
  require_valid(scene, "interpolate_frame");

  const Frame& a = scene.frames[t];
  const Frame& b = scene.frames[t + 1];
  const bool take_b = alpha >= 0.5;
  const Frame& discrete = take_b ? b : a;

  auto lerp = [alpha](double u, double v) { return (1.0 - alpha) * u + alpha * v; };

  Frame out;
  out.index = discrete.index;
  out.characters.resize(kCharacterCount);
  for (int i = 0; i < kCharacterCount; ++i) {
    const CharacterInstance& ca = a.characters[i];
    const CharacterInstance& cb = b.characters[i];
    CharacterInstance c = discrete.characters[i];
    if (ca.present && cb.present)
      c.head = Vec2{lerp(ca.head.x, cb.head.x), lerp(ca.head.y, cb.head.y)};
    out.characters[i] = c;
  }
  for (const SceneObject& od : discrete.objects) {
    const SceneObject* oa = a.find_object(od.id);
    const SceneObject* ob = b.find_object(od.id);
    SceneObject o = od;
    if (oa != nullptr && ob != nullptr) {
      o.position = Vec2{lerp(oa->position.x, ob->position.x),
                        lerp(oa->position.y, ob->position.y)};
      o.bbox = Rect{lerp(oa->bbox.x0, ob->bbox.x0), lerp(oa->bbox.y0, ob->bbox.y0),
                    lerp(oa->bbox.x1, ob->bbox.x1), lerp(oa->bbox.y1, ob->bbox.y1)};
    }
    out.objects.push_back(o);
  }
  return out;
}

inline const char* template_kind_name(TemplateKind k) {
  switch (k) {
    case TemplateKind::OccludedChange: return "occluded_change";
    case TemplateKind::OutOfFovChange: return "out_of_fov_change";
    case TemplateKind::AbsenceChange: return "absence_change";
    case TemplateKind::NoMistake: return "no_mistake";
  }
  return "?";
}

inline const char* expression_name(Expression e) {
  switch (e) {
    case Expression::Neutral: return "neutral";
    case Expression::Happy: return "happy";
    case Expression::Sad: return "sad";
    case Expression::Angry: return "angry";
    case Expression::Surprised: return "surprised";
  }
  return "?";
}

inline const char* state_tag_name(StateTag s) {
  switch (s) {
    case StateTag::Slot0: return "slot0";
    case StateTag::Slot1: return "slot1";
    case StateTag::Slot2: return "slot2";
    case StateTag::Slot3: return "slot3";
    case StateTag::Slot4: return "slot4";
    case StateTag::Slot5: return "slot5";
    case StateTag::Hidden: return "hidden";
    case StateTag::Fixed: return "fixed";
  }
  return "?";
}

inline const char* predicate_name(Predicate p) {
  return p == Predicate::AtLocation ? "at_location" : "exists_visible";
}

// Fixed-width decimal formatting; every emitted artifact uses one of these so
// identical values produce identical bytes.
inline std::string fmt2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace mistaken
