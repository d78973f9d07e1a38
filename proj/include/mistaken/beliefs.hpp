#pragma once

// Belief tracking: each character remembers the last state it saw for each
// object. Replaying a scene's frames through update_beliefs and comparing the
// remembered answers against ground truth yields the mistaken-label matrix.

#include <optional>

#include "mistaken/core.hpp"
#include "mistaken/visibility.hpp"

namespace mistaken {

struct Observation {
  StateTag state = StateTag::Fixed;
  int frame = -1;
  friend bool operator==(const Observation&, const Observation&) = default;
};

struct BeliefState {
  // last_frame is the index of the most recently applied frame, -1 initially.
  int last_frame = -1;
  std::array<std::array<std::optional<Observation>, kObjectKindCount>, kCharacterCount>
      entries{};

  const std::optional<Observation>& entry(CharacterId c, ObjectKind k) const {
    return entries[c.value][static_cast<int>(k)];
  }
  friend bool operator==(const BeliefState&, const BeliefState&) = default;
};

// Applies one frame of observations. Present characters record the current
// state of every object whose position they can see; a hidden object's empty
// spot counts as seeing that it is gone. Absent characters learn nothing, and
// unseen objects keep their remembered state.
inline BeliefState update_beliefs(const BeliefState& beliefs, const Frame& frame) {
  if (frame.index != beliefs.last_frame + 1)
    throw ValidationError("update_beliefs: expected frame " +
                          std::to_string(beliefs.last_frame + 1) + ", got " +
                          std::to_string(frame.index));
  BeliefState next = beliefs;
  next.last_frame = frame.index;
  for (const CharacterInstance& ch : frame.characters) {
    if (!ch.present) continue;
    for (const SceneObject& obj : frame.objects) {
      if (!is_visible(ch, obj.position, frame)) continue;
      next.entries[ch.id.value][static_cast<int>(obj.id)] =
          Observation{obj.state_tag, frame.index};
    }
  }
  return next;
}

// Replays the whole scene and marks (character, frame) cells where the
// character's remembered answer disagrees with the true one. Observations
// land at the start of a frame, so seeing the new state at t clears frame t.
// A character that has never seen the subject holds no answer and is never
// mistaken.
inline MistakenLabels derive_labels(const Scene& scene) {
  require_valid(scene, "derive_labels");
  const ObjectKind subject = scene.proposition.subject;
  const StateTag reference = scene.frames[0].find_object(subject)->state_tag;

  MistakenLabels labels;
  BeliefState beliefs;
  for (int t = 0; t < kFrameCount; ++t) {
    const Frame& frame = scene.frames[t];
    beliefs = update_beliefs(beliefs, frame);
    for (const CharacterInstance& ch : frame.characters) {
      if (!ch.present) continue;
      const auto& entry = beliefs.entry(ch.id, subject);
      if (!entry.has_value()) continue;
      const bool believed =
          evaluate_predicate(scene.proposition.predicate, entry->state, reference);
      labels.matrix[ch.id.value][t] = believed != scene.proposition.truth[t];
    }
  }
  labels.fill_any();
  return labels;
}

}  // namespace mistaken
