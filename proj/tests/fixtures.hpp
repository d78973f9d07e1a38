#pragma once

// Hand-scripted scenes with label matrices worked out on paper. Each builder
// writes the expected matrix literally; tests recompute labels with the
// library (and with the replay oracle) and demand exact equality.
//
// Shared geometry conventions: facing Right sees only strictly-greater x,
// facing Left strictly-smaller x; visibility is about positions, so a
// character watching a hidden object's empty spot has observed that it is
// gone; beliefs update at the start of each frame.

#include <string>
#include <vector>

#include "mistaken/core.hpp"

namespace fixtures {

using namespace mistaken;

inline void put_char(Frame& f, int id, double x, double y, Facing facing,
                     Expression expr = Expression::Neutral) {
  CharacterInstance& c = f.characters[static_cast<std::size_t>(id)];
  c.id = CharacterId{id};
  c.head = Vec2{x, y};
  c.facing = facing;
  c.expression = expr;
  c.present = true;
}

inline void put_obj(Frame& f, ObjectKind kind, double x, double y, StateTag tag) {
  f.objects.push_back(make_object(kind, Vec2{x, y}, tag));
}

inline Scene shell(std::uint64_t seed, TemplateKind kind, ObjectKind subject,
                   Predicate pred) {
  Scene s;
  s.seed = seed;
  s.template_kind = kind;
  s.proposition.subject = subject;
  s.proposition.predicate = pred;
  for (int t = 0; t < kFrameCount; ++t) s.frames.push_back(empty_frame(t));
  return s;
}

inline void finish(Scene& s) {
  s.proposition.truth =
      derive_truth(s.frames, s.proposition.subject, s.proposition.predicate);
  s.labels.fill_any();
}

inline void expect_row(Scene& s, int c, const std::array<int, kFrameCount>& row) {
  for (int t = 0; t < kFrameCount; ++t)
    s.labels.matrix[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)] =
        row[static_cast<std::size_t>(t)] != 0;
}

struct Fixture {
  std::string name;
  Scene scene;
};

// A chair is pulled away behind a sitter's back in the third frame; the
// sitter keeps believing it is where it was. The mover watches throughout.
inline Fixture fig1_chair() {
  Scene s = shell(101, TemplateKind::OutOfFovChange, ObjectKind::Chair,
                  Predicate::AtLocation);
  for (int t = 0; t < kFrameCount; ++t) {
    Frame& f = s.frames[static_cast<std::size_t>(t)];
    if (t < 2) {
      put_obj(f, ObjectKind::Chair, 500, 220, StateTag::Slot0);
      put_char(f, 0, 150, 200, Facing::Right, Expression::Happy);
    } else {
      put_obj(f, ObjectKind::Chair, 600, 300, StateTag::Slot1);
      put_char(f, 0, 150, 200, Facing::Left, Expression::Happy);
    }
    put_char(f, 1, 650, 200, Facing::Left, Expression::Surprised);
  }
  expect_row(s, 0, {0, 0, 1, 1, 1, 1, 1, 1});
  finish(s);
  return {"fig1_chair", s};
}

// The dog disappears at frame 3 just as one character turns away; that
// character keeps believing the dog is there. The other character watches
// the spot the whole time, sees it empty, and stays correct.
inline Fixture hidden_dog() {
  Scene s = shell(102, TemplateKind::OutOfFovChange, ObjectKind::Dog,
                  Predicate::ExistsVisible);
  for (int t = 0; t < kFrameCount; ++t) {
    Frame& f = s.frames[static_cast<std::size_t>(t)];
    put_obj(f, ObjectKind::Dog, 400, 200, t < 3 ? StateTag::Slot0 : StateTag::Hidden);
    put_char(f, 0, 100, 210, t < 3 ? Facing::Right : Facing::Left, Expression::Sad);
    put_char(f, 1, 620, 190, Facing::Left);
  }
  expect_row(s, 0, {0, 0, 0, 1, 1, 1, 1, 1});
  finish(s);
  return {"hidden_dog", s};
}

// A ball is moved to the far side of a couch; from the near watcher's spot
// the couch blocks the new position, so the move is never seen. The mover
// stands clear of the couch line and stays correct.
inline Fixture couch_ball() {
  Scene s = shell(103, TemplateKind::OccludedChange, ObjectKind::Ball,
                  Predicate::AtLocation);
  for (int t = 0; t < kFrameCount; ++t) {
    Frame& f = s.frames[static_cast<std::size_t>(t)];
    put_obj(f, ObjectKind::Couch, 350, 210, StateTag::Fixed);
    if (t < 2)
      put_obj(f, ObjectKind::Ball, 200, 120, StateTag::Slot0);
    else
      put_obj(f, ObjectKind::Ball, 560, 225, StateTag::Slot1);
    put_char(f, 0, 120, 120, Facing::Right);
    put_char(f, 1, 620, 120, Facing::Left, Expression::Happy);
  }
  expect_row(s, 0, {0, 0, 1, 1, 1, 1, 1, 1});
  finish(s);
  return {"couch_ball", s};
}

// A painting moves from in front of the watcher to behind them at frame 4.
inline Fixture out_of_fov_move() {
  Scene s = shell(104, TemplateKind::OutOfFovChange, ObjectKind::Painting,
                  Predicate::AtLocation);
  for (int t = 0; t < kFrameCount; ++t) {
    Frame& f = s.frames[static_cast<std::size_t>(t)];
    if (t < 4)
      put_obj(f, ObjectKind::Painting, 500, 150, StateTag::Slot0);
    else
      put_obj(f, ObjectKind::Painting, 150, 150, StateTag::Slot1);
    put_char(f, 0, 350, 200, Facing::Right);
    put_char(f, 1, 660, 160, Facing::Left);
  }
  expect_row(s, 0, {0, 0, 0, 0, 1, 1, 1, 1});
  finish(s);
  return {"out_of_fov_move", s};
}

// The watcher leaves after frame 1; the painting moves at frame 3; the
// watcher returns at frame 5 facing the wrong way to notice.
inline Fixture absent_painting() {
  Scene s = shell(105, TemplateKind::AbsenceChange, ObjectKind::Painting,
                  Predicate::AtLocation);
  for (int t = 0; t < kFrameCount; ++t) {
    Frame& f = s.frames[static_cast<std::size_t>(t)];
    if (t < 3)
      put_obj(f, ObjectKind::Painting, 400, 140, StateTag::Slot0);
    else
      put_obj(f, ObjectKind::Painting, 250, 140, StateTag::Slot1);
    if (t < 2)
      put_char(f, 0, 150, 200, Facing::Right);
    else if (t >= 5)
      put_char(f, 0, 600, 260, Facing::Right);
    put_char(f, 1, 680, 150, Facing::Left);
  }
  expect_row(s, 0, {0, 0, 0, 0, 0, 1, 1, 1});
  finish(s);
  return {"absent_painting", s};
}

// A fully observed move: the ball changes slots in the open and the single
// watcher sees every frame, so no cell is mistaken.
inline Fixture no_mistake_watched() {
  Scene s = shell(106, TemplateKind::NoMistake, ObjectKind::Ball,
                  Predicate::AtLocation);
  for (int t = 0; t < kFrameCount; ++t) {
    Frame& f = s.frames[static_cast<std::size_t>(t)];
    if (t < 3)
      put_obj(f, ObjectKind::Ball, 300, 200, StateTag::Slot0);
    else
      put_obj(f, ObjectKind::Ball, 580, 240, StateTag::Slot1);
    put_char(f, 0, 100, 200, Facing::Right);
  }
  finish(s);
  return {"no_mistake_watched", s};
}

// One character never sees the pie at all and is never mistaken about it,
// even after it vanishes; the character who did see it turns away right
// before the disappearance and becomes mistaken.
inline Fixture never_observed() {
  Scene s = shell(107, TemplateKind::NoMistake, ObjectKind::Pie,
                  Predicate::ExistsVisible);
  for (int t = 0; t < kFrameCount; ++t) {
    Frame& f = s.frames[static_cast<std::size_t>(t)];
    put_obj(f, ObjectKind::Pie, 300, 180, t < 5 ? StateTag::Slot0 : StateTag::Hidden);
    put_char(f, 0, 650, 200, Facing::Right);  // pie is behind this one forever
    put_char(f, 1, 100, 180, t < 5 ? Facing::Right : Facing::Left);
  }
  expect_row(s, 1, {0, 0, 0, 0, 0, 1, 1, 1});
  finish(s);
  return {"never_observed", s};
}

// Change at frame 2 missed (facing away), absent at frame 3, watching again
// from frame 4: mistaken exactly at frame 2.
inline Fixture reobservation() {
  Scene s = shell(108, TemplateKind::AbsenceChange, ObjectKind::Ball,
                  Predicate::AtLocation);
  for (int t = 0; t < kFrameCount; ++t) {
    Frame& f = s.frames[static_cast<std::size_t>(t)];
    if (t < 2)
      put_obj(f, ObjectKind::Ball, 200, 150, StateTag::Slot0);
    else
      put_obj(f, ObjectKind::Ball, 500, 150, StateTag::Slot1);
    if (t < 2)
      put_char(f, 0, 100, 150, Facing::Right);
    else if (t == 2)
      put_char(f, 0, 100, 150, Facing::Left);
    else if (t >= 4)
      put_char(f, 0, 100, 150, Facing::Right);
    put_char(f, 1, 640, 150, Facing::Left);
  }
  expect_row(s, 0, {0, 0, 1, 0, 0, 0, 0, 0});
  finish(s);
  return {"reobservation", s};
}

inline std::vector<Fixture> all_fixtures() {
  return {fig1_chair(),      hidden_dog(),      couch_ball(),
          out_of_fov_move(), absent_painting(), no_mistake_watched(),
          never_observed(),  reobservation()};
}

}  // namespace fixtures
