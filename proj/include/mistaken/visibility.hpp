#pragma once

// Line-of-sight model: a character sees the half-plane it faces, minus
// anything behind an occluder. All tests are exact for integer scene
// coordinates (separating-axis test, no divisions).

#include <cmath>

#include "mistaken/core.hpp"

namespace mistaken {

// Closed segment [p, q] vs closed axis-aligned rectangle. Uses the separating
// axis test with doubled coordinates so every quantity stays integral for
// integer inputs.
inline bool segment_intersects_rect(const Vec2& p, const Vec2& q, const Rect& r) {
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  // Segment midpoint and rect center, both scaled by 2.
  const double mx = (p.x + q.x) - (r.x0 + r.x1);
  const double my = (p.y + q.y) - (r.y0 + r.y1);
  const double ex = r.x1 - r.x0;  // doubled half-extent
  const double ey = r.y1 - r.y0;
  const double adx = std::abs(dx);
  const double ady = std::abs(dy);

  if (std::abs(mx) > ex + adx) return false;
  if (std::abs(my) > ey + ady) return false;
  // Axis perpendicular to the segment direction.
  if (std::abs(mx * dy - my * dx) > ex * ady + ey * adx) return false;
  return true;
}

// True when `target` lies strictly in the observer's facing half-plane and no
// occluder blocks the open sight segment. Occluder boxes containing either
// endpoint are ignored: standing inside (or right at) a box never blinds the
// segment. Hidden occluders are out of play.
inline bool is_visible(const CharacterInstance& observer, const Vec2& target,
                       const Frame& frame) {
  if (!observer.present)
    throw ValidationError("is_visible: observer is absent");

  const Vec2& eye = observer.head;
  const bool on_facing_side =
      observer.facing == Facing::Right ? target.x > eye.x : target.x < eye.x;
  if (!on_facing_side) return false;

  for (const SceneObject& o : frame.objects) {
    if (!o.is_occluder || o.state_tag == StateTag::Hidden) continue;
    if (o.bbox.contains(eye) || o.bbox.contains(target)) continue;
    if (segment_intersects_rect(eye, target, o.bbox)) return false;
  }
  return true;
}

}  // namespace mistaken
