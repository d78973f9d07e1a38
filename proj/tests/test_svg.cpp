// SVG rendering: determinism, facing mirror, highlight marker.

#include <catch_amalgamated.hpp>

#include <string>

#include "mistaken/core.hpp"
#include "mistaken/svg.hpp"

#include "fixtures.hpp"

using namespace mistaken;

TEST_CASE("rendering the same frame twice yields identical bytes") {
  const Scene s = fixtures::all_fixtures()[0].scene;
  for (const Frame& f : s.frames) {
    const std::string a = render_svg(f);
    const std::string b = render_svg(f);
    REQUIRE(a == b);
  }
}

TEST_CASE("an empty frame renders only the backdrop") {
  const Frame f = empty_frame(0);
  const std::string svg = render_svg(f);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("viewBox=\"0 0 700.00 400.00\"") != std::string::npos);
  // No character glyph groups, no object rectangles beyond the background.
  CHECK(svg.find("scale(-1, 1)") == std::string::npos);
  CHECK(svg.find("#d62728") == std::string::npos);
}

TEST_CASE("right-facing characters get the mirror transform") {
  Frame f = empty_frame(0);
  f.characters[0].present = true;
  f.characters[0].head = {200, 150};
  f.characters[0].facing = Facing::Right;
  CHECK(render_svg(f).find("scale(-1, 1)") != std::string::npos);

  f.characters[0].facing = Facing::Left;
  CHECK(render_svg(f).find("scale(-1, 1)") == std::string::npos);
}

TEST_CASE("highlight draws the red arrow only for present characters") {
  Frame f = empty_frame(0);
  f.characters[3].present = true;
  f.characters[3].head = {350, 180};

  const std::string marked = render_svg(f, CharacterId{3});
  CHECK(marked.find("#d62728") != std::string::npos);

  const std::string plain = render_svg(f);
  CHECK(plain.find("#d62728") == std::string::npos);

  // Highlighting an absent character leaves the frame unmarked.
  const std::string absent = render_svg(f, CharacterId{4});
  CHECK(absent.find("#d62728") == std::string::npos);
}

TEST_CASE("hidden objects are not painted") {
  Frame f = empty_frame(0);
  f.objects.push_back(make_object(ObjectKind::Ball, {300, 200}, StateTag::Slot0));
  const std::string with_ball = render_svg(f);

  Frame g = empty_frame(0);
  g.objects.push_back(make_object(ObjectKind::Ball, {300, 200}, StateTag::Hidden));
  const std::string hidden = render_svg(g);

  CHECK(with_ball != hidden);
  CHECK(hidden == render_svg(empty_frame(0)));
}

TEST_CASE("distinct frames render distinct documents") {
  const Scene s = fixtures::all_fixtures()[0].scene;
  CHECK(render_svg(s.frames[0]) != render_svg(s.frames[7]));
}
