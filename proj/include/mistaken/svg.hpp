#pragma once

// Minimal SVG emission: a tag builder with fixed two-decimal coordinate
// formatting (identical input gives identical bytes), a scene-frame renderer,
// and the glyph conventions: characters mirror horizontally when facing
// Right, and an optional highlight draws a red arrow over one character.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "mistaken/core.hpp"

namespace mistaken {

class SvgBuilder {
 public:
  SvgBuilder(double width, double height) : width_(width), height_(height) {}

  void raw(const std::string& s) { body_ += s; }

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& extra = "") {
    body_ += "<rect x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" width=\"" + fmt2(w) +
             "\" height=\"" + fmt2(h) + "\" fill=\"" + fill + "\"" + sep(extra) + "/>\n";
  }

  void circle(double cx, double cy, double r, const std::string& fill,
              const std::string& extra = "") {
    body_ += "<circle cx=\"" + fmt2(cx) + "\" cy=\"" + fmt2(cy) + "\" r=\"" + fmt2(r) +
             "\" fill=\"" + fill + "\"" + sep(extra) + "/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width = 1.0) {
    body_ += "<line x1=\"" + fmt2(x1) + "\" y1=\"" + fmt2(y1) + "\" x2=\"" + fmt2(x2) +
             "\" y2=\"" + fmt2(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             fmt2(stroke_width) + "\"/>\n";
  }

  void polygon(const std::vector<Vec2>& pts, const std::string& fill) {
    body_ += "<polygon points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) body_ += " ";
      body_ += fmt2(pts[i].x) + "," + fmt2(pts[i].y);
    }
    body_ += "\" fill=\"" + fill + "\"/>\n";
  }

  void text(double x, double y, const std::string& content, double size = 12.0,
            const std::string& fill = "#333333", const std::string& extra = "") {
    body_ += "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" font-size=\"" +
             fmt2(size) + "\" font-family=\"sans-serif\" fill=\"" + fill + "\"" +
             sep(extra) + ">" + content + "</text>\n";
  }

  void open_group(const std::string& transform) {
    body_ += "<g transform=\"" + transform + "\">\n";
  }
  void close_group() { body_ += "</g>\n"; }

  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(width_) +
           "\" height=\"" + fmt2(height_) + "\" viewBox=\"0 0 " + fmt2(width_) + " " +
           fmt2(height_) + "\">\n" + body_ + "</svg>\n";
  }

 private:
  static std::string sep(const std::string& extra) {
    return extra.empty() ? "" : " " + extra;
  }
  double width_, height_;
  std::string body_;
};

namespace detail {

inline const char* object_fill(ObjectKind k) {
  switch (k) {
    case ObjectKind::Couch: return "#8c6d4f";
    case ObjectKind::Table: return "#a58057";
    case ObjectKind::Bookshelf: return "#6f5436";
    case ObjectKind::Box: return "#b89b72";
    case ObjectKind::Chair: return "#4c72b0";
    case ObjectKind::Ball: return "#dd8452";
    case ObjectKind::Pie: return "#ccb974";
    case ObjectKind::Painting: return "#64b5cd";
    case ObjectKind::Plant: return "#55a868";
    case ObjectKind::Dog: return "#8172b3";
  }
  return "#999999";
}

inline const char* character_fill(int id) {
  static constexpr const char* kPalette[5] = {"#e8b04b", "#c44e52", "#4c72b0",
                                              "#55a868", "#8172b3"};
  return kPalette[id % 5];
}

// Character glyph in a local frame with the head at the origin, drawn facing
// Left; the caller mirrors the group for Right-facing characters.
inline void character_glyph(SvgBuilder& svg, const CharacterInstance& ch) {
  const char* fill = character_fill(ch.id.value);
  svg.rect(-10, 14, 20, 46, fill);                      // torso
  svg.circle(0, 0, 12, fill, "stroke=\"#333333\"");     // head
  svg.circle(-5, -3, 2, "#222222");                     // eye on the facing side
  svg.line(-12, 2, -20, 2, "#222222", 1.5);             // gaze tick
  const char* mouth = "#444444";
  switch (ch.expression) {
    case Expression::Happy: svg.line(-6, 6, -1, 8, mouth, 1.5); break;
    case Expression::Sad: svg.line(-6, 8, -1, 6, mouth, 1.5); break;
    case Expression::Angry: svg.line(-7, -7, -2, -5, mouth, 1.5); break;
    case Expression::Surprised: svg.circle(-4, 6, 2, mouth); break;
    case Expression::Neutral: svg.line(-6, 7, -1, 7, mouth, 1.5); break;
  }
}

}  // namespace detail

// Renders one frame as a standalone SVG document. Hidden objects are not
// painted. `highlight` puts a red arrow above that character (when present),
// the usual way to point out whose belief a figure is about.
inline std::string render_svg(const Frame& frame,
                              std::optional<CharacterId> highlight = std::nullopt) {
  SvgBuilder svg(kCanvasW, kCanvasH);
  svg.rect(0, 0, kCanvasW, kCanvasH, "#f7f3e9", "stroke=\"#cccccc\"");

  for (const SceneObject& o : frame.objects) {
    if (o.state_tag == StateTag::Hidden) continue;
    svg.rect(o.bbox.x0, o.bbox.y0, o.bbox.width(), o.bbox.height(),
             detail::object_fill(o.id),
             o.is_occluder ? "stroke=\"#4a3a28\"" : "stroke=\"#666666\"");
  }

  for (const CharacterInstance& ch : frame.characters) {
    if (!ch.present) continue;
    std::string transform =
        "translate(" + fmt2(ch.head.x) + ", " + fmt2(ch.head.y) + ")";
    if (ch.facing == Facing::Right) transform += " scale(-1, 1)";
    svg.open_group(transform);
    detail::character_glyph(svg, ch);
    svg.close_group();
    if (highlight.has_value() && highlight->value == ch.id.value) {
      const double ax = ch.head.x;
      const double ay = ch.head.y - 18;
      svg.polygon({{ax - 7, ay - 16}, {ax + 7, ay - 16}, {ax, ay - 4}}, "#d62728");
      svg.line(ax, ay - 30, ax, ay - 16, "#d62728", 3.0);
    }
  }
  return svg.str();
}

}  // namespace mistaken
