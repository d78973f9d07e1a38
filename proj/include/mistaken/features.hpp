#pragma once

// Feature extraction: person-centric canonicalization, semantic-channel
// rasterization onto a coarse occupancy grid, 2x2 max-pool downsampling, the
// per-frame temporal assembly with its ablation variants, and the simple
// per-frame baseline encodings. Also the optional binary feature cache.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "mistaken/core.hpp"

namespace mistaken {

inline constexpr int kChannels = 8;
inline constexpr int kRasterH = 24;
inline constexpr int kRasterW = 42;
inline constexpr int kGridH = 12;
inline constexpr int kGridW = 21;
inline constexpr int kFeatDim = kChannels * kGridH * kGridW;  // 2016

// Channel-major dense grid; used both at raster resolution (24x42) and after
// downsampling (12x21).
struct FeatureGrid {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  FeatureGrid() = default;
  FeatureGrid(int c, int h, int w)
      : channels(c), height(h), width(w),
        values(static_cast<std::size_t>(c) * h * w, 0.0) {}

  double& at(int c, int r, int col) {
    return values[(static_cast<std::size_t>(c) * height + r) * width + col];
  }
  double at(int c, int r, int col) const {
    return values[(static_cast<std::size_t>(c) * height + r) * width + col];
  }
};

enum class Variant : std::uint8_t { Standard, Centered, Flipped, Rewind };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Standard: return "standard";
    case Variant::Centered: return "centered";
    case Variant::Flipped: return "flipped";
    case Variant::Rewind: return "rewind";
  }
  return "?";
}

// One character's temporal features: T flattened frame vectors plus the
// vector used for the temporal zero-padding positions (all zeros except for
// the Present baseline, whose padding is its own signal).
struct FeatureSeq {
  int T = kFrameCount;
  int D = 0;
  Variant variant = Variant::Standard;
  std::array<bool, kFrameCount> presence{};
  std::vector<float> data;  // T*D, frame-major
  std::vector<float> pad;   // size D

  float value(int t, int d) const { return data[static_cast<std::size_t>(t) * D + d]; }
};

// Rigid canonicalization: mirror the frame about the vertical through c's
// head when c faces Right, then translate c's head to canvas center. Other
// entities may land off-canvas; they stay in the frame and simply fall off
// the raster grid later.
inline Frame person_centric(const Frame& frame, CharacterId c) {
  const CharacterInstance* self = frame.find_character(c);
  if (self == nullptr || !self->present)
    throw ValidationError("person_centric: character " + std::to_string(c.value) +
                          " absent in frame " + std::to_string(frame.index));
  const bool mirror = self->facing == Facing::Right;
  const double hx = self->head.x;
  const double dx = kCanvasW / 2 - hx;
  const double dy = kCanvasH / 2 - self->head.y;

  auto map_x = [&](double x) { return (mirror ? 2 * hx - x : x) + dx; };
  Frame out = frame;
  for (CharacterInstance& ch : out.characters) {
    if (!ch.present) continue;
    ch.head = Vec2{map_x(ch.head.x), ch.head.y + dy};
    if (mirror) ch.facing = opposite(ch.facing);
  }
  for (SceneObject& o : out.objects)
    o = make_object(o.id, Vec2{map_x(o.position.x), o.position.y + dy}, o.state_tag);
  return out;
}

namespace feat_detail {

inline constexpr double kCellW = kCanvasW / kRasterW;
inline constexpr double kCellH = kCanvasH / kRasterH;

// Adds the covered-area fraction of `r` to each raster cell, clamped to 1.
inline void paint_rect(FeatureGrid& g, int ch, const Rect& r) {
  const int c0 = std::max(0, static_cast<int>(std::floor(r.x0 / kCellW)));
  const int c1 = std::min(kRasterW - 1, static_cast<int>(std::floor(r.x1 / kCellW)));
  const int r0 = std::max(0, static_cast<int>(std::floor(r.y0 / kCellH)));
  const int r1 = std::min(kRasterH - 1, static_cast<int>(std::floor(r.y1 / kCellH)));
  for (int row = r0; row <= r1; ++row) {
    const double oy = std::min(r.y1, (row + 1) * kCellH) - std::max(r.y0, row * kCellH);
    if (oy <= 0) continue;
    for (int col = c0; col <= c1; ++col) {
      const double ox =
          std::min(r.x1, (col + 1) * kCellW) - std::max(r.x0, col * kCellW);
      if (ox <= 0) continue;
      double& cell = g.at(ch, row, col);
      cell = std::min(1.0, cell + (ox * oy) / (kCellW * kCellH));
    }
  }
}

inline Rect body_rect(const Vec2& head) {
  return Rect{head.x - 16, head.y - 12, head.x + 16, head.y + 72};
}

// A 3-cell-tall band at head height covering the facing half, head column
// included. Heads off the grid paint whatever part of the band survives the
// clamp, possibly nothing.
inline void paint_gaze(FeatureGrid& g, int ch, const Vec2& head, Facing facing) {
  const int head_row = static_cast<int>(std::floor(head.y / kCellH));
  const int r0 = std::max(0, head_row - 1);
  const int r1 = std::min(kRasterH - 1, head_row + 1);
  if (r0 > r1) return;
  const int head_col = static_cast<int>(std::floor(head.x / kCellW));
  int c0, c1;
  if (facing == Facing::Left) {
    c0 = 0;
    c1 = std::min(head_col, kRasterW - 1);
  } else {
    c0 = std::max(head_col, 0);
    c1 = kRasterW - 1;
  }
  for (int row = r0; row <= r1; ++row)
    for (int col = c0; col <= c1; ++col) g.at(ch, row, col) = 1.0;
}

}  // namespace feat_detail

// Paints the 8 semantic planes at raster resolution. `subject` names the
// proposition's object so it gets its own channel; hidden objects are not
// painted anywhere.
inline FeatureGrid rasterize(const Frame& frame, CharacterId c, ObjectKind subject) {
  using namespace feat_detail;
  FeatureGrid g(kChannels, kRasterH, kRasterW);
  const CharacterInstance* self = frame.find_character(c);
  const bool self_present = self != nullptr && self->present;

  if (self_present) {
    paint_rect(g, 0, body_rect(self->head));
    paint_gaze(g, 1, self->head, self->facing);
    for (int row = 0; row < kRasterH; ++row)
      for (int col = 0; col < kRasterW; ++col) g.at(7, row, col) = 1.0;
  }
  for (const CharacterInstance& ch : frame.characters) {
    if (!ch.present || ch.id == c) continue;
    paint_rect(g, 2, body_rect(ch.head));
    paint_gaze(g, 3, ch.head, ch.facing);
  }
  for (const SceneObject& o : frame.objects) {
    if (o.state_tag == StateTag::Hidden) continue;
    if (o.id == subject)
      paint_rect(g, 6, o.bbox);
    else
      paint_rect(g, o.is_occluder ? 4 : 5, o.bbox);
  }
  return g;
}

// 2x2 max pooling per channel.
inline FeatureGrid downsample2(const FeatureGrid& g) {
  if (g.height % 2 != 0 || g.width % 2 != 0)
    throw ValidationError("downsample2: spatial dims must be even, got " +
                          std::to_string(g.height) + "x" + std::to_string(g.width));
  FeatureGrid out(g.channels, g.height / 2, g.width / 2);
  for (int c = 0; c < g.channels; ++c)
    for (int r = 0; r < out.height; ++r)
      for (int col = 0; col < out.width; ++col) {
        const double a = g.at(c, 2 * r, 2 * col);
        const double b = g.at(c, 2 * r, 2 * col + 1);
        const double d = g.at(c, 2 * r + 1, 2 * col);
        const double e = g.at(c, 2 * r + 1, 2 * col + 1);
        out.at(c, r, col) = std::max(std::max(a, b), std::max(d, e));
      }
  return out;
}

namespace feat_detail {

inline void flatten_into(const FeatureGrid& g, float* dst) {
  for (std::size_t i = 0; i < g.values.size(); ++i)
    dst[i] = static_cast<float>(g.values[i]);
}

}  // namespace feat_detail

// Temporal feature assembly for one (scene, character) pair. Standard is the
// full pipeline; Centered skips canonicalization; Flipped inverts the
// character's facing and then removes its own body and gaze planes; Rewind
// is Standard with the frame order reversed. Frames where the character is
// absent are all-zero, presence plane included.
inline FeatureSeq featurize_sequence(const Scene& scene, CharacterId c,
                                     Variant variant) {
  bool ever = false;
  for (const Frame& f : scene.frames) {
    const CharacterInstance* ch = f.find_character(c);
    ever = ever || (ch != nullptr && ch->present);
  }
  if (!ever)
    throw ValidationError("featurize_sequence: character " +
                          std::to_string(c.value) + " absent from every frame");

  FeatureSeq seq;
  seq.D = kFeatDim;
  seq.variant = variant;
  seq.data.assign(static_cast<std::size_t>(seq.T) * kFeatDim, 0.0f);
  seq.pad.assign(kFeatDim, 0.0f);

  for (int t = 0; t < kFrameCount; ++t) {
    const Frame& raw = scene.frames[t];
    const CharacterInstance* ch = raw.find_character(c);
    const bool present = ch != nullptr && ch->present;
    seq.presence[t] = present;
    if (!present) continue;  // all-zero frame vector

    Frame working = raw;
    if (variant == Variant::Flipped)
      working.find_character(c)->facing = opposite(working.find_character(c)->facing);
    if (variant != Variant::Centered) working = person_centric(working, c);

    FeatureGrid grid = rasterize(working, c, scene.proposition.subject);
    if (variant == Variant::Flipped) {
      for (int chn = 0; chn <= 1; ++chn)
        for (int r = 0; r < kRasterH; ++r)
          for (int col = 0; col < kRasterW; ++col) grid.at(chn, r, col) = 0.0;
    }
    const FeatureGrid pooled = downsample2(grid);
    feat_detail::flatten_into(pooled, seq.data.data() +
                                          static_cast<std::size_t>(t) * kFeatDim);
  }

  if (variant == Variant::Rewind) {
    FeatureSeq rev = seq;
    for (int t = 0; t < kFrameCount; ++t) {
      const int src = kFrameCount - 1 - t;
      rev.presence[t] = seq.presence[src];
      std::memcpy(rev.data.data() + static_cast<std::size_t>(t) * kFeatDim,
                  seq.data.data() + static_cast<std::size_t>(src) * kFeatDim,
                  sizeof(float) * kFeatDim);
    }
    return rev;
  }
  return seq;
}

enum class BaselineKind : std::uint8_t {
  Time,
  Pose,
  TimePose,
  Expression,
  CharacterId,
  Present,
  SingleImage,
};

inline int baseline_dim(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Time: return 1;
    case BaselineKind::Pose: return 3;
    case BaselineKind::TimePose: return 4;
    case BaselineKind::Expression: return kExpressionCount;
    case BaselineKind::CharacterId: return kCharacterCount;
    case BaselineKind::Present: return 2;
    case BaselineKind::SingleImage: return kFeatDim;
  }
  throw ValidationError("baseline_dim: unknown kind");
}

// Per-frame hand features. SingleImage reuses the Standard visual features
// (its single-frame nature comes from training with K=1, not from the data).
inline FeatureSeq baseline_features(const Scene& scene, CharacterId c,
                                    BaselineKind kind) {
  if (kind == BaselineKind::SingleImage)
    return featurize_sequence(scene, c, Variant::Standard);

  bool ever = false;
  for (const Frame& f : scene.frames) {
    const CharacterInstance* ch = f.find_character(c);
    ever = ever || (ch != nullptr && ch->present);
  }
  if (!ever)
    throw ValidationError("baseline_features: character " + std::to_string(c.value) +
                          " absent from every frame");

  const int d = baseline_dim(kind);
  FeatureSeq seq;
  seq.D = d;
  seq.variant = Variant::Standard;
  seq.data.assign(static_cast<std::size_t>(seq.T) * d, 0.0f);
  seq.pad.assign(static_cast<std::size_t>(d), 0.0f);
  if (kind == BaselineKind::Present) seq.pad[1] = 1.0f;  // the pad bit

  for (int t = 0; t < kFrameCount; ++t) {
    const CharacterInstance* ch = scene.frames[t].find_character(c);
    const bool present = ch != nullptr && ch->present;
    seq.presence[t] = present;
    float* v = seq.data.data() + static_cast<std::size_t>(t) * d;
    switch (kind) {
      case BaselineKind::Time:
        v[0] = static_cast<float>(t) / (kFrameCount - 1);
        break;
      case BaselineKind::Pose:
        if (present) {
          v[0] = static_cast<float>(ch->head.x / kCanvasW);
          v[1] = static_cast<float>(ch->head.y / kCanvasH);
          v[2] = ch->facing == Facing::Right ? 1.0f : 0.0f;
        }
        break;
      case BaselineKind::TimePose:
        v[0] = static_cast<float>(t) / (kFrameCount - 1);
        if (present) {
          v[1] = static_cast<float>(ch->head.x / kCanvasW);
          v[2] = static_cast<float>(ch->head.y / kCanvasH);
          v[3] = ch->facing == Facing::Right ? 1.0f : 0.0f;
        }
        break;
      case BaselineKind::Expression:
        if (present) v[static_cast<int>(ch->expression)] = 1.0f;
        break;
      case BaselineKind::CharacterId:
        v[c.value] = 1.0f;
        break;
      case BaselineKind::Present:
        v[0] = present ? 1.0f : 0.0f;
        v[1] = 0.0f;
        break;
      case BaselineKind::SingleImage:
        break;  // handled above
    }
  }
  return seq;
}

// --- binary feature cache -------------------------------------------------

inline constexpr std::uint32_t kFeatureCacheMagic = 0x43464C4Du;  // "MLFC"
inline constexpr std::uint32_t kFeatureCacheVersion = 1;

inline void write_feature_cache(const std::string& path, const FeatureSeq& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  const std::uint32_t header[4] = {kFeatureCacheMagic, kFeatureCacheVersion,
                                   static_cast<std::uint32_t>(seq.T),
                                   static_cast<std::uint32_t>(seq.D)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(seq.data.data()),
            static_cast<std::streamsize>(seq.data.size() * sizeof(float)));
  if (!out) throw IoError("write failed: " + path);
}

struct CachedFeatures {
  std::uint32_t T = 0;
  std::uint32_t D = 0;
  std::vector<float> data;
};

inline CachedFeatures read_feature_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::uint32_t header[4];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || header[0] != kFeatureCacheMagic)
    throw CodecError("feature cache: bad magic in " + path);
  if (header[1] != kFeatureCacheVersion)
    throw CodecError("feature cache: unsupported version " +
                     std::to_string(header[1]));
  CachedFeatures c;
  c.T = header[2];
  c.D = header[3];
  c.data.resize(static_cast<std::size_t>(c.T) * c.D);
  in.read(reinterpret_cast<char*>(c.data.data()),
          static_cast<std::streamsize>(c.data.size() * sizeof(float)));
  if (!in) throw CodecError("feature cache: truncated file " + path);
  return c;
}

}  // namespace mistaken
