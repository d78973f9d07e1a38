#pragma once

// JSON codec for scene documents, schema version "1". Coordinates are stored
// as integers in scene-units, so roundtrips are bit-exact by construction.
// Character lists contain only present characters; decode restores the full
// slot vector. Labels are stored sparsely as [character, frame] pairs.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mistaken/core.hpp"

namespace mistaken {

inline constexpr const char* kSceneSchemaVersion = "1";

namespace detail {

using Json = nlohmann::json;

inline std::int64_t to_scene_int(double v, const char* what) {
  if (!(v >= -1e9 && v <= 1e9) || std::nearbyint(v) != v)
    throw CodecError(std::string("encode_scene: ") + what +
                     " is not an integer scene coordinate: " + std::to_string(v));
  return static_cast<std::int64_t>(v);
}

inline const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw CodecError(std::string("decode_scene: missing field \"") + key + "\"");
  return *it;
}

inline double int_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_integer())
    throw CodecError(std::string("decode_scene: field \"") + key +
                     "\" must be an integer");
  return static_cast<double>(v.get<std::int64_t>());
}

template <typename Enum, int N>
Enum parse_enum(const std::string& text, const char* (*namer)(Enum), const char* what) {
  for (int i = 0; i < N; ++i) {
    const Enum e = static_cast<Enum>(i);
    if (text == namer(e)) return e;
  }
  throw CodecError(std::string("decode_scene: unknown ") + what + " \"" + text + "\"");
}

inline const char* facing_name(Facing f) { return f == Facing::Left ? "left" : "right"; }
inline const char* object_kind_name(ObjectKind k) { return object_traits(k).name; }

}  // namespace detail

inline nlohmann::json encode_scene(const Scene& scene) {
  using detail::Json;
  using detail::to_scene_int;
  require_valid(scene, "encode_scene");

  Json doc;
  doc["version"] = kSceneSchemaVersion;
  doc["seed"] = scene.seed;
  doc["template_kind"] = template_kind_name(scene.template_kind);

  Json frames = Json::array();
  for (const Frame& f : scene.frames) {
    Json jf;
    jf["index"] = f.index;
    Json chars = Json::array();
    for (const CharacterInstance& ch : f.characters) {
      if (!ch.present) continue;
      Json jc;
      jc["id"] = ch.id.value;
      jc["x"] = to_scene_int(ch.head.x, "character head x");
      jc["y"] = to_scene_int(ch.head.y, "character head y");
      jc["facing"] = detail::facing_name(ch.facing);
      jc["expression"] = expression_name(ch.expression);
      chars.push_back(std::move(jc));
    }
    jf["characters"] = std::move(chars);
    Json objs = Json::array();
    for (const SceneObject& o : f.objects) {
      Json jo;
      jo["kind"] = detail::object_kind_name(o.id);
      jo["x"] = to_scene_int(o.position.x, "object x");
      jo["y"] = to_scene_int(o.position.y, "object y");
      jo["state"] = state_tag_name(o.state_tag);
      objs.push_back(std::move(jo));
    }
    jf["objects"] = std::move(objs);
    frames.push_back(std::move(jf));
  }
  doc["frames"] = std::move(frames);

  Json prop;
  prop["subject"] = detail::object_kind_name(scene.proposition.subject);
  prop["predicate"] = predicate_name(scene.proposition.predicate);
  Json truth = Json::array();
  for (bool b : scene.proposition.truth) truth.push_back(b ? 1 : 0);
  prop["truth"] = std::move(truth);
  doc["proposition"] = std::move(prop);

  Json labels = Json::array();
  for (int c = 0; c < kCharacterCount; ++c)
    for (int t = 0; t < kFrameCount; ++t)
      if (scene.labels.matrix[c][t]) labels.push_back(Json::array({c, t}));
  doc["labels"] = std::move(labels);
  return doc;
}

inline Scene decode_scene(const nlohmann::json& doc) {
  using detail::Json;
  using detail::field;
  using detail::int_field;
  using detail::parse_enum;

  const Json& ver = field(doc, "version");
  if (!ver.is_string() || ver.get<std::string>() != kSceneSchemaVersion)
    throw CodecError("decode_scene: unsupported schema version " + ver.dump() +
                     ", expected \"" + kSceneSchemaVersion + "\"");

  Scene scene;
  const Json& seed = field(doc, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    throw CodecError("decode_scene: field \"seed\" must be an integer");
  scene.seed = seed.get<std::uint64_t>();
  scene.template_kind = parse_enum<TemplateKind, kTemplateKindCount>(
      field(doc, "template_kind").get<std::string>(), template_kind_name,
      "template kind");

  const Json& frames = field(doc, "frames");
  if (!frames.is_array())
    throw CodecError("decode_scene: field \"frames\" must be an array");
  int index = 0;
  for (const Json& jf : frames) {
    Frame f = empty_frame(index++);
    f.index = static_cast<int>(int_field(jf, "index"));
    for (const Json& jc : field(jf, "characters")) {
      const int id = static_cast<int>(int_field(jc, "id"));
      if (id < 0 || id >= kCharacterCount)
        throw CodecError("decode_scene: character id out of range: " +
                         std::to_string(id));
      CharacterInstance& ch = f.characters[id];
      if (ch.present)
        throw CodecError("decode_scene: duplicate character id " + std::to_string(id));
      ch.present = true;
      ch.head = Vec2{int_field(jc, "x"), int_field(jc, "y")};
      ch.facing = parse_enum<Facing, 2>(field(jc, "facing").get<std::string>(),
                                        detail::facing_name, "facing");
      ch.expression = parse_enum<Expression, kExpressionCount>(
          field(jc, "expression").get<std::string>(), expression_name, "expression");
    }
    for (const Json& jo : field(jf, "objects")) {
      const ObjectKind kind = parse_enum<ObjectKind, kObjectKindCount>(
          field(jo, "kind").get<std::string>(), detail::object_kind_name,
          "object kind");
      const Vec2 pos{int_field(jo, "x"), int_field(jo, "y")};
      const StateTag tag = parse_enum<StateTag, 8>(
          field(jo, "state").get<std::string>(), state_tag_name, "state tag");
      f.objects.push_back(make_object(kind, pos, tag));
    }
    scene.frames.push_back(std::move(f));
  }

  const Json& prop = field(doc, "proposition");
  scene.proposition.subject = parse_enum<ObjectKind, kObjectKindCount>(
      field(prop, "subject").get<std::string>(), detail::object_kind_name, "subject");
  scene.proposition.predicate =
      field(prop, "predicate").get<std::string>() == "at_location"
          ? Predicate::AtLocation
          : (field(prop, "predicate").get<std::string>() == "exists_visible"
                 ? Predicate::ExistsVisible
                 : throw CodecError("decode_scene: unknown predicate \"" +
                                    field(prop, "predicate").get<std::string>() +
                                    "\""));
  const Json& truth = field(prop, "truth");
  if (!truth.is_array() || truth.size() != kFrameCount)
    throw CodecError("decode_scene: proposition truth must list one value per frame");
  for (int t = 0; t < kFrameCount; ++t)
    scene.proposition.truth[t] = truth[t].get<int>() != 0;

  for (const Json& cell : field(doc, "labels")) {
    if (!cell.is_array() || cell.size() != 2)
      throw CodecError("decode_scene: each label cell must be a [character, frame] pair");
    const int c = cell[0].get<int>();
    const int t = cell[1].get<int>();
    if (c < 0 || c >= kCharacterCount || t < 0 || t >= kFrameCount)
      throw CodecError("decode_scene: label cell out of range: [" + std::to_string(c) +
                       ", " + std::to_string(t) + "]");
    scene.labels.matrix[c][t] = true;
  }
  scene.labels.fill_any();
  return scene;
}

inline std::string dump_json(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return text;
}

inline nlohmann::json parse_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw CodecError("malformed JSON: " + path);
  return doc;
}

inline void save_scene(const Scene& scene, const std::string& path) {
  write_text_file(path, dump_json(encode_scene(scene)));
}

inline Scene load_scene(const std::string& path) {
  return decode_scene(parse_json_file(path));
}

}  // namespace mistaken
