#pragma once

// Dataset directory layout: manifest.json plus one scene-%06d.json per
// scene. The manifest records everything needed to rebuild the scenes
// bit-exactly: master seed, per-scene seeds, template assignment, and the
// final generator knobs.

#include <cstdio>
#include <filesystem>
#include <string>

#include "mistaken/generator.hpp"
#include "mistaken/json_codec.hpp"
#include "mistaken/parallel.hpp"

namespace mistaken {

inline std::string scene_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene-%06d.json", index);
  return buf;
}

inline nlohmann::json targets_to_json(const GenTargets& t) {
  nlohmann::json j;
  j["mistaken_frame_fraction"] = t.mistaken_frame_fraction;
  j["fraction_tolerance"] = t.fraction_tolerance;
  j["mean_characters_per_frame"] = t.mean_characters_per_frame;
  j["characters_tolerance"] = t.characters_tolerance;
  return j;
}

inline GenTargets targets_from_json(const nlohmann::json& j) {
  GenTargets t;
  t.mistaken_frame_fraction = j.at("mistaken_frame_fraction").get<double>();
  t.fraction_tolerance = j.at("fraction_tolerance").get<double>();
  t.mean_characters_per_frame = j.at("mean_characters_per_frame").get<double>();
  t.characters_tolerance = j.at("characters_tolerance").get<double>();
  return t;
}

inline nlohmann::json gen_params_to_json(const GenParams& p) {
  nlohmann::json j;
  j["no_mistake_share"] = p.no_mistake_share;
  j["bystander_level"] = p.bystander_level;
  j["co_victim_prob"] = p.co_victim_prob;
  j["reobserve_prob"] = p.reobserve_prob;
  j["hide_change_prob"] = p.hide_change_prob;
  return j;
}

inline GenParams gen_params_from_json(const nlohmann::json& j) {
  GenParams p;
  p.no_mistake_share = j.at("no_mistake_share").get<double>();
  p.bystander_level = j.at("bystander_level").get<double>();
  p.co_victim_prob = j.at("co_victim_prob").get<double>();
  p.reobserve_prob = j.at("reobserve_prob").get<double>();
  p.hide_change_prob = j.at("hide_change_prob").get<double>();
  return p;
}

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["version"] = kSceneSchemaVersion;
  j["count"] = m.count;
  j["master_seed"] = m.master_seed;
  j["targets"] = targets_to_json(m.targets);
  j["params"] = gen_params_to_json(m.params);
  j["scene_seeds"] = m.scene_seeds;
  nlohmann::json kinds = nlohmann::json::array();
  for (TemplateKind k : m.kinds) kinds.push_back(template_kind_name(k));
  j["template_kinds"] = std::move(kinds);
  nlohmann::json measured;
  measured["mistaken_frame_fraction"] = m.measured.mistaken_frame_fraction;
  measured["mean_characters_per_frame"] = m.measured.mean_characters_per_frame;
  j["measured"] = std::move(measured);
  return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
  const auto ver = j.at("version").get<std::string>();
  if (ver != kSceneSchemaVersion)
    throw CodecError("manifest: unsupported schema version \"" + ver + "\"");
  DatasetManifest m;
  m.count = j.at("count").get<int>();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.targets = targets_from_json(j.at("targets"));
  m.params = gen_params_from_json(j.at("params"));
  m.scene_seeds = j.at("scene_seeds").get<std::vector<std::uint64_t>>();
  for (const auto& name : j.at("template_kinds")) {
    const std::string s = name.get<std::string>();
    bool found = false;
    for (int k = 0; k < kTemplateKindCount; ++k) {
      if (s == template_kind_name(static_cast<TemplateKind>(k))) {
        m.kinds.push_back(static_cast<TemplateKind>(k));
        found = true;
        break;
      }
    }
    if (!found) throw CodecError("manifest: unknown template kind \"" + s + "\"");
  }
  m.measured.mistaken_frame_fraction =
      j.at("measured").at("mistaken_frame_fraction").get<double>();
  m.measured.mean_characters_per_frame =
      j.at("measured").at("mean_characters_per_frame").get<double>();
  if (static_cast<int>(m.scene_seeds.size()) != m.count ||
      static_cast<int>(m.kinds.size()) != m.count)
    throw CodecError("manifest: per-scene lists do not match count");
  return m;
}

inline void save_dataset(const Dataset& dataset, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir);
  write_text_file(dir + "/manifest.json", dump_json(manifest_to_json(dataset.manifest)));
  for (std::size_t i = 0; i < dataset.scenes.size(); ++i)
    save_scene(dataset.scenes[i], dir + "/" + scene_file_name(static_cast<int>(i)));
}

inline Dataset load_dataset(const std::string& dir, int jobs = 0) {
  Dataset d;
  d.manifest = manifest_from_json(parse_json_file(dir + "/manifest.json"));
  d.scenes.resize(static_cast<std::size_t>(d.manifest.count));
  parallel_for(d.manifest.count, jobs, [&](int i) {
    d.scenes[static_cast<std::size_t>(i)] =
        load_scene(dir + "/" + scene_file_name(i));
  });
  return d;
}

// Rebuilds the scenes recorded in a manifest, skipping the target-adjustment
// loop: the stored seeds, kinds, and knobs already pin everything down.
inline Dataset regenerate_dataset(const DatasetManifest& manifest, int jobs = 0) {
  Dataset d;
  d.manifest = manifest;
  d.scenes.resize(static_cast<std::size_t>(manifest.count));
  parallel_for(manifest.count, jobs, [&](int i) {
    d.scenes[static_cast<std::size_t>(i)] =
        generate_scene(manifest.kinds[static_cast<std::size_t>(i)],
                       manifest.scene_seeds[static_cast<std::size_t>(i)],
                       manifest.params);
  });
  d.manifest.measured = measure_dataset(d.scenes);
  return d;
}

}  // namespace mistaken
