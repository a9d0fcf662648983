// SPDX-License-Identifier: Apache-2.0
#include "gesture/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gesture/error.hpp"

namespace gesture {

using nlohmann::json;

namespace {

// Reads `key` into `field` when present, then forgets it so leftovers can be
// reported as unknown.
template <typename T>
void take(json& section, const char* key, T& field) {
  auto it = section.find(key);
  if (it == section.end()) return;
  field = it->get<T>();
  section.erase(it);
}

void reject_leftovers(const json& section, const std::string& where) {
  if (!section.empty()) {
    throw Error(Errc::InvalidConfig, "unknown key '" + section.begin().key() + "' in " + where);
  }
}

json pop_section(json& root, const char* key) {
  auto it = root.find(key);
  if (it == root.end()) return json::object();
  if (!it->is_object()) throw Error(Errc::InvalidConfig, std::string(key) + " must be an object");
  json section = *it;
  root.erase(it);
  return section;
}

}  // namespace

void Config::apply_seed(std::uint64_t value) {
  seed = value;
  train.seed = value;
  lift.seed = value;
}

void Config::validate() const {
  train.validate();
  model.validate();
  if (pca_components < 1 || pca_components > static_cast<int>(kPoseDim)) {
    throw Error(Errc::InvalidConfig, "pca_components must be in [1, 16]");
  }
  if (model.pose_dim != pca_components) {
    throw Error(Errc::InvalidConfig, "model.pose_dim must equal pca_components");
  }
  if (!(fps > 0.0)) throw Error(Errc::InvalidConfig, "fps must be > 0");
  if (!(words_per_minute > 0.0)) throw Error(Errc::InvalidConfig, "words_per_minute must be > 0");
  if (lift.steps < 1 || lift.batch_size < 2 || !(lift.lr > 0.0)) {
    throw Error(Errc::InvalidConfig, "lift needs steps >= 1, batch_size >= 2, lr > 0");
  }
}

Config config_from_json(const std::string& text) {
  Config c;
  try {
    json root = json::parse(text);
    if (!root.is_object()) throw Error(Errc::InvalidConfig, "config must be a JSON object");

    json t = pop_section(root, "train");
    take(t, "alpha", c.train.alpha);
    take(t, "beta", c.train.beta);
    take(t, "lr", c.train.lr);
    take(t, "batch_size", c.train.batch_size);
    take(t, "clip_lo", c.train.clip_lo);
    take(t, "clip_hi", c.train.clip_hi);
    take(t, "dropout", c.train.dropout);
    take(t, "epochs", c.train.epochs);
    reject_leftovers(t, "train");

    json m = pop_section(root, "model");
    take(m, "word_dim", c.model.word_dim);
    take(m, "hidden", c.model.hidden);
    take(m, "n", c.model.n);
    take(m, "m", c.model.m);
    take(m, "attn_dim", c.model.attn_dim);
    take(m, "pre_dim", c.model.pre_dim);
    reject_leftovers(m, "model");

    json cu = pop_section(root, "curation");
    take(cu, "min_height_ratio", c.curation.min_height_ratio);
    take(cu, "min_frontal_ratio", c.curation.min_frontal_ratio);
    take(cu, "min_duration", c.curation.min_duration);
    take(cu, "min_motion", c.curation.min_motion);
    take(cu, "max_jitter", c.curation.max_jitter);
    reject_leftovers(cu, "curation");

    json l = pop_section(root, "lift");
    take(l, "steps", c.lift.steps);
    take(l, "batch_size", c.lift.batch_size);
    take(l, "lr", c.lift.lr);
    take(l, "rot_range", c.lift.rot_range);
    take(l, "noise_sigma", c.lift.noise_sigma);
    reject_leftovers(l, "lift");

    json p = pop_section(root, "paths");
    take(p, "dataset", c.paths.dataset);
    take(p, "embeddings", c.paths.embeddings);
    take(p, "checkpoint", c.paths.checkpoint);
    take(p, "output_dir", c.paths.output_dir);
    reject_leftovers(p, "paths");

    take(root, "pca_components", c.pca_components);
    take(root, "fps", c.fps);
    take(root, "words_per_minute", c.words_per_minute);
    std::uint64_t seed = 0;
    take(root, "seed", seed);
    reject_leftovers(root, "config");
    c.apply_seed(seed);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
  c.model.pose_dim = c.pca_components;
  c.model.dropout = c.train.dropout;
  c.validate();
  return c;
}

std::string config_to_json(const Config& c) {
  json j;
  j["train"] = {{"alpha", c.train.alpha},     {"beta", c.train.beta},       {"lr", c.train.lr},
                {"batch_size", c.train.batch_size}, {"clip_lo", c.train.clip_lo},
                {"clip_hi", c.train.clip_hi}, {"dropout", c.train.dropout}, {"epochs", c.train.epochs}};
  j["model"] = {{"word_dim", c.model.word_dim}, {"hidden", c.model.hidden}, {"n", c.model.n},
                {"m", c.model.m},               {"attn_dim", c.model.attn_dim}, {"pre_dim", c.model.pre_dim}};
  j["curation"] = {{"min_height_ratio", c.curation.min_height_ratio},
                   {"min_frontal_ratio", c.curation.min_frontal_ratio},
                   {"min_duration", c.curation.min_duration},
                   {"min_motion", c.curation.min_motion},
                   {"max_jitter", c.curation.max_jitter}};
  j["lift"] = {{"steps", c.lift.steps}, {"batch_size", c.lift.batch_size}, {"lr", c.lift.lr},
               {"rot_range", c.lift.rot_range}, {"noise_sigma", c.lift.noise_sigma}};
  j["paths"] = {{"dataset", c.paths.dataset}, {"embeddings", c.paths.embeddings},
                {"checkpoint", c.paths.checkpoint}, {"output_dir", c.paths.output_dir}};
  j["pca_components"] = c.pca_components;
  j["fps"] = c.fps;
  j["words_per_minute"] = c.words_per_minute;
  j["seed"] = c.seed;
  return j.dump(2);
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

}  // namespace gesture
