#include "lnskd/run_config.hpp"

#include <fstream>

namespace lnskd {

using nlohmann::json;

VariantChoice parse_run_variant(std::string_view name) {
  if (name == "lnet-skd" || name == "lnet_skd") return {Variant::kLNet, true};
  if (name == "lnet") return {Variant::kLNet, false};
  if (name == "cnn") return {Variant::kCnn, false};
  if (name == "lnet-minus" || name == "lnet_minus") return {Variant::kLNetMinus, false};
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected lnet, lnet-skd, cnn or lnet-minus)");
}

std::string run_variant_name(Variant architecture, bool skd) {
  switch (architecture) {
    case Variant::kLNet: return skd ? "lnet-skd" : "lnet";
    case Variant::kCnn: return skd ? "cnn+skd" : "cnn";
    case Variant::kLNetMinus: return skd ? "lnet-minus+skd" : "lnet-minus";
  }
  return "unknown";
}

RunConfig RunConfig::resolved() const {
  RunConfig r = *this;
  const auto choice = parse_run_variant(variant);
  r.train.variant = choice.architecture;
  r.train.skd_enabled = skd.value_or(choice.skd);
  r.skd = r.train.skd_enabled;
  r.train.lambda = lambda.value_or(default_lambda(dataset));
  r.lambda = r.train.lambda;
  r.ingest.seed = train.seed;
  r.synthetic.seed = train.seed;
  r.train.validate();
  if (r.model_config) {
    if (r.model_config->variant != Variant::kLNet) throw ConfigError("a model override must describe the lnet layout");
    r.model_config->validate();
  }
  return r;
}

ModelConfig RunConfig::resolved_model_config(const EncodedDataset& data) const {
  if (!model_config) return model_config_for(data, train.variant);
  auto cfg = derive_variant(*model_config, train.variant);
  cfg.validate();
  if (!(cfg.input == data.geometry) || cfg.num_classes != data.num_classes()) {
    throw ConfigError("model override expects input " + shape_to_string(cfg.input.as_shape()) + " and " +
                      std::to_string(cfg.num_classes) + " classes; archive has " +
                      shape_to_string(data.geometry.as_shape()) + " and " + std::to_string(data.num_classes()));
  }
  return cfg;
}

namespace {

std::string policy_name(cicids::NonFinitePolicy p) { return p == cicids::NonFinitePolicy::kDrop ? "drop" : "clamp"; }

cicids::NonFinitePolicy parse_policy(const std::string& s) {
  if (s == "drop") return cicids::NonFinitePolicy::kDrop;
  if (s == "clamp") return cicids::NonFinitePolicy::kClamp;
  throw ConfigError("nonfinite must be 'drop' or 'clamp', got '" + s + "'");
}

template <typename Fn>
void for_keys(const json& j, const char* section, Fn&& fn) {
  if (!j.is_object()) throw ConfigError(std::string(section) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (!fn(key, value)) throw ConfigError(std::string("unknown key '") + key + "' in " + section);
    } catch (const json::exception& e) {
      throw ConfigError(std::string(section) + "." + key + ": " + e.what());
    }
  }
}

}  // namespace

json RunConfig::to_json() const {
  json train_j = train.to_json();
  train_j.erase("variant");
  train_j.erase("skd_enabled");
  train_j["lambda"] = lambda ? json(*lambda) : json(nullptr);
  json j = {{"dataset", dataset_name(dataset)},
            {"input", input},
            {"archive", archive},
            {"model", model},
            {"out_dir", out_dir},
            {"variant", variant},
            {"skd", skd ? json(*skd) : json(nullptr)},
            {"train", train_j},
            {"ingest",
             {{"train_fraction", ingest.train_fraction},
              {"subsample", ingest.subsample},
              {"nonfinite", policy_name(ingest.nonfinite)}}},
            {"model_config", model_config ? model_config_to_json(*model_config) : json(nullptr)}};
  if (dataset == DatasetKind::kSynthetic) {
    j["synthetic"] = {{"geometry", {synthetic.geometry.channels, synthetic.geometry.height, synthetic.geometry.width}},
                      {"num_classes", synthetic.num_classes},
                      {"train_samples", synthetic.train_samples},
                      {"test_samples", synthetic.test_samples},
                      {"noise", synthetic.noise}};
  }
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  for_keys(j, "config", [&](const std::string& key, const json& v) {
    if (key == "dataset") c.dataset = parse_dataset(v.get<std::string>());
    else if (key == "input") c.input = v.get<std::string>();
    else if (key == "archive") c.archive = v.get<std::string>();
    else if (key == "model") c.model = v.get<std::string>();
    else if (key == "out_dir") c.out_dir = v.get<std::string>();
    else if (key == "variant") c.variant = v.get<std::string>();
    else if (key == "skd") c.skd = v.is_null() ? std::nullopt : std::optional(v.get<bool>());
    else if (key == "train") {
      json t = v;
      if (t.contains("lambda")) {
        const auto& l = t.at("lambda");
        c.lambda = l.is_null() ? std::nullopt : std::optional(l.get<double>());
        t.erase("lambda");
      }
      if (t.contains("variant") || t.contains("skd_enabled")) {
        throw ConfigError("set 'variant' and 'skd' at the top level of the config, not under 'train'");
      }
      c.train = TrainConfig::from_json(t);
    } else if (key == "ingest") {
      for_keys(v, "ingest", [&](const std::string& k, const json& iv) {
        if (k == "train_fraction") c.ingest.train_fraction = iv.get<double>();
        else if (k == "subsample") c.ingest.subsample = iv.get<double>();
        else if (k == "nonfinite") c.ingest.nonfinite = parse_policy(iv.get<std::string>());
        else return false;
        return true;
      });
    } else if (key == "synthetic") {
      for_keys(v, "synthetic", [&](const std::string& k, const json& sv) {
        if (k == "geometry") {
          const auto g = sv.get<std::vector<std::size_t>>();
          if (g.size() != 3) throw ConfigError("synthetic.geometry needs [C, H, W]");
          c.synthetic.geometry = {g[0], g[1], g[2]};
        } else if (k == "num_classes") c.synthetic.num_classes = sv.get<std::size_t>();
        else if (k == "train_samples") c.synthetic.train_samples = sv.get<std::size_t>();
        else if (k == "test_samples") c.synthetic.test_samples = sv.get<std::size_t>();
        else if (k == "noise") c.synthetic.noise = sv.get<double>();
        else return false;
        return true;
      });
    } else if (key == "model_config") {
      if (v.is_null()) c.model_config.reset();
      else c.model_config = model_config_from_json(v);
    } else {
      return false;
    }
    return true;
  });
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return RunConfig::from_json(j);
}

}  // namespace lnskd
