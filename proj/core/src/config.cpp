#include "adpo/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace adpo {

using nlohmann::json;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto parse_int = [&](const std::string& s) -> std::uint64_t {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigValueError("invalid seed value: '" + s + "'");
    }
  };
  const auto range_pos = text.find("..");
  if (range_pos != std::string::npos) {
    const std::uint64_t a = parse_int(text.substr(0, range_pos));
    const std::uint64_t b = parse_int(text.substr(range_pos + 2));
    if (b < a) throw ConfigValueError("seed range '" + text + "' is empty");
    for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) seeds.push_back(parse_int(item));
  }
  if (seeds.empty()) throw ConfigValueError("empty seed list: '" + text + "'");
  return seeds;
}

std::vector<std::string> expand_scenarios(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  const auto push_family = [&](NoiseFamily f) {
    for (Severity s : {Severity::light, Severity::medium, Severity::heavy}) {
      out.push_back(ScenarioSpec::make(f, s).id());
    }
  };
  for (const std::string& item : items) {
    if (item == "all") {
      for (const auto& s : all_scenarios()) out.push_back(s.id());
      continue;
    }
    bool family = false;
    for (NoiseFamily f : {NoiseFamily::heavy_noise, NoiseFamily::dist_shift,
                          NoiseFamily::adversarial, NoiseFamily::heavy_tailed}) {
      if (item == to_string(f)) {
        push_family(f);
        family = true;
        break;
      }
    }
    if (family) continue;
    out.push_back(ScenarioSpec::parse(item).id());  // validates
  }
  return out;
}

std::vector<std::string> expand_methods(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const std::string& item : items) {
    if (item == "all") {
      for (MethodId m : all_methods()) out.push_back(to_string(m));
      continue;
    }
    out.push_back(to_string(parse_method(item)));  // validates
  }
  return out;
}

std::vector<ScenarioSpec> ExperimentConfig::scenario_specs() const {
  std::vector<ScenarioSpec> out;
  for (const auto& id : scenarios) out.push_back(ScenarioSpec::parse(id));
  return out;
}

std::vector<MethodSpec> ExperimentConfig::method_specs() const {
  std::vector<MethodSpec> out;
  for (const auto& id : methods) {
    MethodSpec m = MethodSpec::make(parse_method(id));
    m.beta = beta;
    m.beta_r = beta_r;
    if (m.listwise()) m.tau = tau;
    if (pretrain_steps) m.anchor.pretrain_steps = *pretrain_steps;
    if (update_period) m.anchor.update_period = *update_period;
    if (anchor_kind && m.anchored()) {
      const std::string& k = *anchor_kind;
      if (k == "fixed") m.anchor.kind = AnchorKind::fixed;
      else if (k == "dynamic") m.anchor.kind = AnchorKind::dynamic;
      else if (k == "random") m.anchor.kind = AnchorKind::random;
      else if (k == "none") m.anchor.kind = AnchorKind::none;
      else throw ConfigValueError("unknown anchor kind: '" + k + "'");
    }
    out.push_back(m);
  }
  return out;
}

namespace {

const std::set<std::string> kKnownKeys = {
    "experiment",  "scenarios",   "methods",      "seeds",       "workers",
    "output_dir",  "strict",      "epochs",       "batch_size",  "scale",
    "learning_rate", "weight_decay", "adam_beta1", "adam_beta2", "n_train",
    "n_test",      "context_dim", "item_dim",     "group_size",  "reward_std", "beta",
    "beta_r",      "tau",         "pretrain_steps", "anchor",    "update_period",
};

const std::set<std::string> kExperiments = {
    "grid", "scale", "temperature", "anchors", "distill", "verify_geometry",
    "single"};

template <class T>
T get_number(const json& j, const std::string& key, T lo, T hi) {
  const auto& v = j.at(key);
  if (!v.is_number()) {
    throw ConfigValueError("key '" + key + "' must be a number");
  }
  const T x = v.get<T>();
  if (x < lo || x > hi) {
    throw ConfigValueError("key '" + key + "' out of range: " + v.dump());
  }
  return x;
}

std::vector<std::string> get_string_list(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  std::vector<std::string> out;
  if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(item);
    }
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigValueError("key '" + key + "' must list strings");
      out.push_back(e.get<std::string>());
    }
  } else {
    throw ConfigValueError("key '" + key + "' must be a string or array");
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigParseError(std::string("malformed config document: ") + e.what());
  }
  if (!j.is_object()) throw ConfigParseError("config root must be a JSON object");

  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!kKnownKeys.count(key)) {
      throw UnknownKeyError("unknown config key: '" + key + "'");
    }
  }

  ExperimentConfig c;
  try {
    if (j.contains("experiment")) {
      c.experiment = j.at("experiment").get<std::string>();
      if (!kExperiments.count(c.experiment)) {
        throw ConfigValueError("unknown experiment: '" + c.experiment + "'");
      }
    }
    if (j.contains("scenarios")) {
      c.scenarios = expand_scenarios(get_string_list(j, "scenarios"));
    }
    if (j.contains("methods")) {
      c.methods = expand_methods(get_string_list(j, "methods"));
    }
    if (j.contains("seeds")) {
      const auto& v = j.at("seeds");
      if (v.is_string()) {
        c.seeds = parse_seed_list(v.get<std::string>());
      } else if (v.is_array()) {
        c.seeds.clear();
        for (const auto& e : v) {
          if (!e.is_number_integer() || e.get<long long>() < 0) {
            throw ConfigValueError("seeds must be non-negative integers");
          }
          c.seeds.push_back(e.get<std::uint64_t>());
        }
        if (c.seeds.empty()) throw ConfigValueError("seeds list is empty");
      } else {
        throw ConfigValueError("seeds must be an array or 'a..b' string");
      }
    }
    if (j.contains("workers")) c.workers = get_number<int>(j, "workers", 1, 4096);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("strict")) {
      if (!j.at("strict").is_boolean()) {
        throw ConfigValueError("key 'strict' must be a boolean");
      }
      c.strict = j.at("strict").get<bool>();
    }
    if (j.contains("epochs")) c.train.epochs = get_number<int>(j, "epochs", 1, 1000000);
    if (j.contains("batch_size")) c.train.batch_size = get_number<int>(j, "batch_size", 1, 1000000);
    if (j.contains("scale")) c.train.scale = parse_scale(j.at("scale").get<std::string>());
    if (j.contains("learning_rate")) c.train.lr = get_number<double>(j, "learning_rate", 1e-12, 1e6);
    if (j.contains("weight_decay")) c.train.weight_decay = get_number<double>(j, "weight_decay", 0.0, 1e6);
    if (j.contains("adam_beta1")) c.train.adam_beta1 = get_number<double>(j, "adam_beta1", 0.0, 0.9999999);
    if (j.contains("adam_beta2")) c.train.adam_beta2 = get_number<double>(j, "adam_beta2", 0.0, 0.9999999);
    if (j.contains("n_train")) c.train.n_train = get_number<int>(j, "n_train", 1, 100000000);
    if (j.contains("n_test")) c.train.n_test = get_number<int>(j, "n_test", 1, 100000000);
    if (j.contains("context_dim")) c.train.world.context_dim = get_number<int>(j, "context_dim", 1, 100000);
    if (j.contains("item_dim")) c.train.world.item_dim = get_number<int>(j, "item_dim", 1, 100000);
    if (j.contains("group_size")) c.train.world.group_size = get_number<int>(j, "group_size", 2, 100000);
    if (j.contains("reward_std")) c.train.world.reward_std = get_number<double>(j, "reward_std", 0.0, 1e9);
    if (j.contains("beta")) c.beta = get_number<double>(j, "beta", 1e-12, 1e6);
    if (j.contains("beta_r")) c.beta_r = get_number<double>(j, "beta_r", 1e-12, 1e6);
    if (j.contains("tau")) c.tau = get_number<double>(j, "tau", 1e-12, 1e6);
    if (j.contains("pretrain_steps")) c.pretrain_steps = get_number<int>(j, "pretrain_steps", 0, 100000000);
    if (j.contains("anchor")) c.anchor_kind = j.at("anchor").get<std::string>();
    if (j.contains("update_period")) c.update_period = get_number<int>(j, "update_period", 1, 100000000);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigValueError(e.what());
  } catch (const json::exception& e) {
    throw ConfigValueError(std::string("bad config value: ") + e.what());
  }

  if (c.scenarios.empty()) c.scenarios = expand_scenarios({"all"});
  if (c.methods.empty()) c.methods = expand_methods({"all"});
  if (c.anchor_kind) {
    const std::set<std::string> kinds = {"fixed", "dynamic", "none", "random"};
    if (!kinds.count(*c.anchor_kind)) {
      throw ConfigValueError("unknown anchor kind: '" + *c.anchor_kind + "'");
    }
  }
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string emit_config(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["scenarios"] = c.scenarios;
  j["methods"] = c.methods;
  j["seeds"] = c.seeds;
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir;
  j["strict"] = c.strict;
  j["epochs"] = c.train.epochs;
  j["batch_size"] = c.train.batch_size;
  j["scale"] = to_string(c.train.scale);
  j["learning_rate"] = c.train.lr;
  j["weight_decay"] = c.train.weight_decay;
  j["adam_beta1"] = c.train.adam_beta1;
  j["adam_beta2"] = c.train.adam_beta2;
  j["n_train"] = c.train.n_train;
  j["n_test"] = c.train.n_test;
  j["context_dim"] = c.train.world.context_dim;
  j["item_dim"] = c.train.world.item_dim;
  j["group_size"] = c.train.world.group_size;
  j["reward_std"] = c.train.world.reward_std;
  j["beta"] = c.beta;
  j["beta_r"] = c.beta_r;
  j["tau"] = c.tau;
  if (c.pretrain_steps) j["pretrain_steps"] = *c.pretrain_steps;
  if (c.anchor_kind) j["anchor"] = *c.anchor_kind;
  if (c.update_period) j["update_period"] = *c.update_period;
  return j.dump(2) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  return fnv1a(emit_config(config));
}

}  // namespace adpo
