// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "lecc/error.hpp"

namespace lecc::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(trim(part));
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    fail(Errc::config, "key '" + key + "': '" + v + "' is not a valid number");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  fail(Errc::config, "key '" + key + "': '" + v + "' is not a valid number");
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(Errc::config, "key '" + key + "': '" + v + "' is not a boolean");
}

std::filesystem::path existing(const std::filesystem::path& base, const std::string& v) {
  std::filesystem::path p(v);
  if (p.is_relative() && !base.empty()) p = base / p;
  if (!std::filesystem::exists(p)) fail(Errc::io, "referenced file does not exist: " + p.string());
  return p;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

continual::ExperimentConfig RunConfig::for_mode(continual::Mode mode) const {
  continual::ExperimentConfig c = experiment;
  c.train.mode = mode;
  c.train.learning_rate = mode == continual::Mode::lora ? lr_lora : lr_full;
  c.train.seed = seed;
  return c;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "dataset",        "csv",           "aliases",         "preset",          "schedule",
      "train_fraction", "max_len",       "backbone",        "backbone_file",   "modes",
      "lora_rank",      "lora_alpha",    "lora_targets",    "epochs",          "batch_size",
      "lr_full",        "lr_lora",       "weight_decay",    "rehearsal",       "warm_start",
      "checkpoints",    "pretrain",      "pretrain_epochs", "pretrain_lr",     "pretrain_pool",
      "seed",           "out",           "devices",         "device_schedules", "gate_epsilon",
      "gate_holdout"};
  return keys;
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig c;
  // Experiment defaults chosen for this artifact.
  c.experiment.pretrain.objective = "round0";
  c.experiment.pretrain.epochs = 15;
  bool seen_seed = false;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  const auto& keys = config_keys();
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::config, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string v = trim(std::string_view(line).substr(eq + 1));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      fail(Errc::config, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (seen.count(key)) fail(Errc::config, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    seen[key] = lineno;
    if (v.empty()) fail(Errc::config, "line " + std::to_string(lineno) + ": empty value for '" + key + "'");

    auto& train = c.experiment.train;
    auto& pre = c.experiment.pretrain;
    if (key == "dataset") {
      c.dataset = existing(base_dir, v);
    } else if (key == "csv") {
      for (const auto& p : split(v, ',')) c.prepare.csv_paths.push_back(existing(base_dir, p));
    } else if (key == "aliases") {
      c.prepare.aliases = split(v, ',');
    } else if (key == "preset") {
      c.prepare.preset = v;
    } else if (key == "schedule") {
      data::parse_schedule(v);
      c.prepare.schedule = v;
    } else if (key == "train_fraction") {
      c.prepare.train_fraction = parse_real(key, v);
    } else if (key == "max_len") {
      c.prepare.max_len = parse_number<std::size_t>(key, v);
    } else if (key == "backbone") {
      model::backbone_preset(v);
      c.experiment.backbone = v;
    } else if (key == "backbone_file") {
      c.backbone_file = existing(base_dir, v);
    } else if (key == "modes") {
      c.modes.clear();
      for (const auto& m : split(v, ',')) c.modes.push_back(continual::parse_mode(m));
      if (c.modes.empty()) fail(Errc::config, "modes must list at least one mode");
    } else if (key == "lora_rank") {
      c.experiment.lora.rank = parse_number<std::size_t>(key, v);
    } else if (key == "lora_alpha") {
      c.experiment.lora.alpha = static_cast<float>(parse_real(key, v));
    } else if (key == "lora_targets") {
      c.experiment.lora.targets.clear();
      for (const auto& t : split(v, ',')) {
        if (t == "q" || t == "query") {
          c.experiment.lora.targets.push_back(lora::Target::query);
        } else if (t == "v" || t == "value") {
          c.experiment.lora.targets.push_back(lora::Target::value);
        } else {
          fail(Errc::config, "unknown LoRA target '" + t + "'");
        }
      }
    } else if (key == "epochs") {
      train.epochs = parse_number<std::size_t>(key, v);
    } else if (key == "batch_size") {
      train.batch_size = parse_number<std::size_t>(key, v);
    } else if (key == "lr_full") {
      c.lr_full = parse_real(key, v);
    } else if (key == "lr_lora") {
      c.lr_lora = parse_real(key, v);
    } else if (key == "weight_decay") {
      train.weight_decay = parse_real(key, v);
    } else if (key == "rehearsal") {
      train.rehearsal_fraction = parse_real(key, v);
    } else if (key == "warm_start") {
      train.warm_start = parse_bool(key, v);
    } else if (key == "checkpoints") {
      train.checkpoints.clear();
      for (const auto& e : split(v, ',')) train.checkpoints.push_back(parse_number<std::size_t>(key, e));
    } else if (key == "pretrain") {
      pre.objective = v;
    } else if (key == "pretrain_epochs") {
      pre.epochs = parse_number<std::size_t>(key, v);
    } else if (key == "pretrain_lr") {
      pre.learning_rate = parse_real(key, v);
    } else if (key == "pretrain_pool") {
      pre.pool_limit = parse_number<std::size_t>(key, v);
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, v);
      seen_seed = true;
    } else if (key == "out") {
      c.out = v;
      if (c.out.is_relative() && !base_dir.empty()) c.out = base_dir / c.out;
    } else if (key == "devices") {
      c.devices = parse_number<std::size_t>(key, v);
    } else if (key == "device_schedules") {
      coord::parse_device_schedules(v);
      c.device_schedules = v;
    } else if (key == "gate_epsilon") {
      c.gate_epsilon = parse_real(key, v);
    } else if (key == "gate_holdout") {
      c.gate_holdout = parse_number<std::size_t>(key, v);
    }
  }
  if (!seen_seed) fail(Errc::config, "seed is mandatory");
  if (!c.dataset && c.prepare.csv_paths.empty()) fail(Errc::config, "either dataset or csv must be given");
  if (c.dataset && !c.prepare.csv_paths.empty()) fail(Errc::config, "dataset and csv are mutually exclusive");
  c.prepare.seed = c.seed;
  c.experiment.train.seed = c.seed;
  if (c.experiment.pretrain.objective != "none" && c.experiment.pretrain.objective != "round0" &&
      c.experiment.pretrain.objective != "binary" && c.experiment.pretrain.objective != "masked") {
    fail(Errc::config, "unknown pretraining objective '" + c.experiment.pretrain.objective + "'");
  }
  for (const auto mode : c.modes) c.for_mode(mode).train.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::io, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string render_config(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> kv;
  if (c.dataset) {
    kv.emplace_back("dataset", c.dataset->filename().string());
  } else {
    std::vector<std::string> names;
    for (const auto& p : c.prepare.csv_paths) names.push_back(p.filename().string());
    kv.emplace_back("csv", join(names, ','));
    if (!c.prepare.aliases.empty()) kv.emplace_back("aliases", join(c.prepare.aliases, ','));
    kv.emplace_back("preset", c.prepare.preset);
    kv.emplace_back("schedule", c.prepare.schedule);
    kv.emplace_back("train_fraction", fmt(c.prepare.train_fraction));
    kv.emplace_back("max_len", std::to_string(c.prepare.max_len));
  }
  kv.emplace_back("backbone", c.experiment.backbone);
  if (c.backbone_file) kv.emplace_back("backbone_file", c.backbone_file->filename().string());
  std::vector<std::string> modes;
  for (const auto m : c.modes) modes.push_back(continual::mode_name(m));
  kv.emplace_back("modes", join(modes, ','));
  kv.emplace_back("lora_rank", std::to_string(c.experiment.lora.rank));
  kv.emplace_back("lora_alpha", fmt(c.experiment.lora.alpha));
  std::vector<std::string> targets;
  for (const auto t : c.experiment.lora.targets) targets.push_back(t == lora::Target::query ? "q" : "v");
  kv.emplace_back("lora_targets", join(targets, ','));
  const auto& t = c.experiment.train;
  kv.emplace_back("epochs", std::to_string(t.epochs));
  kv.emplace_back("batch_size", std::to_string(t.batch_size));
  kv.emplace_back("lr_full", fmt(c.lr_full));
  kv.emplace_back("lr_lora", fmt(c.lr_lora));
  kv.emplace_back("weight_decay", fmt(t.weight_decay));
  kv.emplace_back("rehearsal", fmt(t.rehearsal_fraction));
  kv.emplace_back("warm_start", t.warm_start ? "true" : "false");
  std::vector<std::string> cps;
  for (const auto e : t.checkpoints) cps.push_back(std::to_string(e));
  kv.emplace_back("checkpoints", join(cps, ','));
  const auto& p = c.experiment.pretrain;
  kv.emplace_back("pretrain", p.objective);
  kv.emplace_back("pretrain_epochs", std::to_string(p.epochs));
  kv.emplace_back("pretrain_lr", fmt(p.learning_rate));
  kv.emplace_back("pretrain_pool", std::to_string(p.pool_limit));
  kv.emplace_back("seed", std::to_string(c.seed));
  kv.emplace_back("devices", std::to_string(c.devices));
  if (c.device_schedules) kv.emplace_back("device_schedules", *c.device_schedules);
  kv.emplace_back("gate_epsilon", fmt(c.gate_epsilon));
  kv.emplace_back("gate_holdout", std::to_string(c.gate_holdout));
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

}  // namespace lecc::cli
