// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/data/bundle.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lecc/error.hpp"
#include "lecc/nn/rng.hpp"

namespace lecc::data {

using nlohmann::json;

namespace {

constexpr int kBundleVersion = 1;

std::vector<FlowRecord> load_source(const SourceInfo& src, CleaningReport* report) {
  auto records = load_csv(src.path, {}, report);
  if (src.aliases == "ton") {
    apply_label_aliases(records, ton_label_aliases());
  } else if (src.aliases == "none") {
    apply_label_aliases(records, {});
  } else {
    fail(Errc::config, "unknown alias table " + src.aliases);
  }
  return records;
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.is_absolute() || std::filesystem::exists(p) || base.empty()) return p;
  return base / p;
}

}  // namespace

std::vector<FlowRecord> DatasetBundle::train_records() const {
  std::vector<FlowRecord> out;
  out.reserve(train.size());
  for (std::size_t i : train) out.push_back(records.at(i));
  return out;
}

std::vector<FlowRecord> DatasetBundle::test_records() const {
  std::vector<FlowRecord> out;
  out.reserve(test.size());
  for (std::size_t i : test) out.push_back(records.at(i));
  return out;
}

std::pair<std::size_t, std::size_t> DatasetBundle::source_range(std::size_t source) const {
  std::size_t begin = 0;
  for (std::size_t s = 0; s < source; ++s) begin += sources.at(s).record_count;
  return {begin, begin + sources.at(source).record_count};
}

DatasetBundle prepare_dataset(const PrepareOptions& options) {
  if (options.csv_paths.empty()) fail(Errc::config, "no CSV inputs given");
  DatasetBundle bundle;
  bundle.seed = options.seed;
  bundle.preset = options.preset;
  bundle.max_len = options.max_len;
  bundle.schedule = parse_schedule(options.schedule);
  const auto scheduled = bundle.schedule.all_classes();
  const std::set<std::string> scheduled_set(scheduled.begin(), scheduled.end());

  std::set<std::string> class_names;
  for (std::size_t s = 0; s < options.csv_paths.size(); ++s) {
    SourceInfo src;
    src.path = options.csv_paths[s];
    src.aliases = s < options.aliases.size() ? options.aliases[s] : "none";
    auto records = load_source(src, &src.cleaning);
    if (records.empty()) fail(Errc::schema, src.path.string() + ": no data rows");
    if (src.cleaning.no_features_left) {
      fail(Errc::schema, src.path.string() + ": every feature column contains nulls");
    }
    src.record_count = records.size();

    const std::size_t offset = bundle.records.size();
    std::map<std::string, std::size_t> present;
    for (const auto& r : records) {
      class_names.insert(r.attack_type);
      ++present[r.attack_type];
    }

    const std::uint64_t src_seed = nn::derive_seed(options.seed, s);
    IndexSplit split;
    if (options.preset == "fraction") {
      Indices subset;
      for (std::size_t i = 0; i < records.size(); ++i)
        if (scheduled_set.contains(records[i].attack_type)) subset.push_back(i);
      if (subset.empty()) fail(Errc::schedule, src.path.string() + ": no scheduled classes present");
      split = split_indices(records, options.train_fraction, src_seed, subset);
    } else {
      const FewShotPreset& preset = few_shot_preset(options.preset);
      std::map<std::string, std::size_t> totals, trains;
      for (const auto& [name, budget] : preset) {
        if (!present.contains(name) || !scheduled_set.contains(name)) continue;
        totals[name] = budget.total();
        trains[name] = budget.train;
      }
      if (totals.empty()) fail(Errc::schedule, src.path.string() + ": no preset classes present");
      const Indices sample = few_shot_sample(records, totals, nn::derive_seed(src_seed, 1));
      split = split_indices_by_count(records, trains, nn::derive_seed(src_seed, 2), sample);
    }
    for (std::size_t i : split.train) bundle.train.push_back(offset + i);
    for (std::size_t i : split.test) bundle.test.push_back(offset + i);
    bundle.records.insert(bundle.records.end(), std::make_move_iterator(records.begin()),
                          std::make_move_iterator(records.end()));
    bundle.sources.push_back(std::move(src));
  }

  bundle.codec = LabelCodec(std::vector<std::string>(class_names.begin(), class_names.end()));
  std::vector<std::string> texts;
  texts.reserve(bundle.train.size());
  for (std::size_t i : bundle.train) texts.push_back(textualize(bundle.records[i]));
  bundle.vocab = build_vocab(texts);
  return bundle;
}

std::string bundle_to_json(const DatasetBundle& bundle) {
  json j;
  j["format"] = "lecc-dataset-bundle";
  j["version"] = kBundleVersion;
  j["seed"] = bundle.seed;
  j["preset"] = bundle.preset;
  j["max_len"] = bundle.max_len;
  j["schedule"] = bundle.schedule.rounds();
  json sources = json::array();
  for (const auto& s : bundle.sources) {
    sources.push_back({{"path", s.path.string()},
                       {"aliases", s.aliases},
                       {"records", s.record_count},
                       {"features", s.cleaning.kept_columns.size()},
                       {"dropped_columns", s.cleaning.dropped_columns}});
  }
  j["sources"] = sources;
  j["codec"] = bundle.codec.names();
  j["vocab"] = bundle.vocab.tokens();
  j["train"] = bundle.train;
  j["test"] = bundle.test;
  return j.dump(1) + "\n";
}

DatasetBundle bundle_from_json(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(Errc::format, std::string("dataset bundle: ") + e.what());
  }
  if (j.value("format", "") != "lecc-dataset-bundle" || j.value("version", 0) != kBundleVersion) {
    fail(Errc::format, "not a version-1 dataset bundle");
  }
  DatasetBundle b;
  try {
    b.seed = j.at("seed").get<std::uint64_t>();
    b.preset = j.at("preset").get<std::string>();
    b.max_len = j.at("max_len").get<std::size_t>();
    b.schedule = RoundSchedule(j.at("schedule").get<std::vector<std::vector<std::string>>>());
    b.codec = LabelCodec(j.at("codec").get<std::vector<std::string>>());
    b.vocab = TokenVocab(j.at("vocab").get<std::vector<std::string>>());
    b.train = j.at("train").get<Indices>();
    b.test = j.at("test").get<Indices>();
    for (const auto& s : j.at("sources")) {
      SourceInfo src;
      src.path = resolve(s.at("path").get<std::string>(), base_dir);
      src.aliases = s.at("aliases").get<std::string>();
      auto records = load_source(src, &src.cleaning);
      if (records.size() != s.at("records").get<std::size_t>() ||
          src.cleaning.kept_columns.size() != s.at("features").get<std::size_t>()) {
        fail(Errc::consistency, src.path.string() + " changed since the bundle was prepared");
      }
      src.record_count = records.size();
      b.records.insert(b.records.end(), records.begin(), records.end());
      b.sources.push_back(std::move(src));
    }
  } catch (const json::exception& e) {
    fail(Errc::format, std::string("dataset bundle: ") + e.what());
  }
  for (std::size_t i : b.train)
    if (i >= b.records.size()) fail(Errc::format, "dataset bundle: train index out of range");
  for (std::size_t i : b.test)
    if (i >= b.records.size()) fail(Errc::format, "dataset bundle: test index out of range");
  return b;
}

void save_bundle(const std::filesystem::path& path, const DatasetBundle& bundle) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::io, "cannot write " + path.string());
  f << bundle_to_json(bundle);
}

DatasetBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return bundle_from_json(buf.str(), path.parent_path());
}

std::string cleaning_report_json(const DatasetBundle& bundle) {
  json j = json::array();
  for (const auto& s : bundle.sources) {
    j.push_back({{"path", s.path.string()},
                 {"records", s.record_count},
                 {"features", s.cleaning.kept_columns.size()},
                 {"dropped_columns", s.cleaning.dropped_columns},
                 {"no_features_left", s.cleaning.no_features_left}});
  }
  return j.dump(1) + "\n";
}

}  // namespace lecc::data
