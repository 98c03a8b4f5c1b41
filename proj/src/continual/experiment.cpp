// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/continual/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lecc/error.hpp"
#include "lecc/nn/rng.hpp"

namespace lecc::continual {

using nlohmann::json;

namespace {

std::vector<ClassId> truths(std::span<const Sample> samples) {
  std::vector<ClassId> t;
  for (const auto& s : samples) t.push_back(s.label);
  return t;
}

double subset_f1(std::span<const Sample> test, std::span<const ClassId> preds) {
  return truth_macro_f1(truths(test), preds);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::io, "cannot write " + path.string());
  f << text;
}

json confusion_json(const ConfusionMatrix& cm) { return {{"labels", cm.labels}, {"counts", cm.counts}}; }

ConfusionMatrix confusion_from(const json& j) {
  ConfusionMatrix cm;
  cm.labels = j.at("labels").get<std::vector<ClassId>>();
  cm.counts = j.at("counts").get<std::vector<std::vector<std::uint64_t>>>();
  return cm;
}

}  // namespace

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

RoundSamples round_samples(const data::DatasetBundle& data, std::span<const data::FlowRecord> train,
                           std::span<const data::FlowRecord> test, const data::RoundSchedule& schedule) {
  const auto parts = data::partition_rounds({train.begin(), train.end()}, {test.begin(), test.end()}, schedule);
  RoundSamples rs;
  for (std::size_t r = 0; r < parts.size(); ++r) {
    rs.train.push_back(encode_samples(parts[r].train, data.codec, data.vocab, data.max_len));
    rs.test.push_back(encode_samples(parts[r].test, data.codec, data.vocab, data.max_len));
    std::set<ClassId> ids;
    for (const auto& name : schedule.round(r))
      if (data.codec.contains(name)) ids.insert(data.codec.encode(name));
    rs.classes.emplace_back(ids.begin(), ids.end());
  }
  return rs;
}

std::vector<Sample> rehearsal_samples(const RoundSamples& rounds, std::size_t round, double fraction,
                                      std::uint64_t seed) {
  std::vector<Sample> out;
  if (fraction <= 0.0) return out;
  nn::Rng rng(nn::derive_seed(seed, 0x5245ull + round));
  for (std::size_t q = 0; q < round && q < rounds.train.size(); ++q) {
    std::map<ClassId, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < rounds.train[q].size(); ++i) by_class[rounds.train[q][i].label].push_back(i);
    for (auto& [cls, idx] : by_class) {
      const auto want = std::max<std::size_t>(1, std::llround(fraction * double(idx.size())));
      rng.shuffle(idx.begin(), idx.end());
      idx.resize(std::min(want, idx.size()));
      std::sort(idx.begin(), idx.end());
      for (std::size_t i : idx) out.push_back(rounds.train[q][i]);
    }
  }
  return out;
}

std::vector<data::FlowRecord> held_out_records(const data::DatasetBundle& data) {
  std::vector<char> used(data.records.size(), 0);
  for (std::size_t i : data.train) used[i] = 1;
  for (std::size_t i : data.test) used[i] = 1;
  std::vector<data::FlowRecord> out;
  for (std::size_t i = 0; i < data.records.size(); ++i)
    if (!used[i]) out.push_back(data.records[i]);
  return out;
}

model::Backbone prepare_backbone(const data::DatasetBundle& data, const ExperimentConfig& config,
                                 std::span<const data::FlowRecord> pool, std::span<const Sample> round0) {
  model::BackboneConfig bc = model::backbone_preset(config.backbone);
  bc.vocab_size = data.vocab.size();
  bc.max_len = data.max_len;
  bc.seed = config.train.seed;
  model::Backbone backbone = model::init_backbone(bc);
  const PretrainSpec& ps = config.pretrain;
  const std::uint64_t seed = nn::derive_seed(config.train.seed, 0x5054ull);
  if (ps.objective == "none") {
    // Nothing to do: rounds start from the random initialization.
  } else if (ps.objective == "round0") {
    pretrain_backbone(backbone, round0, ps, seed);
  } else if (ps.objective == "binary" || ps.objective == "masked") {
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    nn::Rng rng(nn::derive_seed(seed, 7));
    rng.shuffle(idx.begin(), idx.end());
    if (idx.size() > ps.pool_limit) idx.resize(ps.pool_limit);
    std::sort(idx.begin(), idx.end());
    std::vector<Sample> samples;
    for (std::size_t i : idx) {
      samples.push_back(Sample{data::tokenize(data::textualize(pool[i]), data.vocab, data.max_len),
                               pool[i].attack_label ? 1u : 0u});
    }
    if (samples.empty()) fail(Errc::data, "no held-out records left for pretraining");
    if (ps.objective == "binary") {
      pretrain_backbone(backbone, samples, ps, seed);
    } else {
      std::vector<std::vector<data::TokenId>> seqs;
      for (auto& s : samples) seqs.push_back(std::move(s.ids));
      pretrain_masked(backbone, seqs, ps, seed);
    }
  } else {
    fail(Errc::config, "unknown pretraining objective '" + ps.objective + "'");
  }
  backbone.set_frozen(false);
  return backbone;
}

std::vector<ForgettingEntry> forgetting_from_predictions(std::span<const Sample> cumulative_test,
                                                         std::span<const std::size_t> offsets,
                                                         std::span<const std::vector<ClassId>> predictions,
                                                         std::uint32_t current) {
  std::vector<ForgettingEntry> out;
  for (std::uint32_t q = 0; q < current; ++q) {
    const std::size_t begin = offsets[q], end = offsets[q + 1];
    const auto test = cumulative_test.subspan(begin, end - begin);
    const double before = subset_f1(test, std::span(predictions[q]).subspan(begin, end - begin));
    const double after = subset_f1(test, std::span(predictions[current]).subspan(begin, end - begin));
    out.push_back(ForgettingEntry{q, current, before, after});
  }
  return out;
}

ExperimentResult run_experiment(const data::DatasetBundle& data, const ExperimentConfig& config,
                                model::Backbone backbone) {
  config.train.validate();
  const auto train = data.train_records();
  const auto test = data.test_records();
  const RoundSamples rounds = round_samples(data, train, test, data.schedule);

  ExperimentResult res;
  res.report.model = config.backbone;
  res.report.mode = config.train.mode;
  res.report.seed = config.train.seed;
  res.report.class_names = data.codec.names();
  backbone.set_frozen(config.train.mode == Mode::lora);

  std::vector<Sample> cumulative;
  std::vector<std::size_t> offsets{0};
  std::vector<std::vector<ClassId>> preds_after;
  LogitCache cache;
  for (std::size_t r = 0; r < rounds.train.size(); ++r) {
    RoundInput in;
    in.round_id = static_cast<std::uint32_t>(r);
    in.new_classes = rounds.classes[r];
    in.train = rounds.train[r];
    const auto replay = rehearsal_samples(rounds, r, config.train.rehearsal_fraction, config.train.seed);
    in.train.insert(in.train.end(), replay.begin(), replay.end());
    cumulative.insert(cumulative.end(), rounds.test[r].begin(), rounds.test[r].end());
    offsets.push_back(cumulative.size());
    in.test = cumulative;

    RoundOutcome outcome = train_round(backbone, in, config.train, config.lora, res.state, &cache);
    const EpochRecord& last = outcome.epochs.back();
    res.report.rounds.push_back(RoundSummary{in.round_id, res.state.known, last.metrics.accuracy, last.metrics.f1});
    res.report.epochs.insert(res.report.epochs.end(), outcome.epochs.begin(), outcome.epochs.end());
    preds_after.push_back(std::move(outcome.predictions));
    const auto entries = forgetting_from_predictions(cumulative, offsets, preds_after, in.round_id);
    res.report.forgetting.entries.insert(res.report.forgetting.entries.end(), entries.begin(), entries.end());
  }
  res.report.backbone_fingerprint = model::backbone_fingerprint(backbone);
  res.backbone = std::move(backbone);
  return res;
}

std::string metrics_csv(const ExperimentReport& report, std::uint32_t round) {
  std::string out = "round,epoch,loss,accuracy,precision,recall,f1\n";
  for (const auto& e : report.epochs) {
    if (e.round != round) continue;
    out += std::to_string(e.round) + "," + std::to_string(e.epoch) + "," + format_metric(e.loss) + "," +
           format_metric(e.metrics.accuracy) + "," + format_metric(e.metrics.precision) + "," +
           format_metric(e.metrics.recall) + "," + format_metric(e.metrics.f1) + "\n";
  }
  return out;
}

std::string trend_csv(std::span<const ExperimentReport> reports) {
  std::string out = "round,model,mode,f1\n";
  for (const auto& rep : reports) {
    for (const auto& r : rep.rounds) {
      out += std::to_string(r.round) + "," + rep.model + "," + mode_name(rep.mode) + "," + format_metric(r.f1) + "\n";
    }
  }
  return out;
}

std::string trend_json(std::span<const ExperimentReport> reports) {
  json arr = json::array();
  for (const auto& rep : reports) {
    for (const auto& r : rep.rounds) {
      arr.push_back({{"round", r.round},
                     {"model", rep.model},
                     {"mode", mode_name(rep.mode)},
                     {"f1", std::stod(format_metric(r.f1))}});
    }
  }
  return arr.dump(1) + "\n";
}

std::string report_to_json(const ExperimentReport& report) {
  json j;
  j["format"] = "lecc-experiment-report";
  j["version"] = 1;
  j["model"] = report.model;
  j["mode"] = mode_name(report.mode);
  j["seed"] = report.seed;
  j["classes"] = report.class_names;
  j["backbone_fingerprint"] = report.backbone_fingerprint;
  json epochs = json::array();
  for (const auto& e : report.epochs) {
    epochs.push_back({{"round", e.round},
                      {"epoch", e.epoch},
                      {"loss", e.loss},
                      {"accuracy", e.metrics.accuracy},
                      {"precision", e.metrics.precision},
                      {"recall", e.metrics.recall},
                      {"f1", e.metrics.f1},
                      {"confusion", confusion_json(e.confusion)}});
  }
  j["epochs"] = epochs;
  json rounds = json::array();
  for (const auto& r : report.rounds) {
    rounds.push_back({{"round", r.round}, {"known", r.known}, {"accuracy", r.accuracy}, {"f1", r.f1}});
  }
  j["rounds"] = rounds;
  json forgetting = json::array();
  for (const auto& f : report.forgetting.entries) {
    forgetting.push_back({{"earlier_round", f.earlier_round},
                          {"current_round", f.current_round},
                          {"f1_before", f.f1_before},
                          {"f1_after", f.f1_after}});
  }
  j["forgetting"] = forgetting;
  return j.dump(1) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
  ExperimentReport rep;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "lecc-experiment-report") fail(Errc::format, "not an experiment report");
    rep.model = j.at("model").get<std::string>();
    rep.mode = parse_mode(j.at("mode").get<std::string>());
    rep.seed = j.at("seed").get<std::uint64_t>();
    rep.class_names = j.at("classes").get<std::vector<std::string>>();
    rep.backbone_fingerprint = j.at("backbone_fingerprint").get<std::uint32_t>();
    for (const auto& e : j.at("epochs")) {
      EpochRecord rec;
      rec.round = e.at("round").get<std::uint32_t>();
      rec.epoch = e.at("epoch").get<std::uint32_t>();
      rec.loss = e.at("loss").get<double>();
      rec.metrics.accuracy = e.at("accuracy").get<double>();
      rec.metrics.precision = e.at("precision").get<double>();
      rec.metrics.recall = e.at("recall").get<double>();
      rec.metrics.f1 = e.at("f1").get<double>();
      rec.confusion = confusion_from(e.at("confusion"));
      rep.epochs.push_back(std::move(rec));
    }
    for (const auto& r : j.at("rounds")) {
      rep.rounds.push_back(RoundSummary{r.at("round").get<std::uint32_t>(), r.at("known").get<std::vector<ClassId>>(),
                                        r.at("accuracy").get<double>(), r.at("f1").get<double>()});
    }
    for (const auto& f : j.at("forgetting")) {
      rep.forgetting.entries.push_back(ForgettingEntry{f.at("earlier_round").get<std::uint32_t>(),
                                                       f.at("current_round").get<std::uint32_t>(),
                                                       f.at("f1_before").get<double>(),
                                                       f.at("f1_after").get<double>()});
    }
  } catch (const json::exception& e) {
    fail(Errc::format, std::string("experiment report: ") + e.what());
  }
  return rep;
}

void write_experiment(const std::filesystem::path& dir, const ExperimentReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& r : report.rounds) {
    write_text(dir / ("metrics_round" + std::to_string(r.round) + ".csv"), metrics_csv(report, r.round));
  }
  write_text(dir / "report.json", report_to_json(report));
}

ExperimentReport read_experiment(const std::filesystem::path& dir) {
  return report_from_json(read_text(dir / "report.json"));
}

}  // namespace lecc::continual
