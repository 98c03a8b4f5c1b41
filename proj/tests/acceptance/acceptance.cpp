// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner: one PASS/FAIL line per criterion, tolerances pinned
// below. Usage: lecc_acceptance <path-to-lecc-cli> [criterion numbers...]

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gradcheck.hpp"
#include "lecc/cli/commands.hpp"
#include "lecc/continual/aggregate.hpp"
#include "lecc/coord/wire.hpp"
#include "lecc/error.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"
#include "toy.hpp"

namespace fs = std::filesystem;
using namespace lecc;
using Clock = std::chrono::steady_clock;

namespace {

// ---------------------------------------------------------------- tolerances
constexpr double kGradRelTol = 1e-3;          // 1: analytic vs central difference
constexpr std::size_t kGradSeeds = 20;        // 1: seeds, each with its own shapes
constexpr double kGradSeconds = 30.0;         // 1: runtime bound
constexpr float kMergeTol = 1e-5f;            // 2: merged vs adapter-path logits
constexpr std::size_t kMergeInputs = 100;     // 2: random inputs
constexpr double kMergeSeconds = 10.0;        // 2: runtime bound
constexpr double kLargestRatio = 0.01;        // 3: largest preset footprint
constexpr double kDeskRatio = 0.05;           // 3: desk preset footprint
constexpr double kTrendNoise = 0.02;          // 4: round-over-round slack
constexpr double kForgetDrop = 0.05;          // 5: allowed F1 drop
constexpr double kCrossBeforeSlack = 0.15;    // 6: chance + slack
constexpr double kCrossAfter = 0.80;          // 6: accuracy after exchange
constexpr double kGlobalSeconds = 600.0;      // 6: runtime bound
constexpr std::size_t kAggregationBundles = 1000;  // 7
constexpr std::size_t kMetricSets = 10;            // 8

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- processes

struct Process {
  pid_t pid = -1;
};

Process spawn(const std::vector<std::string>& args, const fs::path& log) {
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  const pid_t pid = fork();
  if (pid < 0) fail(Errc::io, "fork failed");
  if (pid == 0) {
    const int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      ::dup2(fd, 1);
      ::dup2(fd, 2);
      ::close(fd);
    }
    ::execv(argv[0], argv.data());
    _exit(127);
  }
  return Process{pid};
}

int wait_for(Process p) {
  int status = 0;
  ::waitpid(p.pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

int run(const std::vector<std::string>& args, const fs::path& log) { return wait_for(spawn(args, log)); }

std::string slurp_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

/// Relative path → bytes for every regular file under `dir`.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp_text(e.path());
  return out;
}

/// Files that differ between two trees, restricted to names accepted by `keep`.
std::vector<std::string> tree_diff(const fs::path& a, const fs::path& b,
                                   const std::function<bool(const std::string&)>& keep) {
  const auto ta = tree(a), tb = tree(b);
  std::set<std::string> names;
  for (const auto& [k, v] : ta) names.insert(k);
  for (const auto& [k, v] : tb) names.insert(k);
  std::vector<std::string> diff;
  for (const auto& n : names) {
    if (!keep(n)) continue;
    const auto ia = ta.find(n), ib = tb.find(n);
    if (ia == ta.end() || ib == tb.end() || ia->second != ib->second) diff.push_back(n);
  }
  return diff;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

// ---------------------------------------------------------------- fixtures

/// Workspace shared by the criteria: synthetic data and configs.
struct Workspace {
  testing::TempDir dir;
  fs::path cli;
  fs::path full_csv;   // Table-3 scale
  fs::path small_csv;  // fast wire and determinism checks

  explicit Workspace(fs::path cli_path) : cli(std::move(cli_path)) {
    data::SynthOptions o;
    o.schema = data::FlowSchema::edge_iiotset;
    o.classes = data::schema_default_classes(o.schema);
    o.rows_per_class = 400;
    o.seed = 2026;
    full_csv = dir / "edge_full.csv";
    data::write_flow_csv(full_csv, o);
    o.rows_per_class = 50;
    o.seed = 7;
    small_csv = dir / "edge_small.csv";
    data::write_flow_csv(small_csv, o);
  }

  /// Default experiment settings on the Table-3 scale data.
  fs::path full_config(const std::string& name) const {
    const fs::path p = dir / name;
    std::ofstream(p) << "csv = " << full_csv.string() << "\n"
                     << "preset = table3\n"
                     << "schedule = table2\n"
                     << "seed = 42\n"
                     << "pretrain = masked\n"
                     << "pretrain_epochs = 10\n"
                     << "rehearsal = 0.3\n";
    return p;
  }

  /// A few epochs on a small table, for protocol and determinism checks.
  fs::path small_config(const std::string& name, const std::string& extra = {}) const {
    const fs::path p = dir / name;
    std::ofstream(p) << "csv = " << small_csv.string() << "\n"
                     << "preset = fraction\n"
                     << "train_fraction = 0.5\n"
                     << "seed = 9\n"
                     << "epochs = 4\n"
                     << "checkpoints = 2,4\n"
                     << "pretrain_epochs = 4\n"
                     << extra;
    return p;
  }
};

// ---------------------------------------------------------------- criteria

Outcome criterion1() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_layer;
  std::set<std::string> kinds;
  for (std::uint64_t seed = 1; seed <= kGradSeeds; ++seed) {
    for (const auto& g : testing::check_every_layer(seed)) {
      kinds.insert(g.layer);
      if (g.max_rel_error > worst) {
        worst = g.max_rel_error;
        worst_layer = g.layer + "@" + std::to_string(g.seed);
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = worst <= kGradRelTol && secs <= kGradSeconds && kinds.count("lora");
  return {pass, std::to_string(kinds.size()) + " layer kinds x " + std::to_string(kGradSeeds) +
                    " seeds, max rel err " + fmt(worst, 8) + " (" + worst_layer + ") <= " + fmt(kGradRelTol, 4) +
                    ", " + fmt(secs, 2) + " s <= " + fmt(kGradSeconds, 0) + " s"};
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  model::BackboneConfig c = model::backbone_preset("desk");
  c.vocab_size = 300;
  c.max_len = 32;
  const model::Backbone bb = model::init_backbone(c);
  const std::vector<data::ClassId> classes{0, 1, 2, 3, 4};
  lora::LoraAdapter zero = lora::init_adapter({}, bb, 0, classes, 3);
  lora::LoraAdapter trained = zero;
  nn::Rng rng(5);
  for (auto& e : trained.entries) e.b.value = rng.normal_matrix<float>(e.b.value.rows(), e.b.value.cols(), 0.05);
  const model::Backbone merged = lora::merge(trained, bb);
  const auto att_zero = zero.attachment(c.layers);
  const auto att = trained.attachment(c.layers);
  float noop = 0.0f, merge_gap = 0.0f;
  for (std::size_t i = 0; i < kMergeInputs; ++i) {
    const std::size_t len = 2 + rng.index(c.max_len - 2);
    std::vector<data::TokenId> ids{data::kClsId};
    for (std::size_t k = 1; k < len; ++k) ids.push_back(static_cast<data::TokenId>(4 + rng.index(c.vocab_size - 4)));
    noop = std::max(noop, nn::max_abs_diff(model::forward(bb, &att_zero, zero.head, ids),
                                           model::forward(bb, nullptr, zero.head, ids)));
    merge_gap = std::max(merge_gap, nn::max_abs_diff(model::forward(merged, nullptr, trained.head, ids),
                                                     model::forward(bb, &att, trained.head, ids)));
  }
  const double secs = seconds_since(t0);
  const bool pass = noop == 0.0f && merge_gap <= kMergeTol && secs <= kMergeSeconds;
  return {pass, "zero-B max |dlogit| " + fmt(noop, 8) + " (== 0), merged vs adapter " + fmt(merge_gap, 8) +
                    " <= 1e-5 over " + std::to_string(kMergeInputs) + " inputs, " + fmt(secs, 2) + " s"};
}

Outcome criterion3(std::size_t vocab) {
  std::string largest;
  std::size_t largest_count = 0;
  bool counts_ok = true;
  std::map<std::string, double> ratio;
  for (const char* name : {"desk", "distilbert", "distilgpt2", "tinyt5"}) {
    model::BackboneConfig c = model::backbone_preset(name);
    c.vocab_size = vocab;
    const model::Backbone bb = model::init_backbone(c);
    std::size_t by_shape = 0;
    for (const nn::Parameter* p : bb.parameters()) by_shape += p->value.rows() * p->value.cols();
    const std::vector<data::ClassId> cls{0, 1, 2};
    const lora::LoraAdapter ad = lora::init_adapter({}, bb, 0, cls, 1);
    std::size_t ad_shape = 0;
    for (const auto& e : ad.entries) ad_shape += e.a.value.size() + e.b.value.size();
    counts_ok = counts_ok && model::count_params(bb) == by_shape && model::backbone_param_count(c) == by_shape &&
                lora::count_params(ad) == ad_shape &&
                lora::adapter_param_count({}, c.layers, c.width) == ad_shape;
    ratio[name] = lora::footprint_ratio(ad, bb);
    if (by_shape > largest_count) {
      largest_count = by_shape;
      largest = name;
    }
  }
  const bool pass = counts_ok && ratio[largest] < kLargestRatio && ratio["desk"] < kDeskRatio;
  return {pass, "vocab " + std::to_string(vocab) + ": largest preset " + largest + " ratio " +
                    fmt(100 * ratio[largest], 3) + "% < 1%, desk " + fmt(100 * ratio["desk"], 3) +
                    "% < 5%, counts match shapes: " + (counts_ok ? "yes" : "no")};
}

struct LocalRun {
  continual::ExperimentReport lora, full;
};

LocalRun local_run(const Workspace& ws) {
  cli::RunConfig cfg = cli::load_config(ws.full_config("local.cfg"));
  cfg.out = ws.dir / "local";
  cfg.modes = {continual::Mode::full, continual::Mode::lora};
  cli::run_local(cfg);
  return {continual::read_experiment(cfg.out / "lora"), continual::read_experiment(cfg.out / "full")};
}

Outcome criterion4(const LocalRun& r) {
  bool pass = r.lora.rounds.size() == 7 && r.full.rounds.size() == 7;
  std::string series = "lora/full F1:";
  std::vector<std::string> why;
  for (std::size_t i = 0; i < r.lora.rounds.size() && i < r.full.rounds.size(); ++i) {
    const double l = r.lora.rounds[i].f1, f = r.full.rounds[i].f1;
    series += " r" + std::to_string(i) + " " + fmt(l, 3) + "/" + fmt(f, 3);
    if (i >= 1 && l < f) why.push_back("lora<full at r" + std::to_string(i));
    if (i >= 1 && l < r.lora.rounds[i - 1].f1 - kTrendNoise) why.push_back("lora drop at r" + std::to_string(i));
  }
  pass = pass && why.empty();
  return {pass, series + (why.empty() ? "" : " | " + join(why))};
}

Outcome criterion5(const LocalRun& r) {
  double worst = 0.0;
  std::string at;
  for (const auto& e : r.lora.forgetting.entries) {
    if (e.drop() > worst) {
      worst = e.drop();
      at = "round " + std::to_string(e.earlier_round) + " after round " + std::to_string(e.current_round) + " (" +
           fmt(e.f1_before, 3) + " -> " + fmt(e.f1_after, 3) + ")";
    }
  }
  const bool pass = !r.lora.forgetting.entries.empty() && worst <= kForgetDrop;
  return {pass, std::to_string(r.lora.forgetting.entries.size()) + " entries, worst drop " + fmt(worst, 4) +
                    " <= " + fmt(kForgetDrop, 2) + (at.empty() ? "" : " at " + at)};
}

Outcome criterion6(const Workspace& ws) {
  const auto t0 = Clock::now();
  cli::RunConfig cfg = cli::load_config(ws.full_config("global.cfg"));
  cfg.out = ws.dir / "global";
  const coord::GlobalReport rep = cli::run_global(cfg, 2);
  const double secs = seconds_since(t0);
  const double chance = 1.0 / static_cast<double>(rep.class_count);
  bool pass = rep.nodes.size() == 2 && secs <= kGlobalSeconds;
  std::string detail = "chance " + fmt(chance, 4) + ";";
  for (const auto& n : rep.nodes) {
    pass = pass && n.cross_before.accuracy <= chance + kCrossBeforeSlack && n.cross_after.accuracy >= kCrossAfter;
    detail += " node" + std::to_string(n.node) + " cross acc " + fmt(n.cross_before.accuracy, 3) + " -> " +
              fmt(n.cross_after.accuracy, 3) + " (own " + fmt(n.own_before.accuracy, 3) + " -> " +
              fmt(n.own_after.accuracy, 3) + ");";
  }
  return {pass, detail + " bounds: before <= chance+0.15, after >= 0.80; " + fmt(secs, 1) + " s <= 600 s"};
}

Outcome criterion7() {
  model::Backbone bb = testing::toy_backbone();
  bb.set_frozen(true);
  const std::uint32_t fp = model::backbone_fingerprint(bb);
  nn::Rng rng(77);
  std::size_t agree = 0;
  for (std::size_t trial = 0; trial < kAggregationBundles; ++trial) {
    lora::AdapterBundle bundle;
    bundle.backbone_fingerprint = fp;
    const std::size_t n = 1 + rng.index(4);
    std::uint32_t round = 0;
    for (std::size_t a = 0; a < n; ++a) {
      round += static_cast<std::uint32_t>(1 + rng.index(2));
      std::set<data::ClassId> cls;
      const std::size_t width = 1 + rng.index(5);
      while (cls.size() < width) cls.insert(static_cast<data::ClassId>(rng.index(8)));
      const std::vector<data::ClassId> classes(cls.begin(), cls.end());
      lora::LoraAdapter ad = lora::init_adapter(testing::toy_lora(), bb, round, classes, rng.index(1u << 30));
      for (auto& e : ad.entries) e.b.value = rng.normal_matrix<float>(e.b.value.rows(), e.b.value.cols(), 0.3);
      ad.head.weight.value = rng.normal_matrix<float>(ad.head.weight.value.rows(), ad.head.weight.value.cols(), 1.0);
      bundle.add(std::move(ad));
    }
    std::vector<data::TokenId> ids{data::kClsId};
    const std::size_t len = 1 + rng.index(5);
    for (std::size_t k = 0; k < len; ++k) ids.push_back(static_cast<data::TokenId>(3 + rng.index(9)));
    const auto pred = continual::multi_round_predict(bb, bundle, ids).label;
    // The oracle recomputes each adapter's logits with a fresh forward pass.
    std::vector<continual::AdapterLogits> outs;
    for (const auto& ad : bundle.adapters) {
      const auto att = ad.attachment(bb.config().layers);
      const nn::Matrix row = model::forward(bb, &att, ad.head, ids);
      outs.push_back({ad.round_id, ad.classes(), std::vector<float>(row.values().begin(), row.values().end())});
    }
    agree += pred == testing::brute_force_predict(outs);
  }
  return {agree == kAggregationBundles,
          std::to_string(agree) + "/" + std::to_string(kAggregationBundles) + " random bundles agree exactly"};
}

Outcome criterion8() {
  nn::Rng rng(88);
  std::size_t exact = 0, zero_cases = 0;
  for (std::size_t trial = 0; trial < kMetricSets; ++trial) {
    std::vector<data::ClassId> truth, pred;
    const std::size_t n = 4 + rng.index(9);
    for (std::size_t i = 0; i < n; ++i) {
      truth.push_back(static_cast<data::ClassId>(rng.index(3)));
      // Class 4 only ever appears as a prediction, so it has 0/0 recall.
      pred.push_back(static_cast<data::ClassId>(trial % 2 ? rng.index(5) : rng.index(3)));
    }
    if (trial % 3 == 0) pred[0] = 4;
    const auto m = continual::evaluate(truth, pred);
    const auto o = testing::metrics_oracle(truth, pred);
    const std::set<data::ClassId> t(truth.begin(), truth.end());
    const std::set<data::ClassId> p(pred.begin(), pred.end());
    for (auto c : p) zero_cases += !t.count(c);
    for (auto c : t) zero_cases += !p.count(c);
    exact += m.accuracy == o.accuracy && m.precision == o.precision && m.recall == o.recall && m.f1 == o.f1;
  }
  return {exact == kMetricSets && zero_cases > 0, std::to_string(exact) + "/" + std::to_string(kMetricSets) +
                                                      " sets bit-equal to the oracle; " + std::to_string(zero_cases) +
                                                      " classes hit the 0/0 convention"};
}

bool every_bit_flip_rejected(const Bytes& bytes, const std::function<void(const Bytes&)>& parse) {
  for (std::size_t bit = 0; bit < bytes.size() * 8; ++bit) {
    Bytes bad = bytes;
    bad[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    try {
      parse(bad);
      return false;
    } catch (const Error&) {
    }
  }
  return true;
}

Outcome criterion9(const Workspace& ws) {
  std::vector<std::string> why;
  // Byte-exact round trips.
  model::Backbone bb = testing::toy_backbone();
  const std::vector<data::ClassId> cls{0, 1, 2};
  lora::LoraAdapter ad = lora::init_adapter(testing::toy_lora(), bb, 2, cls, 4);
  nn::Rng rng(9);
  for (auto& e : ad.entries) e.b.value = rng.normal_matrix<float>(e.b.value.rows(), e.b.value.cols(), 0.1);
  const Bytes file = lora::serialize(ad);
  if (lora::serialize(lora::deserialize(file)) != file) why.push_back("adapter round trip");
  const coord::Message msg{coord::MessageType::submit, 3, 2, coord::submit_body(file, "{\"f1\":0.9}")};
  const Bytes payload = coord::encode_payload(msg);
  if (coord::encode_payload(coord::decode_payload(payload)) != payload) why.push_back("frame round trip");
  if (!every_bit_flip_rejected(file, [](const Bytes& b) { (void)lora::deserialize(b); })) {
    why.push_back("adapter bit flip accepted");
  }
  if (!every_bit_flip_rejected(payload, [](const Bytes& b) { (void)coord::decode_payload(b); })) {
    why.push_back("frame bit flip accepted");
  }

  // Socket path against loopback, through the CLI.
  const fs::path cfg = ws.small_config("wire.cfg");
  const fs::path loop = ws.dir / "wire_loop";
  if (run({ws.cli, "run-global", "--config", cfg, "--out", loop}, ws.dir / "wire_loop.log") != 0) {
    return {false, "run-global failed: " + slurp_text(ws.dir / "wire_loop.log")};
  }
  const fs::path cfg2 = ws.small_config("wire2.cfg", "backbone_file = " + (loop / "backbone.bin").string() + "\n");
  const fs::path sock = ws.dir / "wire_sock";
  const fs::path serve_log = ws.dir / "serve.log";
  Process server = spawn({ws.cli, "serve", "--config", cfg2, "--out", sock, "--addr", "127.0.0.1:0",
                          "--exit-after-exchange"},
                         serve_log);
  std::string addr;
  for (int i = 0; i < 600 && addr.empty(); ++i) {
    const std::string log = slurp_text(serve_log);
    const auto at = log.find("listening on ");
    const auto nl = at == std::string::npos ? std::string::npos : log.find('\n', at);
    if (nl != std::string::npos) addr = log.substr(at + 13, nl - at - 13);
    if (addr.empty()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  if (addr.empty()) {
    ::kill(server.pid, SIGTERM);
    wait_for(server);
    return {false, "serve did not start: " + slurp_text(serve_log)};
  }
  Process e0 = spawn({ws.cli, "edge", "--config", cfg2, "--out", sock, "--node", "0", "--addr", addr}, ws.dir / "e0.log");
  Process e1 = spawn({ws.cli, "edge", "--config", cfg2, "--out", sock, "--node", "1", "--addr", addr}, ws.dir / "e1.log");
  const int c0 = wait_for(e0), c1 = wait_for(e1);
  const int cs = wait_for(server);
  if (c0 || c1 || cs) {
    why.push_back("exit codes serve " + std::to_string(cs) + " edges " + std::to_string(c0) + "," +
                  std::to_string(c1));
  }
  // Per-node reports and the published bundle must match byte for byte.
  const auto diff = tree_diff(loop, sock, [](const std::string& n) {
    return n.rfind("node", 0) == 0 || n == "bundle.bin";
  });
  if (!diff.empty()) why.push_back("differs: " + join(diff));
  const auto files = tree(sock).size();
  return {why.empty(), "adapter " + std::to_string(file.size()) + " B and frame " + std::to_string(payload.size()) +
                           " B round-trip, all " + std::to_string((file.size() + payload.size()) * 8) +
                           " bit flips rejected; serve+2 edges vs loopback: " + std::to_string(files) +
                           " files compared" + (why.empty() ? ", identical" : " | " + join(why))};
}

Outcome criterion10(const Workspace& ws) {
  std::vector<std::string> why;
  const auto all = [](const std::string&) { return true; };
  for (int i = 0; i < 2; ++i) {
    const std::string k = std::to_string(i);
    run({ws.cli, "prepare-data", "--csv", ws.small_csv, "--preset", "fraction", "--seed", "3", "--out",
         ws.dir / ("prep" + k)},
        ws.dir / ("prep" + k + ".log"));
    run({ws.cli, "run-local", "--config", ws.small_config("det.cfg"), "--out", ws.dir / ("det_local" + k)},
        ws.dir / ("det_local" + k + ".log"));
    run({ws.cli, "run-global", "--config", ws.small_config("det.cfg"), "--out", ws.dir / ("det_global" + k)},
        ws.dir / ("det_global" + k + ".log"));
    run({ws.cli, "report", "--in", ws.dir / ("det_local" + k)}, ws.dir / ("report" + k + ".txt"));
  }
  std::size_t files = 0;
  for (const char* name : {"prep", "det_local", "det_global"}) {
    const fs::path a = ws.dir / (std::string(name) + "0"), b = ws.dir / (std::string(name) + "1");
    files += tree(a).size();
    if (tree(a).empty()) why.push_back(std::string(name) + " produced nothing");
    for (const auto& d : tree_diff(a, b, all)) why.push_back(std::string(name) + "/" + d);
  }
  if (slurp_text(ws.dir / "report0.txt") != slurp_text(ws.dir / "report1.txt")) why.push_back("report output");
  return {why.empty(), "prepare-data, run-local, run-global and report run twice: " + std::to_string(files) +
                           " files" + (why.empty() ? " byte-identical" : " | differ: " + join(why))};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: lecc_acceptance <lecc-cli> [criteria...]\n";
    return 2;
  }
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const auto wanted = [&](int c) { return only.empty() || only.count(c); };

  int failed = 0;
  const auto report = [&](int id, const std::function<Outcome()>& fn) {
    if (!wanted(id)) return;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "CRITERION " << id << " " << (o.pass ? "PASS" : "FAIL") << " [" << fmt(seconds_since(t0), 1)
              << " s] " << o.detail << std::endl;
  };

  try {
    Workspace ws(fs::absolute(argv[1]));
    std::size_t vocab = 0;
    report(1, criterion1);
    report(2, criterion2);
    if (wanted(3)) {
      cli::RunConfig cfg = cli::load_config(ws.full_config("vocab.cfg"));
      vocab = cli::load_dataset(cfg).vocab.size();
    }
    report(3, [&] { return criterion3(vocab); });
    if (wanted(4) || wanted(5)) {
      LocalRun lr;
      std::string err;
      const auto t0 = Clock::now();
      try {
        lr = local_run(ws);
      } catch (const std::exception& e) {
        err = e.what();
      }
      const std::string shared = "; shared run-local " + fmt(seconds_since(t0), 1) + " s";
      const auto with_time = [&](Outcome o) {
        o.detail += shared;
        return o;
      };
      report(4, [&] { return with_time(err.empty() ? criterion4(lr) : Outcome{false, "run-local failed: " + err}); });
      report(5, [&] { return with_time(err.empty() ? criterion5(lr) : Outcome{false, "run-local failed: " + err}); });
    }
    report(6, [&] { return criterion6(ws); });
    report(7, criterion7);
    report(8, criterion8);
    report(9, [&] { return criterion9(ws); });
    report(10, [&] { return criterion10(ws); });
  } catch (const std::exception& e) {
    std::cout << "setup failed: " << e.what() << std::endl;
    return 2;
  }
  std::cout << (failed ? "ACCEPTANCE: " + std::to_string(failed) + " criteria FAIL" : std::string("ACCEPTANCE: all PASS"))
            << std::endl;
  return failed ? 1 : 0;
}
