// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include "lecc/error.hpp"

namespace lecc::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::io, "cannot write " + path.string());
  f << text;
}

void require_out(const RunConfig& config) {
  if (config.out.empty()) fail(Errc::config, "no output directory (set out in the config or pass --out)");
  fs::create_directories(config.out);
}

}  // namespace

void prepare_data(const data::PrepareOptions& options, const fs::path& out) {
  const data::DatasetBundle bundle = data::prepare_dataset(options);
  fs::create_directories(out);
  data::save_bundle(out / "dataset.json", bundle);
  write_text(out / "cleaning.json", data::cleaning_report_json(bundle));
}

void synth_data(const data::SynthOptions& options, const fs::path& out) {
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  data::write_flow_csv(out, options);
}

data::DatasetBundle load_dataset(const RunConfig& config) {
  if (config.dataset) return data::load_bundle(*config.dataset);
  return data::prepare_dataset(config.prepare);
}

model::Backbone load_or_pretrain(const RunConfig& config, const data::DatasetBundle& data) {
  if (config.backbone_file) return model::load_backbone(read_file(config.backbone_file->string()));
  const auto rs = continual::round_samples(data, data.train_records(), data.test_records(), data.schedule);
  const auto pool = continual::held_out_records(data);
  return continual::prepare_backbone(data, config.for_mode(continual::Mode::lora), pool, rs.train.at(0));
}

void run_local(const RunConfig& config) {
  require_out(config);
  const data::DatasetBundle data = load_dataset(config);
  const model::Backbone backbone = load_or_pretrain(config, data);
  write_file((config.out / "backbone.bin").string(), model::save_backbone(backbone));
  std::vector<continual::ExperimentReport> reports;
  for (const auto mode : config.modes) {
    continual::ExperimentResult res = continual::run_experiment(data, config.for_mode(mode), backbone);
    continual::write_experiment(config.out / continual::mode_name(mode), res.report);
    if (mode == continual::Mode::lora) {
      write_file((config.out / "bundle.bin").string(), lora::encode_bundle(res.state.bundle));
    }
    reports.push_back(std::move(res.report));
  }
  write_text(config.out / "trend.csv", continual::trend_csv(reports));
  write_text(config.out / "trend.json", continual::trend_json(reports));
  write_text(config.out / "config.txt", render_config(config));
}

coord::GlobalSetup global_setup(const RunConfig& config, std::optional<std::size_t> devices) {
  data::DatasetBundle data = load_dataset(config);
  coord::GlobalConfig g;
  g.experiment = config.for_mode(continual::Mode::lora);
  g.device_schedules = config.device_schedules
                           ? coord::parse_device_schedules(*config.device_schedules)
                           : coord::default_device_schedules(data.schedule, devices.value_or(config.devices));
  if (devices && *devices != g.device_schedules.size()) {
    fail(Errc::config, "--devices " + std::to_string(*devices) + " does not match the " +
                           std::to_string(g.device_schedules.size()) + " configured device schedules");
  }
  g.gate_epsilon = config.gate_epsilon;
  g.gate_holdout_per_class = config.gate_holdout;
  std::optional<model::Backbone> pretrained;
  if (config.backbone_file) pretrained = model::load_backbone(read_file(config.backbone_file->string()));
  return coord::prepare_global(std::move(data), std::move(g), std::move(pretrained));
}

coord::GlobalReport run_global(const RunConfig& config, std::optional<std::size_t> devices) {
  require_out(config);
  const coord::GlobalSetup setup = global_setup(config, devices);
  const coord::GlobalReport report = coord::run_global(setup);
  coord::write_global(config.out, report);
  write_file((config.out / "backbone.bin").string(), model::save_backbone(setup.backbone));
  write_text(config.out / "config.txt", render_config(config));
  return report;
}

void serve(const RunConfig& config, const ServeOptions& options, const std::atomic<bool>& stop) {
  require_out(config);
  const coord::GlobalSetup setup = global_setup(config);
  coord::Coordinator coordinator = coord::make_coordinator(setup);
  const std::uint32_t exchange = coord::exchange_round(setup.config);
  const std::size_t expected = setup.config.device_schedules.size();
  {
    coord::TcpServer server(coordinator, options.endpoint);
    if (options.on_listen) options.on_listen(server.port());
    while (!stop.load()) {
      if (options.exit_after_exchange && coordinator.registry().size() >= expected &&
          coordinator.delivered_to_all(exchange) && server.open_connections() == 0) {
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    server.stop();
  }
  write_file((config.out / "bundle.bin").string(), lora::encode_bundle(coordinator.bundle()));
}

coord::NodeReport edge(const RunConfig& config, std::uint32_t node, const coord::Endpoint& endpoint,
                       std::chrono::milliseconds timeout) {
  require_out(config);
  const coord::GlobalSetup setup = global_setup(config);
  coord::DeviceRun run(setup, node);
  // Connect first so an unreachable coordinator fails fast.
  coord::TcpChannel channel(endpoint, std::min(timeout, std::chrono::milliseconds(5000)));
  run.train();
  run.connect_and_submit(channel);
  run.fetch_and_evaluate(std::chrono::milliseconds(50), timeout);
  coord::write_node(config.out / ("node" + std::to_string(node)), run.report());
  return run.report();
}

std::string report(const fs::path& in, const std::string& format) {
  if (format != "csv" && format != "json") fail(Errc::config, "unknown report format '" + format + "'");
  if (!fs::exists(in)) fail(Errc::io, "no such input: " + in.string());
  std::vector<fs::path> dirs;
  if (fs::exists(in / "report.json")) dirs.push_back(in);
  if (fs::is_directory(in)) {
    for (const auto& e : fs::recursive_directory_iterator(in))
      if (e.is_regular_file() && e.path().filename() == "report.json" && e.path().parent_path() != in) {
        dirs.push_back(e.path().parent_path());
      }
  }
  if (dirs.empty()) fail(Errc::io, "no report.json under " + in.string());
  std::sort(dirs.begin(), dirs.end());
  std::vector<continual::ExperimentReport> reports;
  for (const auto& d : dirs) reports.push_back(continual::read_experiment(d));
  return format == "csv" ? continual::trend_csv(reports) : continual::trend_json(reports);
}

}  // namespace lecc::cli
