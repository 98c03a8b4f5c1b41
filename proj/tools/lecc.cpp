// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line entry point. Every failure prints one line
// `error: <code>: <message>` to stderr and exits nonzero.

#include <csignal>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lecc/cli/commands.hpp"
#include "lecc/error.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

int report_error(std::string_view code, const std::string& message) {
  std::cerr << "error: " << code << ": " << one_line(message) << std::endl;
  return 2;
}

lecc::cli::RunConfig config_with_out(const std::string& path, const std::string& out) {
  lecc::cli::RunConfig c = lecc::cli::load_config(path);
  if (!out.empty()) c.out = out;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lecc;
  CLI::App app{"Low-rank continual learning for edge intrusion detection"};
  app.require_subcommand(1);

  // prepare-data
  data::PrepareOptions prep;
  std::vector<std::string> prep_csv;
  std::string prep_out;
  auto* cmd_prep = app.add_subcommand("prepare-data", "Load, clean, sample and split CSV flow data");
  cmd_prep->add_option("--csv", prep_csv, "Input CSV (repeatable)")->required();
  cmd_prep->add_option("--aliases", prep.aliases, "Label alias table per CSV: none or ton");
  cmd_prep->add_option("--preset", prep.preset, "Few-shot preset (table3) or fraction")->capture_default_str();
  cmd_prep->add_option("--schedule", prep.schedule, "table2 or A,B,C;D,E;...")->capture_default_str();
  cmd_prep->add_option("--train-fraction", prep.train_fraction, "Train share per class")->capture_default_str();
  cmd_prep->add_option("--max-len", prep.max_len, "Token sequence length")->capture_default_str();
  cmd_prep->add_option("--seed", prep.seed, "Sampling seed")->required();
  cmd_prep->add_option("--out", prep_out, "Output directory")->required();

  // synth-data
  data::SynthOptions synth;
  std::string synth_schema = "edge", synth_classes, synth_out;
  auto* cmd_synth = app.add_subcommand("synth-data", "Write a synthetic labelled flow CSV");
  cmd_synth->add_option("--schema", synth_schema, "edge or ton")->capture_default_str();
  cmd_synth->add_option("--rows", synth.rows_per_class, "Rows per class")->capture_default_str();
  cmd_synth->add_option("--classes", synth_classes, "Comma-separated class names (default: all)");
  cmd_synth->add_option("--seed", synth.seed, "Sampling seed")->required();
  cmd_synth->add_option("--out", synth_out, "Output CSV path")->required();

  // run-local
  std::string config_path, out_override;
  auto* cmd_local = app.add_subcommand("run-local", "Multi-round continual training on one device");
  cmd_local->add_option("--config", config_path, "Config file")->required();
  cmd_local->add_option("--out", out_override, "Output directory (overrides the config)");

  // run-global
  std::optional<std::size_t> devices;
  auto* cmd_global = app.add_subcommand("run-global", "Devices with disjoint domains exchanging adapters");
  cmd_global->add_option("--config", config_path, "Config file")->required();
  cmd_global->add_option("--devices", devices, "Number of edge devices");
  cmd_global->add_option("--out", out_override, "Output directory (overrides the config)");

  // serve
  std::optional<std::string> addr;
  bool exit_after_exchange = false;
  auto* cmd_serve = app.add_subcommand("serve", "Run the networked coordinator");
  cmd_serve->add_option("--config", config_path, "Config file")->required();
  cmd_serve->add_option("--addr", addr, "host:port (default $LECC_ADDR or 127.0.0.1:7878)");
  cmd_serve->add_flag("--exit-after-exchange", exit_after_exchange,
                      "Exit once every device has received the exchange bundle");
  cmd_serve->add_option("--out", out_override, "Output directory (overrides the config)");

  // edge
  std::uint32_t node = 0;
  long timeout_ms = 1800000;
  auto* cmd_edge = app.add_subcommand("edge", "Run one edge device against a coordinator");
  cmd_edge->add_option("--config", config_path, "Config file")->required();
  cmd_edge->add_option("--node", node, "Device index")->required();
  cmd_edge->add_option("--addr", addr, "host:port (default $LECC_ADDR or 127.0.0.1:7878)");
  cmd_edge->add_option("--timeout-ms", timeout_ms, "Wait limit for the coordinator")->capture_default_str();
  cmd_edge->add_option("--out", out_override, "Output directory (overrides the config)");

  // report
  std::string report_in, report_format = "csv";
  auto* cmd_report = app.add_subcommand("report", "Re-render stored experiment outputs");
  cmd_report->add_option("--in", report_in, "Run directory")->required();
  cmd_report->add_option("--format", report_format, "csv or json")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    return report_error("E_USAGE", e.what());
  }

  try {
    if (*cmd_prep) {
      for (const auto& p : prep_csv) prep.csv_paths.emplace_back(p);
      cli::prepare_data(prep, prep_out);
    } else if (*cmd_synth) {
      if (synth_schema == "edge") {
        synth.schema = data::FlowSchema::edge_iiotset;
      } else if (synth_schema == "ton") {
        synth.schema = data::FlowSchema::ton_iot;
      } else {
        fail(Errc::config, "unknown schema '" + synth_schema + "'");
      }
      if (synth_classes.empty()) {
        synth.classes = data::schema_default_classes(synth.schema);
      } else {
        std::stringstream ss(synth_classes);
        std::string name;
        while (std::getline(ss, name, ',')) synth.classes.push_back(name);
      }
      cli::synth_data(synth, synth_out);
    } else if (*cmd_local) {
      cli::run_local(config_with_out(config_path, out_override));
    } else if (*cmd_global) {
      const auto report = cli::run_global(config_with_out(config_path, out_override), devices);
      std::cout << coord::global_csv(report);
    } else if (*cmd_serve) {
      std::signal(SIGTERM, on_signal);
      std::signal(SIGINT, on_signal);
      cli::ServeOptions opts;
      opts.endpoint = coord::resolve_endpoint(addr);
      opts.exit_after_exchange = exit_after_exchange;
      opts.on_listen = [&](std::uint16_t port) {
        std::cout << "listening on " << opts.endpoint.host << ":" << port << std::endl;
      };
      cli::serve(config_with_out(config_path, out_override), opts, g_stop);
    } else if (*cmd_edge) {
      if (timeout_ms <= 0) fail(Errc::config, "--timeout-ms must be positive");
      const auto r = cli::edge(config_with_out(config_path, out_override), node, coord::resolve_endpoint(addr),
                               std::chrono::milliseconds(timeout_ms));
      std::cout << coord::node_exchange_json(r);
    } else if (*cmd_report) {
      std::cout << cli::report(report_in, report_format);
    }
  } catch (const Error& e) {
    return report_error(errc_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return report_error("E_INTERNAL", e.what());
  }
  return 0;
}
