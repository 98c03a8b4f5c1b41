// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/data/records.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lecc/error.hpp"

namespace lecc::data {

bool is_null_value(const std::string& cell) {
  return cell.empty() || cell == "null" || cell == "NULL" || cell == "NaN" || cell == "nan" ||
         cell == "None";
}

std::vector<FlowRecord> drop_null_features(std::vector<FlowRecord> records,
                                           CleaningReport* report) {
  std::set<std::string> null_columns;
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& r : records) {
    for (const auto& f : r.features) {
      if (seen.insert(f.name).second) order.push_back(f.name);
      if (is_null_value(f.value)) null_columns.insert(f.name);
    }
  }
  for (auto& r : records) {
    std::erase_if(r.features, [&](const Feature& f) { return null_columns.contains(f.name); });
  }
  if (report) {
    report->dropped_columns.clear();
    report->kept_columns.clear();
    for (const auto& name : order) {
      (null_columns.contains(name) ? report->dropped_columns : report->kept_columns).push_back(name);
    }
    report->no_features_left = !order.empty() && report->kept_columns.empty();
  }
  return records;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        row.push_back(std::move(cell));
        cell.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !cell.empty()) {
          row.push_back(std::move(cell));
          rows.push_back(std::move(row));
        }
        row.clear();
        cell.clear();
        any = false;
        break;
      default:
        cell.push_back(c);
        any = true;
    }
  }
  if (quoted) fail(Errc::schema, "unterminated quoted CSV field");
  if (any || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<FlowRecord> load_csv(const std::filesystem::path& path, const TargetColumns& targets,
                                 CleaningReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3);

  auto rows = parse_csv(text);
  if (rows.empty()) fail(Errc::schema, path.string() + ": missing header row");
  const auto& header = rows.front();
  const auto type_it = std::find(header.begin(), header.end(), targets.attack_type);
  const auto label_it = std::find(header.begin(), header.end(), targets.attack_label);
  if (type_it == header.end()) fail(Errc::schema, path.string() + ": missing column " + targets.attack_type);
  if (label_it == header.end()) fail(Errc::schema, path.string() + ": missing column " + targets.attack_label);
  const auto type_col = static_cast<std::size_t>(type_it - header.begin());
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  std::vector<FlowRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      fail(Errc::schema, path.string() + ": row " + std::to_string(r + 1) + " has " +
                             std::to_string(row.size()) + " fields, header has " +
                             std::to_string(header.size()));
    }
    FlowRecord rec;
    rec.features.reserve(header.size() - 2);
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == type_col || c == label_col) continue;
      rec.features.push_back({header[c], row[c]});
    }
    rec.attack_type = row[type_col];
    const std::string& lbl = row[label_col];
    rec.attack_label = !(lbl == "0" || lbl == "0.0" || lbl == "false" || lbl.empty());
    records.push_back(std::move(rec));
  }
  if (records.empty() && report) {
    report->dropped_columns.clear();
    report->kept_columns.clear();
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != type_col && c != label_col) report->kept_columns.push_back(header[c]);
    report->no_features_left = false;
    return records;
  }
  return drop_null_features(std::move(records), report);
}

}  // namespace lecc::data
