// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/data/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lecc/data/labels.hpp"
#include "lecc/error.hpp"
#include "lecc/nn/rng.hpp"

namespace lecc::data {

namespace {

// Probability that a signature column takes its class-preferred value.
constexpr double kSignatureHit = 0.7;
constexpr std::size_t kFamilySignatures = 3;
constexpr std::size_t kClassSignatures = 4;
constexpr double kSparseNullRate = 0.05;

const std::vector<std::string>& edge_columns() {
  static const std::vector<std::string> cols = {
      "frame.time", "ip.src_host", "ip.dst_host", "arp.dst.proto_ipv4", "arp.opcode",
      "arp.hw.size", "arp.src.proto_ipv4", "icmp.checksum", "icmp.seq_le",
      "icmp.transmit_timestamp", "icmp.unused", "http.file_data", "http.content_length",
      "http.request.uri.query", "http.request.method", "http.referer", "http.request.full_uri",
      "http.request.version", "http.response", "http.tls_port", "tcp.ack", "tcp.ack_raw",
      "tcp.checksum", "tcp.connection.fin", "tcp.connection.rst", "tcp.connection.syn",
      "tcp.connection.synack", "tcp.dstport", "tcp.flags", "tcp.flags.ack", "tcp.len",
      "tcp.options", "tcp.payload", "tcp.seq", "tcp.srcport", "udp.port", "udp.stream",
      "udp.time_delta", "dns.qry.name", "dns.qry.name.len", "dns.qry.qu", "dns.qry.type",
      "dns.retransmission", "dns.retransmit_request", "dns.retransmit_request_in",
      "mqtt.conack.flags", "mqtt.conflag.cleansess", "mqtt.conflags", "mqtt.hdrflags", "mqtt.len",
      "mqtt.msg_decoded_as", "mqtt.msg", "mqtt.msgtype", "mqtt.proto_len", "mqtt.protoname",
      "mqtt.topic", "mqtt.topic_len", "mqtt.ver", "mbtcp.len", "mbtcp.trans_id", "mbtcp.unit_id",
  };
  return cols;
}

const std::vector<std::string>& ton_columns() {
  static const std::vector<std::string> cols = {
      "ts", "src_ip", "src_port", "dst_ip", "dst_port", "proto", "service", "duration",
      "src_bytes", "dst_bytes", "conn_state", "missed_bytes", "src_pkts", "src_ip_bytes",
      "dst_pkts", "dst_ip_bytes", "dns_query", "dns_qclass", "dns_qtype", "dns_rcode", "dns_AA",
      "dns_RD", "dns_RA", "dns_rejected", "ssl_version", "ssl_cipher", "ssl_resumed",
      "ssl_established", "ssl_subject", "ssl_issuer", "http_trans_depth", "http_method",
      "http_uri", "http_referrer", "http_version", "http_request_body_len",
      "http_response_body_len", "http_status_code", "http_user_agent", "http_orig_mime_types",
      "http_resp_mime_types", "weird_name", "weird_addl", "weird_notice",
  };
  return cols;
}

enum class Kind { categorical, continuous, noise, host };

bool contains_any(const std::string& s, std::initializer_list<const char*> parts) {
  for (const char* p : parts)
    if (s.find(p) != std::string::npos) return true;
  return false;
}

Kind column_kind(const std::string& name) {
  if (name == "ts" || contains_any(name, {"frame.time", "checksum", "tcp.seq", "ack_raw",
                                          "trans_id", "udp.stream", "transmit_timestamp"})) {
    return Kind::noise;
  }
  if (contains_any(name, {"host", "_ip", "ipv4"}) && !contains_any(name, {"bytes"})) return Kind::host;
  if (contains_any(name, {"len", "delta", "duration", "bytes", "pkts", "content_length"})) {
    return Kind::continuous;
  }
  return Kind::categorical;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct ColumnSpec {
  std::string name;
  Kind kind = Kind::categorical;
  std::vector<std::string> domain;  // categorical values
  double scale = 1.0;               // continuous base magnitude
};

std::string format_cont(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::vector<ColumnSpec> build_columns(FlowSchema schema, nn::Rng& rng) {
  const auto& names = schema == FlowSchema::edge_iiotset ? edge_columns() : ton_columns();
  std::vector<ColumnSpec> specs;
  for (const auto& n : names) {
    ColumnSpec c;
    c.name = n;
    c.kind = column_kind(n);
    if (c.kind == Kind::categorical) {
      const std::size_t m = 3 + rng.index(8);
      if (contains_any(n, {"port"})) {
        static const char* ports[] = {"0", "80", "443", "1883", "502", "53", "8080", "22", "21", "445", "3389"};
        for (std::size_t i = 0; i < m; ++i) c.domain.emplace_back(ports[i]);
      } else {
        for (std::size_t i = 0; i < m; ++i) c.domain.push_back(std::to_string(i));
      }
    } else if (c.kind == Kind::continuous) {
      c.scale = std::pow(10.0, rng.uniform(-2.0, 3.0));
    }
    specs.push_back(std::move(c));
  }
  return specs;
}

std::string family_of(const std::string& canonical) {
  static const std::map<std::string, std::string> families = {
      {"DDoS_UDP", "flood"},      {"DDoS_ICMP", "flood"},         {"DDoS_HTTP", "flood"},
      {"DDoS_TCP", "flood"},      {"DoS", "flood"},               {"SQL_injection", "web"},
      {"XSS", "web"},             {"Uploading", "web"},           {"Port_Scanning", "scan"},
      {"Fingerprinting", "scan"}, {"Vulnerability_scanner", "scan"}, {"Password", "intrusion"},
      {"Backdoor", "intrusion"},  {"Ransomware", "intrusion"},    {"MITM", "mitm"},
      {"Normal", "normal"},
  };
  const auto it = families.find(canonical);
  return it == families.end() ? canonical : it->second;
}

struct Signature {
  std::size_t column;
  std::string categorical;  // preferred categorical value
  double center = 0.0;      // preferred continuous center
};

std::vector<Signature> pick_signatures(const std::vector<ColumnSpec>& cols, std::uint64_t seed,
                                       std::size_t count, const std::set<std::size_t>& taken) {
  nn::Rng rng(seed);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < cols.size(); ++i)
    if ((cols[i].kind == Kind::categorical || cols[i].kind == Kind::continuous) && !taken.contains(i))
      candidates.push_back(i);
  rng.shuffle(candidates.begin(), candidates.end());
  std::vector<Signature> out;
  for (std::size_t i = 0; i < count && i < candidates.size(); ++i) {
    const ColumnSpec& c = cols[candidates[i]];
    Signature s{candidates[i], {}, 0.0};
    if (c.kind == Kind::categorical) {
      s.categorical = c.domain[rng.index(c.domain.size())];
    } else {
      s.center = c.scale * rng.uniform(2.0, 6.0);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string background_value(const ColumnSpec& c, nn::Rng& rng) {
  switch (c.kind) {
    case Kind::categorical:
      return c.domain[rng.index(c.domain.size())];
    case Kind::continuous:
      return format_cont(c.scale * rng.uniform(0.5, 8.0));
    case Kind::noise:
      return std::to_string(1000000 + rng.index(900000000));
    case Kind::host:
      return "192.168." + std::to_string(rng.index(4)) + "." + std::to_string(1 + rng.index(40));
  }
  return "0";
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::vector<std::string> schema_feature_columns(FlowSchema schema) {
  return schema == FlowSchema::edge_iiotset ? edge_columns() : ton_columns();
}

std::vector<std::string> schema_sparse_columns(FlowSchema schema) {
  if (schema == FlowSchema::edge_iiotset) {
    return {"http.cookie", "tls.handshake.type", "smb.access.mask", "tcp.options.mss_val"};
  }
  return {"dns_answers", "ssl_server_name", "http_cookie"};
}

std::vector<std::string> schema_default_classes(FlowSchema schema) {
  if (schema == FlowSchema::edge_iiotset) {
    return {"Normal",        "DDoS_UDP",      "Password",       "XSS",       "Backdoor",
            "SQL_injection", "Fingerprinting", "MITM",          "Port_Scanning", "Uploading",
            "DDoS_TCP",      "DDoS_ICMP",     "DDoS_HTTP",      "Ransomware", "Vulnerability_scanner"};
  }
  return {"normal",    "backdoor",  "password",  "ransomware", "xss",
          "mitm",      "scanning",  "injection", "DDoS_UDP",   "DDoS_TCP",
          "DDoS_ICMP", "DDoS_HTTP", "Uploading", "Fingerprinting", "Vulnerability_scanner"};
}

std::string generate_flow_csv(const SynthOptions& options) {
  if (options.classes.empty()) fail(Errc::config, "synthetic table needs at least one class");
  const std::uint64_t profile_seed = options.schema == FlowSchema::edge_iiotset ? 0xED6E11A7ULL : 0x7011A7ULL;
  nn::Rng layout_rng(profile_seed);
  const std::vector<ColumnSpec> cols = build_columns(options.schema, layout_rng);
  const std::vector<std::string> sparse = schema_sparse_columns(options.schema);

  struct Profile {
    std::vector<Signature> signatures;
  };
  std::map<std::string, std::vector<Signature>> family_sigs;
  std::vector<Profile> profiles;
  for (const auto& raw : options.classes) {
    const auto& aliases = ton_label_aliases();
    const auto alias = aliases.find(raw);
    const std::string canonical = normalize_label(alias == aliases.end() ? raw : alias->second);
    const std::string family = family_of(canonical);
    auto fit = family_sigs.find(family);
    if (fit == family_sigs.end()) {
      fit = family_sigs
                .emplace(family, pick_signatures(cols, nn::derive_seed(profile_seed, fnv1a(family)),
                                                 kFamilySignatures, {}))
                .first;
    }
    std::set<std::size_t> taken;
    for (const auto& s : fit->second) taken.insert(s.column);
    Profile p;
    p.signatures = fit->second;
    auto own = pick_signatures(cols, nn::derive_seed(profile_seed, fnv1a(canonical) ^ 0x5bd1e995ULL),
                               kClassSignatures, taken);
    p.signatures.insert(p.signatures.end(), own.begin(), own.end());
    profiles.push_back(std::move(p));
  }

  std::ostringstream out;
  // Sparse columns are interleaved after every fifteenth feature column.
  std::vector<std::string> header;
  std::vector<int> slot;  // >=0: feature column index, <0: sparse column -(k+1)
  std::size_t next_sparse = 0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    header.push_back(cols[i].name);
    slot.push_back(static_cast<int>(i));
    if ((i + 1) % 15 == 0 && next_sparse < sparse.size()) {
      header.push_back(sparse[next_sparse]);
      slot.push_back(-static_cast<int>(next_sparse) - 1);
      ++next_sparse;
    }
  }
  for (; next_sparse < sparse.size(); ++next_sparse) {
    header.push_back(sparse[next_sparse]);
    slot.push_back(-static_cast<int>(next_sparse) - 1);
  }
  header.emplace_back("Attack_label");
  header.emplace_back("Attack_type");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';

  nn::Rng rng(options.seed);
  std::vector<std::string> row(cols.size());
  for (std::size_t r = 0; r < options.rows_per_class; ++r) {
    for (std::size_t c = 0; c < options.classes.size(); ++c) {
      for (std::size_t j = 0; j < cols.size(); ++j) row[j] = background_value(cols[j], rng);
      for (const auto& sig : profiles[c].signatures) {
        if (rng.uniform(0.0, 1.0) >= kSignatureHit) continue;
        const ColumnSpec& col = cols[sig.column];
        if (col.kind == Kind::categorical) {
          row[sig.column] = sig.categorical;
        } else {
          const double jitter = 1.0 + 0.05 * (static_cast<double>(rng.index(5)) - 2.0);
          row[sig.column] = format_cont(sig.center * jitter);
        }
      }
      bool first = true;
      for (int s : slot) {
        if (!first) out << ',';
        first = false;
        if (s >= 0) {
          out << csv_escape(row[static_cast<std::size_t>(s)]);
        } else if (rng.uniform(0.0, 1.0) >= kSparseNullRate && (r > 0 || c > 0)) {
          // The first row always leaves sparse cells empty, so even tiny
          // tables clean to the documented feature count.
          out << rng.index(4);
        }
      }
      const std::string& name = options.classes[c];
      const bool is_normal = normalize_label(name) == "Normal" || name == "normal";
      out << ',' << (is_normal ? 0 : 1) << ',' << csv_escape(name) << '\n';
    }
  }
  return out.str();
}

void write_flow_csv(const std::filesystem::path& path, const SynthOptions& options) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::io, "cannot write " + path.string());
  f << generate_flow_csv(options);
  if (!f) fail(Errc::io, "short write to " + path.string());
}

}  // namespace lecc::data
