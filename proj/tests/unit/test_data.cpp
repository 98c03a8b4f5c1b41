// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "lecc/bytes.hpp"
#include "lecc/data/bundle.hpp"
#include "lecc/data/synth.hpp"
#include "tempdir.hpp"

using namespace lecc;
using namespace lecc::data;
using lecc::testing::TempDir;

namespace {

std::vector<FlowRecord> labelled(const std::map<std::string, std::size_t>& counts) {
  std::vector<FlowRecord> out;
  std::size_t k = 0;
  for (const auto& [name, n] : counts)
    for (std::size_t i = 0; i < n; ++i, ++k)
      out.push_back({{{"f", std::to_string(k)}}, name, name != "Normal"});
  return out;
}

std::map<std::string, std::size_t> class_counts(std::span<const FlowRecord> records, const Indices& idx) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i : idx) ++out[records[i].attack_type];
  return out;
}

}  // namespace

TEST_SUITE("bytes") {
  TEST_CASE("crc32 check value") {
    const std::string s = "123456789";
    CHECK(crc32({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}) == 0xCBF43926u);
    CHECK(crc32({}) == 0u);
  }

  TEST_CASE("writer and reader round-trip every width") {
    ByteWriter w;
    w.put_u8(0xAB);
    w.put_u16(0x1234);
    w.put_u32(0xDEADBEEF);
    w.put_u64(0x0102030405060708ull);
    w.put_f32(-1.5f);
    w.put_u32_be(0x01020304);
    w.put_crc();
    const Bytes b = w.bytes();
    CHECK(b[1] == 0x34);
    CHECK(b[2] == 0x12);
    CHECK(b[19] == 0x01);
    ByteReader r(b, "blob");
    CHECK(r.u8() == 0xAB);
    CHECK(r.u16() == 0x1234);
    CHECK(r.u32() == 0xDEADBEEF);
    CHECK(r.u64() == 0x0102030405060708ull);
    CHECK(r.f32() == -1.5f);
    CHECK(r.u32_be() == 0x01020304u);
    r.expect_crc();
    CHECK(r.remaining() == 0);
  }

  TEST_CASE("truncated input and bad magic are format errors") {
    const Bytes b{1, 2};
    ByteReader r(b, "blob");
    try {
      (void)r.u32();
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::format);
    }
    ByteReader m(b, "blob");
    CHECK_THROWS_AS(m.expect_magic("XY"), Error);
  }
}

TEST_SUITE("data") {
  TEST_CASE("csv parser handles quotes, doubled quotes and CRLF") {
    const auto rows = parse_csv("a,b,c\r\n\"x,y\",\"he said \"\"hi\"\"\",\r\n1,2,3\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][0] == "x,y");
    CHECK(rows[1][1] == "he said \"hi\"");
    CHECK(rows[1][2].empty());
    CHECK(rows[2] == std::vector<std::string>{"1", "2", "3"});
    CHECK_THROWS_AS(parse_csv("\"open"), Error);
  }

  TEST_CASE("null cells drop the whole column and cleaning is idempotent") {
    for (const char* n : {"", "null", "NULL", "NaN", "nan", "None"}) CHECK(is_null_value(n));
    CHECK_FALSE(is_null_value("0"));
    std::vector<FlowRecord> recs{
        {{{"a", "1"}, {"b", ""}, {"c", "x"}}, "Normal", false},
        {{{"a", "2"}, {"b", "5"}, {"c", "NaN"}}, "XSS", true},
    };
    CleaningReport rep;
    const auto once = drop_null_features(recs, &rep);
    CHECK(rep.dropped_columns == std::vector<std::string>{"b", "c"});
    CHECK(rep.kept_columns == std::vector<std::string>{"a"});
    CHECK(once[1].features == std::vector<Feature>{{"a", "2"}});
    CHECK(drop_null_features(once) == once);
    CHECK(drop_null_features(once.size() ? once : recs) == once);
  }

  TEST_CASE("no nulls is the identity and all-null columns leave empty features") {
    std::vector<FlowRecord> clean{{{{"a", "1"}}, "Normal", false}};
    CHECK(drop_null_features(clean) == clean);
    std::vector<FlowRecord> dirty{{{{"a", ""}}, "Normal", false}};
    CleaningReport rep;
    const auto out = drop_null_features(dirty, &rep);
    CHECK(out[0].features.empty());
    CHECK(rep.no_features_left);
  }

  TEST_CASE("load_csv keeps column order and separates target columns") {
    TempDir dir;
    const auto p = dir.write("t.csv", "x,Attack_label,y,Attack_type,z\n1,0,2,Normal,\n3,1,4,SQL injection,5\n");
    CleaningReport rep;
    const auto recs = load_csv(p, {}, &rep);
    REQUIRE(recs.size() == 2);
    CHECK(recs[1].features == std::vector<Feature>{{"x", "3"}, {"y", "4"}});
    CHECK(recs[1].attack_type == "SQL injection");
    CHECK(recs[1].attack_label);
    CHECK(rep.dropped_columns == std::vector<std::string>{"z"});
    try {
      (void)load_csv(dir.write("bad.csv", "x,Attack_type\n1,Normal\n"));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::schema);
    }
    CHECK_THROWS_AS(load_csv(dir / "missing.csv"), Error);
  }

  TEST_CASE("synthetic tables clean to 61 and 44 feature columns") {
    TempDir dir;
    SynthOptions edge;
    edge.classes = {"Normal", "XSS"};
    edge.rows_per_class = 5;
    write_flow_csv(dir / "edge.csv", edge);
    const auto e = load_csv(dir / "edge.csv");
    CHECK(e.size() == 10);
    CHECK(e[0].features.size() == 61);

    SynthOptions ton;
    ton.schema = FlowSchema::ton_iot;
    ton.classes = {"normal", "xss"};
    ton.rows_per_class = 5;
    write_flow_csv(dir / "ton.csv", ton);
    const auto t = load_csv(dir / "ton.csv");
    CHECK(t[0].features.size() == 44);
    CHECK(schema_feature_columns(FlowSchema::edge_iiotset).size() == 61);
    CHECK(schema_feature_columns(FlowSchema::ton_iot).size() == 44);
    CHECK(generate_flow_csv(edge) == generate_flow_csv(edge));
  }

  TEST_CASE("label codec is lexicographic, shared and strict") {
    const std::vector<std::string> names{"XSS", "Normal", "SQL injection", "Backdoor"};
    const LabelCodec c = build_label_codec(names);
    CHECK(c.names() == std::vector<std::string>{"Backdoor", "Normal", "SQL_injection", "XSS"});
    CHECK(c.encode("SQL injection") == c.encode("SQL_injection"));
    CHECK(c.decode(c.encode("XSS")) == "XSS");
    CHECK_THROWS_AS(c.encode("Nope"), Error);
    CHECK_THROWS_AS(c.decode(4), Error);
    const std::vector<std::string> dup{"A", "A"};
    CHECK_THROWS_AS(LabelCodec{dup}, Error);
  }

  TEST_CASE("TON names map onto the shared vocabulary") {
    std::vector<FlowRecord> recs{{{}, "injection", true}, {{}, "normal", false}, {{}, "dos", true}};
    apply_label_aliases(recs, ton_label_aliases());
    CHECK(recs[0].attack_type == "SQL_injection");
    CHECK(recs[1].attack_type == "Normal");
    CHECK(recs[2].attack_type == "dos");
  }

  TEST_CASE("bucketing keeps integers and rounds decimals to three digits") {
    CHECK(bucket_value("12345") == "12345");
    CHECK(bucket_value("3.14159") == "3.14");
    CHECK(bucket_value("0.000123456") == "0.000123");
    CHECK(bucket_value("1.5e10") == "1.5e+10");
    CHECK(bucket_value("tcp") == "tcp");
    CHECK(bucket_value("1.2.3") == "1.2.3");
  }

  TEST_CASE("textualize, vocab and tokenize") {
    const FlowRecord r{{{"ip proto", "6"}, {"len", "1.2345"}}, "Normal", false};
    CHECK(textualize(r) == "CLS ip_proto:6 len:1.23");
    const std::vector<std::string> texts{"CLS b:1 a:2", "CLS a:2 c:3"};
    const TokenVocab v = build_vocab(texts);
    CHECK(v.size() == 6);
    CHECK(v.id("[PAD]") == kPadId);
    CHECK(v.id("CLS") == kClsId);
    CHECK(v.id("a:2") == 3);
    CHECK(v.id("c:3") == 5);
    CHECK(v.id("zzz") == kUnkId);
    const auto ids = tokenize("CLS a:2 unseen", v, 5);
    CHECK(ids == std::vector<TokenId>{kClsId, 3, kUnkId, kPadId, kPadId});
    CHECK(tokenize("CLS a:2 b:1 c:3", v, 2).size() == 2);
    CHECK_THROWS_AS(tokenize("CLS", v, 0), Error);
    // Inverse-map oracle: known tokens decode back to themselves.
    const auto known = tokenize("CLS c:3 b:1", v, 3);
    CHECK(detokenize(known, v) == "CLS c:3 b:1");
    for (TokenId id : tokenize("CLS q w e r t y", v, 10)) CHECK(id < v.size());
  }

  TEST_CASE("few-shot sample takes exact per-class counts, deterministically") {
    const auto recs = labelled({{"Normal", 30}, {"XSS", 20}, {"MITM", 5}});
    const std::map<std::string, std::size_t> want{{"Normal", 10}, {"XSS", 4}};
    const Indices a = few_shot_sample(recs, want, 7);
    CHECK(a == few_shot_sample(recs, want, 7));
    CHECK(a != few_shot_sample(recs, want, 8));
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(class_counts(recs, a) == want);
    try {
      (void)few_shot_sample(recs, {{"MITM", 6}}, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::count);
    }
  }

  TEST_CASE("table3 preset totals 250 per class") {
    const auto& p = table3_preset();
    CHECK(p.size() == 15);
    for (const auto& [name, b] : p) CHECK(b.total() == 250);
    CHECK(p.at("Normal").train == 145);
    CHECK(p.at("SQL_injection").test == 114);
    CHECK_THROWS_AS(few_shot_preset("table9"), Error);
  }

  TEST_CASE("split is disjoint, stratified and covers the input") {
    const auto recs = labelled({{"Normal", 10}, {"XSS", 5}});
    const IndexSplit s = split_indices(recs, 0.6, 3);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (std::size_t i : s.test) CHECK(all.insert(i).second);
    CHECK(all.size() == recs.size());
    CHECK(class_counts(recs, s.train) == std::map<std::string, std::size_t>{{"Normal", 6}, {"XSS", 3}});
    CHECK(split_indices(recs, 0.6, 3).train == s.train);
    CHECK_THROWS_AS(split_indices(recs, 1.0, 3), Error);
    const IndexSplit c = split_indices_by_count(recs, {{"Normal", 2}, {"XSS", 4}}, 1);
    CHECK(class_counts(recs, c.train) == std::map<std::string, std::size_t>{{"Normal", 2}, {"XSS", 4}});
  }

  TEST_CASE("kfold partitions the records with stratified folds") {
    const auto recs = labelled({{"Normal", 50}, {"XSS", 30}, {"MITM", 20}});
    const auto folds = kfold(recs, 5, 11);
    REQUIRE(folds.size() == 5);
    std::vector<int> seen(recs.size(), 0);
    const auto global = class_counts(recs, [&] {
      Indices all(recs.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      return all;
    }());
    for (const auto& f : folds) {
      CHECK(f.validate.size() == 20);
      CHECK(f.train.size() + f.validate.size() == recs.size());
      for (std::size_t i : f.validate) ++seen[i];
      // Counting oracle: each class within one sample of its global share.
      for (const auto& [name, n] : class_counts(recs, f.validate)) {
        const double share = static_cast<double>(global.at(name)) / 5.0;
        CHECK(std::abs(static_cast<double>(n) - share) <= 1.0);
      }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    CHECK_THROWS_AS(kfold(recs, 1, 0), Error);
  }

  TEST_CASE("schedule validation, parsing and partitioning") {
    const auto& t2 = table2_schedule();
    CHECK(t2.size() == 7);
    CHECK(t2.round(0) == std::vector<std::string>{"Normal", "DDoS_UDP", "Password"});
    CHECK(t2.round_of("XSS") == 1);
    CHECK(t2.round_of("nope") == 7);
    CHECK(t2.known_through(1).size() == 5);
    CHECK(parse_schedule(format_schedule(t2)) == t2);
    CHECK(parse_schedule("A,B;C,D").size() == 2);
    CHECK_THROWS_AS(parse_schedule("A,B;C"), Error);
    CHECK_THROWS_AS(parse_schedule("A,B;A,C"), Error);

    const auto recs = labelled({{"Normal", 3}, {"XSS", 2}, {"Backdoor", 1}, {"Password", 1}});
    const auto parts = partition_rounds(recs, recs, t2);
    REQUIRE(parts.size() == 7);
    CHECK(parts[0].train.size() == 4);
    CHECK(parts[1].test.size() == 3);
    const RoundSchedule one({{"Normal", "XSS", "Backdoor", "Password"}});
    CHECK(partition_rounds(recs, recs, one)[0].train == recs);
    try {
      (void)partition_rounds(recs, recs, RoundSchedule({{"Normal"}}));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::schedule);
    }
  }

  TEST_CASE("prepared bundles are deterministic and reload exactly") {
    TempDir dir;
    SynthOptions o;
    o.classes = {"Normal", "DDoS_UDP", "Password", "XSS", "Backdoor"};
    o.rows_per_class = 40;
    write_flow_csv(dir / "edge.csv", o);
    PrepareOptions p;
    p.csv_paths = {dir / "edge.csv"};
    p.preset = "fraction";
    p.schedule = "Normal,DDoS_UDP,Password;XSS,Backdoor";
    p.seed = 5;
    const DatasetBundle b = prepare_dataset(p);
    CHECK(b.codec.size() == 5);
    CHECK(b.train.size() == 120);
    CHECK(b.test.size() == 80);
    const std::string json = bundle_to_json(b);
    CHECK(json == bundle_to_json(prepare_dataset(p)));
    save_bundle(dir / "bundle.json", b);
    const DatasetBundle back = load_bundle(dir / "bundle.json");
    CHECK(back.vocab == b.vocab);
    CHECK(back.codec == b.codec);
    CHECK(back.train_records() == b.train_records());
    CHECK(back.test_records() == b.test_records());
    CHECK(bundle_to_json(back) == json);
    for (const auto& r : b.train_records()) CHECK(r.features.size() == 61);
  }

  TEST_CASE("empty CSV is a schema error") {
    TempDir dir;
    PrepareOptions p;
    p.csv_paths = {dir.write("e.csv", "a,Attack_label,Attack_type\n")};
    try {
      (void)prepare_dataset(p);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::schema);
    }
  }
}
