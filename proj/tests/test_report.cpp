#include "egopriv/checkpoint.hpp"
#include "egopriv/config.hpp"
#include "egopriv/error.hpp"
#include "egopriv/io.hpp"
#include "egopriv/report.hpp"
#include "egopriv/synth.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>

using namespace egopriv;
using egopriv::testing::scratch_dir;
using egopriv::testing::small_synth;

namespace {

ReportDocument sample(const std::string& run_id) {
  ReportDocument d;
  d.run_id = run_id;
  d.command = "attack";
  d.config = R"({"z": 1, "a": [1, 2]})";
  MetricReport m;
  m.metric_name = "hit_rate@5";
  m.value = 0.123456;
  m.n_evaluated = 40;
  m.n_excluded = 2;
  m.parameters = {{"k", "5"}, {"task", "ego2exo"}};
  d.metrics.push_back(m);
  d.attack_rows.push_back({Attribute::Race, "2+3", "ego", 3, "soft", "half", 0.70004, 0.1, 120});
  d.created = "2024-01-01T00:00:00Z";
  return d;
}

void expect_error(const std::function<void()>& f, ErrorCode code) {
  try {
    f();
    ADD_FAILURE() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(Report, RoundTripIsAFixpoint) {
  const std::string text = report_json(sample("abc"));
  const ReportDocument back = parse_report(text);
  EXPECT_EQ(report_json(back), text);
  EXPECT_DOUBLE_EQ(back.metrics[0].value, 0.1235);
  EXPECT_DOUBLE_EQ(back.attack_rows[0].accuracy, 0.7);
  EXPECT_EQ(back.attack_rows[0].attribute, Attribute::Race);
}

TEST(Report, KeysAreSorted) {
  const auto j = nlohmann::json::parse(report_json(sample("abc")));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_EQ(j["config"].dump(), R"({"a":[1,2],"z":1})");
}

TEST(Report, ParseErrors) {
  expect_error([] { parse_report("{"); }, ErrorCode::MalformedFile);
  expect_error([] { parse_report(R"({"run_id": "x"})"); }, ErrorCode::MissingField);
}

TEST(Report, RunIdIsStable) {
  const std::string a = derive_run_id("attack", R"({"b": 1, "a": 2})");
  EXPECT_EQ(a, derive_run_id("attack", R"({"a":2,"b":1})"));
  EXPECT_EQ(a.size(), 16u);
  EXPECT_NE(a, derive_run_id("retrieve", R"({"a":2,"b":1})"));
  EXPECT_NE(a, derive_run_id("attack", R"({"a":2,"b":3})"));
}

TEST(Report, TimestampHonoursSourceDateEpoch) {
  ::setenv("SOURCE_DATE_EPOCH", "86400", 1);
  EXPECT_EQ(report_timestamp(), "1970-01-02T00:00:00Z");
  ::setenv("SOURCE_DATE_EPOCH", "yesterday", 1);
  EXPECT_THROW(report_timestamp(), Error);
  ::unsetenv("SOURCE_DATE_EPOCH");
  EXPECT_EQ(report_timestamp().size(), 20u);
}

TEST(Report, MergeIgnoresInputOrder) {
  const ReportDocument a = sample("aaa"), b = sample("bbb");
  const std::string ab = merge_reports_csv({a, b});
  EXPECT_EQ(ab, merge_reports_csv({b, a}));
  EXPECT_EQ(std::count(ab.begin(), ab.end(), '\n'), 5);
  EXPECT_NE(ab.find("aaa,attack,attack,accuracy,,Race,2+3,ego,3,soft/half,0.7000,0.1000,120,0\n"), std::string::npos);
  EXPECT_NE(ab.find("aaa,attack,metric,hit_rate@5,ego2exo,,,,5,,0.1235,,40,2\n"), std::string::npos);
}

TEST(Checkpoint, EmbeddingRoundTrip) {
  const Dataset ds = generate(small_synth(0));
  TrainConfig c;
  c.output_dim = 6;
  c.architecture = Architecture::OneHiddenMLP;
  c.hidden_dim = 5;
  TrainedEmbedding t = initial_heads(ds, c);
  t.steps = 17;
  const auto dir = scratch_dir("ckpt_embed");
  save_embedding_checkpoint(t, dir / "e.ckpt", R"({"lr":0.1})");
  EXPECT_EQ(checkpoint_kind(dir / "e.ckpt"), "embedding");
  const TrainedEmbedding back = load_embedding_checkpoint(dir / "e.ckpt");
  EXPECT_EQ(back.steps, 17u);
  EXPECT_EQ(back.ego_head.params(), t.ego_head.params());
  EXPECT_EQ(back.exo_head.params(), t.exo_head.params());
  EXPECT_EQ(back.ego_head.shape().hidden_dim, 5u);
  expect_error([&] { load_classifier_checkpoint(dir / "e.ckpt"); }, ErrorCode::MalformedFile);
}

TEST(Checkpoint, ClassifierRoundTrip) {
  Rng rng(3);
  const ClassifierHead h = ClassifierHead::initialize(Attribute::Age, View::Exo, 7, Pooling::Attention, rng);
  const auto dir = scratch_dir("ckpt_clf");
  save_classifier_checkpoint(h, 4, dir / "c.ckpt");
  const ClassifierHead back = load_classifier_checkpoint(dir / "c.ckpt");
  EXPECT_EQ(back.params(), h.params());
  EXPECT_EQ(back.attribute(), Attribute::Age);
  EXPECT_EQ(back.view(), View::Exo);
  EXPECT_EQ(back.pooling(), Pooling::Attention);
  expect_error([&] { load_embedding_checkpoint(dir / "c.ckpt"); }, ErrorCode::MalformedFile);
  EXPECT_THROW(save_classifier_checkpoint(h, 4, dir / "d.ckpt", "[1]"), Error);
}

TEST(Checkpoint, MalformedFiles) {
  Rng rng(4);
  const ClassifierHead h = ClassifierHead::initialize(Attribute::Gender, View::Ego, 3, Pooling::Mean, rng);
  const auto dir = scratch_dir("ckpt_bad");
  save_classifier_checkpoint(h, 1, dir / "ok.ckpt");
  const std::string good = read_bytes(dir / "ok.ckpt");

  write_bytes(dir / "magic.ckpt", "NOTACKPT" + good.substr(8));
  expect_error([&] { load_classifier_checkpoint(dir / "magic.ckpt"); }, ErrorCode::MalformedFile);
  write_bytes(dir / "short.ckpt", good.substr(0, good.size() - 8));
  expect_error([&] { load_classifier_checkpoint(dir / "short.ckpt"); }, ErrorCode::MalformedFile);
  write_bytes(dir / "ragged.ckpt", good.substr(0, good.size() - 3));
  expect_error([&] { load_classifier_checkpoint(dir / "ragged.ckpt"); }, ErrorCode::MalformedFile);
  std::string broken = good;
  broken[12] = '#';
  write_bytes(dir / "json.ckpt", broken);
  expect_error([&] { load_classifier_checkpoint(dir / "json.ckpt"); }, ErrorCode::MalformedFile);
  write_bytes(dir / "tiny.ckpt", "EGOCKPT1");
  expect_error([&] { checkpoint_kind(dir / "tiny.ckpt"); }, ErrorCode::MalformedFile);
}

TEST(Config, TrainAndClassifierRoundTrip) {
  TrainConfig t;
  t.steps = 12;
  t.denominator_mode = DenominatorMode::Literal;
  t.architecture = Architecture::OneHiddenMLP;
  TrainConfig t2;
  apply_train_config(train_config_json(t), t2);
  EXPECT_EQ(train_config_json(t2), train_config_json(t));

  ClassifierConfig c;
  c.pooling = Pooling::Attention;
  c.learning_rate = 0.5;
  ClassifierConfig c2;
  apply_classifier_config(classifier_config_json(c), c2);
  EXPECT_EQ(classifier_config_json(c2), classifier_config_json(c));

  // Absent keys keep their values.
  apply_classifier_config(R"({"steps": 3})", c2);
  EXPECT_EQ(c2.steps, 3u);
  EXPECT_EQ(c2.pooling, Pooling::Attention);
  expect_error([&] { apply_train_config(R"({"steps": "many"})", t2); }, ErrorCode::MalformedFile);
  expect_error([&] { apply_train_config("[]", t2); }, ErrorCode::MalformedFile);
  expect_error([&] { apply_classifier_config("{", c2); }, ErrorCode::MalformedFile);
}
