#include "egopriv/cli.hpp"

#include "egopriv/attack.hpp"
#include "egopriv/checkpoint.hpp"
#include "egopriv/classifier.hpp"
#include "egopriv/config.hpp"
#include "egopriv/data.hpp"
#include "egopriv/error.hpp"
#include "egopriv/explain.hpp"
#include "egopriv/io.hpp"
#include "egopriv/log.hpp"
#include "egopriv/metrics.hpp"
#include "egopriv/report.hpp"
#include "egopriv/retrieval.hpp"
#include "egopriv/synth.hpp"
#include "egopriv/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace egopriv::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Inconsistent flag combinations detected after parsing; exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class RunLock {
 public:
  explicit RunLock(fs::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    require(f != nullptr, ErrorCode::Io, "output is locked by another run (" + path_.string() + ")");
    std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
    std::fclose(f);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  fs::path path_;
};

fs::path sibling(const fs::path& out, const std::string& suffix) { return fs::path(out.string() + suffix); }

json parse_json_file(const std::string& path) {
  const std::string text = read_bytes(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::MalformedFile, path + " is not valid JSON: " + e.what());
  }
}

void write_manifest_file(const fs::path& path, const std::string& command, const json& config) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["run_id"] = derive_run_id(command, config.dump());
  m["version"] = EGOPRIV_VERSION;
  write_bytes(path, m.dump(2) + "\n");
}

ReportDocument new_report(const std::string& command, const json& config) {
  ReportDocument doc;
  doc.command = command;
  doc.config = config.dump();
  doc.run_id = derive_run_id(command, doc.config);
  doc.created = report_timestamp();
  return doc;
}

void write_report(const fs::path& out, const ReportDocument& doc) {
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_bytes(out, report_json(doc));
}

std::map<std::string, Eigen::VectorXd> read_probability_table(const std::string& path, Attribute attribute) {
  const json j = parse_json_file(path);
  require(j.is_object(), ErrorCode::MalformedFile, path + " must map clip ids to probability arrays");
  std::map<std::string, Eigen::VectorXd> out;
  for (const auto& [id, arr] : j.items()) {
    require(arr.is_array() && arr.size() == class_count(attribute), ErrorCode::DimensionMismatch,
            "prediction for '" + id + "' needs " + std::to_string(class_count(attribute)) + " probabilities");
    Eigen::VectorXd p(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) p(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    require((p.array() >= 0.0).all() && std::abs(p.sum() - 1.0) <= 1e-9, ErrorCode::NumericError,
            "prediction for '" + id + "' is not a probability distribution");
    out.emplace(id, std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string config, out;
};

int cmd_synth(const SynthArgs& a) {
  const SynthConfig config = parse_synth_config(read_bytes(a.config));
  fs::create_directories(a.out);
  RunLock lock(fs::path(a.out) / ".lock");
  const Dataset ds = generate(config);
  save_bundle(ds, a.out);
  write_manifest_file(fs::path(a.out) / "run_manifest.json", "synth", json::parse(synth_config_json(config)));
  std::printf("synth: %zu clips (%zu ego, %zu exo), dim %zu -> %s\n", ds.clips().size(), ds.ego().size(),
              ds.exo().size(), config.dim, a.out.c_str());
  return 0;
}

struct IngestArgs {
  std::string manifest, ego, exo, out;
};

int cmd_ingest(const IngestArgs& a) {
  const Dataset ds = ingest(a.manifest, a.ego, a.exo);
  fs::create_directories(a.out);
  RunLock lock(fs::path(a.out) / ".lock");
  save_bundle(ds, a.out);
  write_manifest_file(fs::path(a.out) / "run_manifest.json", "ingest",
                      {{"manifest", a.manifest}, {"ego", a.ego}, {"exo", a.exo}});
  std::printf("ingest: %zu clips, ego dim %zu, exo dim %zu -> %s\n", ds.clips().size(), ds.ego().dim(),
              ds.exo().dim(), a.out.c_str());
  return 0;
}

struct TrainEmbedArgs {
  std::string data, out, config, mode;
  std::optional<std::size_t> steps, batch, cache, out_dim, hidden_dim, frames;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr, tau;
  std::optional<std::string> arch, pooling, denominator;
};

int cmd_train_embed(const TrainEmbedArgs& a) {
  TrainConfig c;
  json file_cfg = json::object();
  if (!a.config.empty()) {
    file_cfg = parse_json_file(a.config);
    apply_train_config(file_cfg.dump(), c);
  }
  if (!a.mode.empty()) c.positive_mode = parse_positive_mode(a.mode);
  if (a.steps) c.steps = *a.steps;
  if (a.seed) c.seed = *a.seed;
  if (a.batch) c.batch_size = *a.batch;
  if (a.cache) c.cache_capacity = *a.cache;
  if (a.out_dim) c.output_dim = *a.out_dim;
  if (a.hidden_dim) c.hidden_dim = *a.hidden_dim;
  if (a.frames) c.frames = *a.frames;
  if (a.lr) c.learning_rate = *a.lr;
  if (a.tau) c.temperature = *a.tau;
  if (a.arch) c.architecture = parse_architecture(*a.arch);
  if (a.pooling) c.pooling = parse_pooling(*a.pooling);
  if (a.denominator) c.denominator_mode = parse_denominator_mode(*a.denominator);
  if (!a.seed && !file_cfg.contains("seed")) throw UsageError("train-embed needs --seed (or 'seed' in --config)");
  if (!a.steps && !file_cfg.contains("steps")) throw UsageError("train-embed needs --steps (or 'steps' in --config)");
  c.validate();

  const Dataset ds = load_bundle(a.data);
  RunLock lock(sibling(a.out, ".lock"));
  const TrainedEmbedding t = train_embedding(ds, c);
  json cfg = json::parse(train_config_json(c));
  cfg["data"] = a.data;
  save_embedding_checkpoint(t, a.out, cfg.dump());
  write_bytes(sibling(a.out, ".loss.csv"), loss_curve_csv(t.loss_curve));
  write_manifest_file(sibling(a.out, ".manifest.json"), "train-embed", cfg);
  if (!t.loss_curve.empty()) {
    std::printf("train-embed: %zu steps, loss %.4f -> %.4f\n", t.steps, t.loss_curve.front().loss,
                t.loss_curve.back().loss);
  } else {
    std::printf("train-embed: 0 steps, heads at initialization\n");
  }
  return 0;
}

struct TrainClfArgs {
  std::string data, attribute, view, out, config;
  std::optional<std::size_t> steps, batch, frames;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  std::optional<std::string> pooling;
};

int cmd_train_clf(const TrainClfArgs& a) {
  ClassifierConfig c;
  json file_cfg = json::object();
  if (!a.config.empty()) {
    file_cfg = parse_json_file(a.config);
    apply_classifier_config(file_cfg.dump(), c);
  }
  if (a.steps) c.steps = *a.steps;
  if (a.seed) c.seed = *a.seed;
  if (a.batch) c.batch_size = *a.batch;
  if (a.frames) c.frames = *a.frames;
  if (a.lr) c.learning_rate = *a.lr;
  if (a.pooling) c.pooling = parse_pooling(*a.pooling);
  if (!a.seed && !file_cfg.contains("seed")) throw UsageError("train-clf needs --seed (or 'seed' in --config)");
  const Attribute attribute = parse_attribute(a.attribute);
  const View view = parse_view(a.view == "ego" ? "Ego" : a.view == "exo" ? "Exo" : a.view);

  const Dataset ds = load_bundle(a.data);
  RunLock lock(sibling(a.out, ".lock"));
  const TrainedClassifier t = train_classifier(ds, attribute, view, c);
  json cfg = json::parse(classifier_config_json(c));
  cfg["data"] = a.data;
  cfg["attribute"] = std::string(to_string(attribute));
  cfg["view"] = std::string(to_string(view));
  save_classifier_checkpoint(t.head, c.steps, a.out, cfg.dump());
  write_bytes(sibling(a.out, ".loss.csv"), loss_curve_csv(t.loss_curve));
  write_manifest_file(sibling(a.out, ".manifest.json"), "train-clf", cfg);

  std::size_t correct = 0, n = 0;
  for (const ClipRecord* clip : ds.select(view, Split::Train)) {
    if (auto l = clip->label(attribute)) {
      correct += predict(t.head, ds, *clip, c.frames).argmax() == *l;
      ++n;
    }
  }
  std::printf("train-clf: %s/%s, %zu steps, train accuracy %.4f\n", a.attribute.c_str(), a.view.c_str(), c.steps,
              n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0);
  return 0;
}

struct RetrieveArgs {
  std::string data, task, heads, out, rankings, split = "test", scene_gallery = "ego";
  std::vector<std::size_t> ks{1, 5};
  std::size_t frames = kDefaultFrames;
  bool consistency = false;
};

std::optional<Split> parse_scope_split(const std::string& s) {
  if (s == "all") return std::nullopt;
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw UsageError("--split must be train, test or all");
}

int cmd_retrieve(const RetrieveArgs& a) {
  const RetrievalTask task = parse_task(a.task);
  const Dataset ds = load_bundle(a.data);
  std::optional<TrainedEmbedding> heads;
  if (!a.heads.empty()) heads = load_embedding_checkpoint(a.heads);
  Embedder e;
  e.frames = a.frames;
  if (heads) {
    e.ego_head = &heads->ego_head;
    e.exo_head = &heads->exo_head;
  }
  RetrievalOptions opt;
  opt.scope.split = parse_scope_split(a.split);
  if (a.scene_gallery != "ego" && a.scene_gallery != "exo") throw UsageError("--scene-gallery must be ego or exo");
  opt.scope.scene_gallery = a.scene_gallery == "ego" ? View::Ego : View::Exo;
  opt.top_k = *std::max_element(a.ks.begin(), a.ks.end());

  json cfg = {{"data", a.data},       {"task", std::string(to_string(task))},
              {"heads", a.heads},     {"k", a.ks},
              {"split", a.split},     {"scene_gallery", a.scene_gallery},
              {"frames", a.frames},   {"consistency", a.consistency}};
  RunLock lock(sibling(a.out, ".lock"));
  const RetrievalRun run = run_retrieval_task(ds, task, e, opt);
  ReportDocument doc = new_report("retrieve", cfg);
  const std::string capability = heads ? "2" : "1";
  for (std::size_t k : a.ks) {
    MetricReport m = hit_rate_at_k(run.rankings, run.positives, k);
    m.parameters["task"] = std::string(to_string(task));
    m.parameters["capability"] = capability;
    std::printf("HR@%zu = %.4f (n=%zu, excluded=%zu)\n", k, round4(m.value), m.n_evaluated, m.n_excluded);
    doc.metrics.push_back(std::move(m));
  }
  if (a.consistency) {
    for (Attribute attr : kAllAttributes) {
      std::map<std::string, Label> attribute_of;
      bool complete = true;
      for (const auto& clip : ds.clips()) {
        if (auto l = clip.label(attr)) attribute_of.emplace(clip.clip_id, class_names(attr)[*l]);
      }
      for (const auto& [q, r] : run.rankings) {
        complete = complete && attribute_of.count(q);
        for (const auto& cand : r.candidates) complete = complete && attribute_of.count(cand.clip_id);
      }
      if (!complete) {
        log_message(LogLevel::Warn, "skipping " + std::string(to_string(attr)) + " consistency: unlabelled clips");
        continue;
      }
      for (std::size_t k : a.ks) {
        MetricReport m = attribute_consistency_at_k(run.rankings, attribute_of, k);
        m.parameters["task"] = std::string(to_string(task));
        m.parameters["attribute"] = std::string(to_string(attr));
        m.parameters["capability"] = capability;
        std::printf("%s consistency@%zu = %.4f\n", std::string(to_string(attr)).c_str(), k, round4(m.value));
        doc.metrics.push_back(std::move(m));
      }
    }
  }
  write_report(a.out, doc);
  if (!a.rankings.empty()) write_bytes(a.rankings, rankings_jsonl(run.rankings));
  write_manifest_file(sibling(a.out, ".manifest.json"), "retrieve", cfg);
  return 0;
}

struct AttackArgs {
  std::string data, attribute, pool, out, ego_clf, exo_clf, heads, ego_probs, exo_probs, csv;
  int capability = 1;
  bool raa = false, per_identity = false;
  std::vector<std::size_t> ms{3};
  std::vector<std::string> aggs{"soft"};
  std::vector<std::string> weights{"uniform"};
  std::uint64_t seed = 0;
  std::size_t frames = kDefaultFrames;
};

int cmd_attack(const AttackArgs& a) {
  const Attribute attribute = parse_attribute(a.attribute);
  if (a.capability != 1 && a.capability != 2) throw UsageError("--capability must be 1 or 2");
  if (a.capability == 1 && (!a.ego_clf.empty() || !a.exo_clf.empty() || !a.heads.empty())) {
    throw UsageError("capability 1 is zero-shot; --ego-clf, --exo-clf and --heads need --capability 2");
  }
  if (!a.raa && !a.pool.empty()) throw UsageError("--pool needs --raa");

  const Dataset ds = load_bundle(a.data);
  std::optional<Dataset> pool;
  if (!a.pool.empty()) pool.emplace(load_bundle(a.pool));

  AttackSetup setup;
  setup.dataset = &ds;
  setup.attribute = attribute;
  setup.capability = a.capability;
  setup.per_identity = a.per_identity;
  setup.frames = a.frames;
  setup.pool_dataset = pool ? &*pool : nullptr;

  json cfg = {{"data", a.data},          {"attribute", std::string(to_string(attribute))},
              {"capability", a.capability}, {"raa", a.raa},
              {"pool", a.pool},          {"M", a.ms},
              {"aggregators", a.aggs},   {"weights", a.weights},
              {"per_identity", a.per_identity}, {"ego_clf", a.ego_clf},
              {"exo_clf", a.exo_clf},    {"heads", a.heads},
              {"ego_probs", a.ego_probs}, {"exo_probs", a.exo_probs},
              {"seed", a.seed},          {"frames", a.frames}};

  std::optional<TrainedEmbedding> heads;
  if (a.capability == 1) {
    // Zero-shot: supplied foundation-model predictions, else untrained seeded heads.
    Rng rng(a.seed);
    ClassifierHead ego_head = ClassifierHead::initialize(attribute, View::Ego, ds.ego().dim(), Pooling::Mean, rng);
    ClassifierHead exo_head = ClassifierHead::initialize(attribute, View::Exo, ds.exo().dim(), Pooling::Mean, rng);
    setup.ego_predict = a.ego_probs.empty() ? classifier_predictor(ego_head, a.frames)
                                            : table_predictor(read_probability_table(a.ego_probs, attribute));
    setup.exo_predict = a.exo_probs.empty() ? classifier_predictor(exo_head, a.frames)
                                            : table_predictor(read_probability_table(a.exo_probs, attribute));
  } else {
    if (a.ego_clf.empty() && a.ego_probs.empty()) {
      fail(ErrorCode::InvalidArgument, "missing prerequisite head: capability 2 needs --ego-clf");
    }
    auto load = [&](const std::string& ckpt, const std::string& probs, View view) -> PredictFn {
      if (!probs.empty()) return table_predictor(read_probability_table(probs, attribute));
      if (ckpt.empty()) return {};
      ClassifierHead h = load_classifier_checkpoint(ckpt);
      require(h.attribute() == attribute, ErrorCode::InvalidArgument,
              ckpt + " classifies " + std::string(to_string(h.attribute())) + ", not " + a.attribute);
      require(h.view() == view, ErrorCode::InvalidArgument, ckpt + " is not a " + std::string(to_string(view)) +
                                                                " classifier");
      return classifier_predictor(h, a.frames);
    };
    setup.ego_predict = load(a.ego_clf, a.ego_probs, View::Ego);
    setup.exo_predict = load(a.exo_clf, a.exo_probs, View::Exo);
    if (!a.heads.empty()) {
      heads = load_embedding_checkpoint(a.heads);
      setup.retriever = &*heads;
    }
  }

  SweepSpec sweep;
  sweep.ms = a.ms;
  sweep.voting.clear();
  for (const auto& agg : a.aggs) {
    const Aggregator ag = parse_aggregator(agg);
    if (ag == Aggregator::HardVote) {
      sweep.voting.push_back({ag, WeightScheme::Uniform});
      continue;
    }
    for (const auto& w : a.weights) sweep.voting.push_back({ag, parse_weight_scheme(w)});
  }

  RunLock lock(sibling(a.out, ".lock"));
  ReportDocument doc = new_report("attack", cfg);
  doc.attack_rows = baseline_rows(setup);
  if (a.raa) {
    auto rows = attack_sweep(setup, sweep);
    doc.attack_rows.insert(doc.attack_rows.end(), rows.begin(), rows.end());
  }

  std::vector<Label> train_labels, test_labels;
  for (const ClipRecord* c : ds.select(View::Ego)) {
    if (auto l = c->label(attribute)) {
      (c->split == Split::Train ? train_labels : test_labels).push_back(class_names(attribute)[*l]);
    }
  }
  if (!train_labels.empty() && !test_labels.empty()) {
    MetricReport prior = prior_accuracy(train_labels, test_labels);
    prior.parameters["attribute"] = std::string(to_string(attribute));
    doc.metrics.push_back(std::move(prior));
  }

  const std::string csv = attack_rows_csv(doc.attack_rows);
  std::fputs(csv.c_str(), stdout);
  write_report(a.out, doc);
  if (!a.csv.empty()) write_bytes(a.csv, csv);
  write_manifest_file(sibling(a.out, ".manifest.json"), "attack", cfg);
  return 0;
}

struct ExplainArgs {
  std::string clf, data, clip, label, out, snapshots;
  MaskConfig mask;
  std::size_t frames = kDefaultFrames;
};

int cmd_explain(const ExplainArgs& a) {
  const ClassifierHead head = load_classifier_checkpoint(a.clf);
  const Dataset ds = load_bundle(a.data);
  const ClipRecord& clip = ds.clip(a.clip);
  require(clip.view == head.view(), ErrorCode::InvalidArgument,
          "clip '" + a.clip + "' is " + std::string(to_string(clip.view)) + " but the classifier expects " +
              std::string(to_string(head.view())));
  int label = -1;
  const auto& names = class_names(head.attribute());
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::string lower = names[i];
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (a.label == names[i] || a.label == lower || a.label == std::to_string(i)) label = static_cast<int>(i);
  }
  require(label >= 0, ErrorCode::InvalidLabel,
          "label '" + a.label + "' is not a " + std::string(to_string(head.attribute())) + " class");

  json cfg = {{"clf", a.clf},
              {"data", a.data},
              {"clip", a.clip},
              {"label", names[label]},
              {"rounds", a.mask.rounds},
              {"units_per_round", a.mask.units_per_round},
              {"threshold", a.mask.threshold},
              {"step_size", a.mask.step_size},
              {"steps_per_round", a.mask.steps_per_round},
              {"frames", a.frames}};
  RunLock lock(sibling(a.out, ".lock"));
  const MaskTrace trace = progressive_mask(head, subsample_frames(ds.frames(a.clip), a.frames), label, a.mask);
  write_bytes(a.out, mask_trace_json(trace));
  if (!a.snapshots.empty()) write_bytes(a.snapshots, mask_snapshots_csv(trace));
  write_manifest_file(sibling(a.out, ".manifest.json"), "explain", cfg);
  std::printf("explain: masked %zu units, stop_round %zu, loss %.4f -> %.4f\n", trace.units.size(), trace.stop_round,
              trace.initial_loss, trace.losses.empty() ? trace.initial_loss : trace.losses.back());
  return 0;
}

struct ReportArgs {
  std::vector<std::string> in;
  std::string out;
};

int cmd_report(const ReportArgs& a) {
  std::vector<ReportDocument> docs;
  for (const auto& path : a.in) docs.push_back(parse_report(read_bytes(path)));
  RunLock lock(sibling(a.out, ".lock"));
  write_bytes(a.out, merge_reports_csv(docs));
  std::printf("report: merged %zu reports -> %s\n", docs.size(), a.out.c_str());
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Privacy attacks on egocentric video embeddings", "egopriv"};
  app.set_version_flag("--version", std::string(EGOPRIV_VERSION));
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "generate a synthetic benchmark");
  s_synth->add_option("--config", synth.config, "generator config (JSON)")->required();
  s_synth->add_option("--out", synth.out, "output dataset directory")->required();

  IngestArgs ingest_args;
  auto* s_ingest = app.add_subcommand("ingest", "validate a manifest and embedding files into a bundle");
  s_ingest->add_option("--manifest", ingest_args.manifest)->required();
  s_ingest->add_option("--ego", ingest_args.ego)->required();
  s_ingest->add_option("--exo", ingest_args.exo)->required();
  s_ingest->add_option("--out", ingest_args.out)->required();

  TrainEmbedArgs te;
  auto* s_te = app.add_subcommand("train-embed", "train ego/exo projection heads");
  s_te->add_option("--data", te.data)->required();
  s_te->add_option("--out", te.out, "checkpoint path")->required();
  s_te->add_option("--config", te.config, "training config (JSON)");
  s_te->add_option("--mode", te.mode, "individual|situational");
  s_te->add_option("--steps", te.steps);
  s_te->add_option("--seed", te.seed);
  s_te->add_option("--batch", te.batch);
  s_te->add_option("--cache", te.cache, "negative cache capacity");
  s_te->add_option("--lr", te.lr);
  s_te->add_option("--tau", te.tau, "temperature");
  s_te->add_option("--arch", te.arch, "linear|mlp");
  s_te->add_option("--out-dim", te.out_dim);
  s_te->add_option("--hidden-dim", te.hidden_dim);
  s_te->add_option("--pooling", te.pooling, "mean|attention");
  s_te->add_option("--denominator", te.denominator, "standard|literal");
  s_te->add_option("--frames", te.frames);

  TrainClfArgs tc;
  auto* s_tc = app.add_subcommand("train-clf", "train a demographic classifier head");
  s_tc->add_option("--data", tc.data)->required();
  s_tc->add_option("--attribute", tc.attribute, "gender|race|age")->required();
  s_tc->add_option("--view", tc.view, "ego|exo")->required();
  s_tc->add_option("--out", tc.out, "checkpoint path")->required();
  s_tc->add_option("--config", tc.config, "classifier config (JSON)");
  s_tc->add_option("--steps", tc.steps);
  s_tc->add_option("--seed", tc.seed);
  s_tc->add_option("--batch", tc.batch);
  s_tc->add_option("--lr", tc.lr);
  s_tc->add_option("--pooling", tc.pooling, "mean|attention");
  s_tc->add_option("--frames", tc.frames);

  RetrieveArgs rt;
  auto* s_rt = app.add_subcommand("retrieve", "rank galleries and report HR@k");
  s_rt->add_option("--data", rt.data)->required();
  s_rt->add_option("--task", rt.task, "ego2ego|ego2exo|scene|moment")->required();
  s_rt->add_option("--heads", rt.heads, "embedding checkpoint (omit for zero-shot)");
  s_rt->add_option("--k", rt.ks, "cutoffs, e.g. 1,5")->delimiter(',');
  s_rt->add_option("--out", rt.out, "report path")->required();
  s_rt->add_option("--split", rt.split, "train|test|all");
  s_rt->add_option("--scene-gallery", rt.scene_gallery, "ego|exo");
  s_rt->add_option("--rankings", rt.rankings, "JSON-lines rankings dump");
  s_rt->add_option("--frames", rt.frames);
  s_rt->add_flag("--consistency", rt.consistency, "also report attribute consistency@k");

  AttackArgs at;
  auto* s_at = app.add_subcommand("attack", "demographic attacks with optional retrieval augmentation");
  s_at->add_option("--data", at.data)->required();
  s_at->add_option("--attribute", at.attribute, "gender|race|age")->required();
  s_at->add_option("--capability", at.capability, "1 zero-shot, 2 fine-tuned")->required();
  s_at->add_flag("--raa", at.raa, "retrieval-augmented attack");
  s_at->add_option("--pool", at.pool, "separate exo pool dataset");
  s_at->add_option("--m", at.ms, "support sizes, e.g. 0,1,2,3")->delimiter(',');
  s_at->add_option("--agg", at.aggs, "hard|soft")->delimiter(',');
  s_at->add_option("--weights", at.weights, "uniform|half")->delimiter(',');
  s_at->add_flag("--per-identity", at.per_identity, "one vote per wearer");
  s_at->add_option("--ego-clf", at.ego_clf);
  s_at->add_option("--exo-clf", at.exo_clf);
  s_at->add_option("--heads", at.heads, "embedding checkpoint used for retrieval");
  s_at->add_option("--ego-probs", at.ego_probs, "precomputed ego predictions (JSON)");
  s_at->add_option("--exo-probs", at.exo_probs, "precomputed exo predictions (JSON)");
  s_at->add_option("--seed", at.seed, "seed of the zero-shot heads");
  s_at->add_option("--frames", at.frames);
  s_at->add_option("--csv", at.csv, "also write the attack rows as CSV");
  s_at->add_option("--out", at.out, "report path")->required();

  ExplainArgs ex;
  auto* s_ex = app.add_subcommand("explain", "progressive masking of a clip's frames");
  s_ex->add_option("--clf", ex.clf)->required();
  s_ex->add_option("--data", ex.data)->required();
  s_ex->add_option("--clip", ex.clip)->required();
  s_ex->add_option("--label", ex.label, "class name or index")->required();
  s_ex->add_option("--out", ex.out, "trace JSON")->required();
  s_ex->add_option("--rounds", ex.mask.rounds);
  s_ex->add_option("--per-round", ex.mask.units_per_round);
  s_ex->add_option("--threshold", ex.mask.threshold);
  s_ex->add_option("--step-size", ex.mask.step_size);
  s_ex->add_option("--steps-per-round", ex.mask.steps_per_round);
  s_ex->add_option("--snapshots", ex.snapshots, "per-round mask CSV");
  s_ex->add_option("--frames", ex.frames);

  ReportArgs rp;
  auto* s_rp = app.add_subcommand("report", "merge reports into one CSV");
  s_rp->add_option("--in", rp.in, "report files")->required()->expected(1, -1);
  s_rp->add_option("--out", rp.out)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*s_synth) return cmd_synth(synth);
    if (*s_ingest) return cmd_ingest(ingest_args);
    if (*s_te) return cmd_train_embed(te);
    if (*s_tc) return cmd_train_clf(tc);
    if (*s_rt) return cmd_retrieve(rt);
    if (*s_at) return cmd_attack(at);
    if (*s_ex) return cmd_explain(ex);
    if (*s_rp) return cmd_report(rp);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error %s: %s\n", std::string(error_code_name(e.code())).c_str(), e.what());
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error io: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error internal: %s\n", e.what());
    return 1;
  }
  return 2;
}

int main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace egopriv::cli
