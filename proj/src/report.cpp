#include "egopriv/report.hpp"

#include "egopriv/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <tuple>

namespace egopriv {

using nlohmann::json;

namespace {

json metric_json(const MetricReport& m) {
  return {{"metric", m.metric_name},
          {"value", round4(m.value)},
          {"n_evaluated", m.n_evaluated},
          {"n_excluded", m.n_excluded},
          {"parameters", m.parameters}};
}

json attack_json(const AttackRow& r) {
  return {{"attribute", std::string(to_string(r.attribute))},
          {"capability", r.capability},
          {"view", r.view},
          {"M", r.m},
          {"aggregator", r.aggregator},
          {"weight_scheme", r.weight_scheme},
          {"accuracy", round4(r.accuracy)},
          {"delta", round4(r.delta)},
          {"n", r.n}};
}

// Canonical text of a double already rounded to 4 places.
std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", round4(v));
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

bool ReportDocument::operator==(const ReportDocument& o) const { return report_json(*this) == report_json(o); }

std::string report_json(const ReportDocument& doc) {
  json config;
  try {
    config = json::parse(doc.config);
  } catch (const json::parse_error&) {
    fail(ErrorCode::InvalidArgument, "report config echo is not JSON");
  }
  json j;
  j["run_id"] = doc.run_id;
  j["command"] = doc.command;
  j["config"] = config;
  j["metrics"] = json::array();
  for (const auto& m : doc.metrics) j["metrics"].push_back(metric_json(m));
  j["attack_rows"] = json::array();
  for (const auto& r : doc.attack_rows) j["attack_rows"].push_back(attack_json(r));
  j["created"] = doc.created;
  j["version"] = doc.version;
  // nlohmann's default object type keeps keys sorted.
  return j.dump(2) + "\n";
}

ReportDocument parse_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::MalformedFile, std::string("report is not valid JSON: ") + e.what());
  }
  ReportDocument doc;
  try {
    doc.run_id = j.at("run_id").get<std::string>();
    doc.command = j.at("command").get<std::string>();
    doc.config = j.at("config").dump();
    for (const json& m : j.at("metrics")) {
      MetricReport r;
      r.metric_name = m.at("metric").get<std::string>();
      r.value = m.at("value").get<double>();
      r.n_evaluated = m.at("n_evaluated").get<std::size_t>();
      r.n_excluded = m.at("n_excluded").get<std::size_t>();
      r.parameters = m.at("parameters").get<std::map<std::string, std::string>>();
      doc.metrics.push_back(std::move(r));
    }
    for (const json& a : j.at("attack_rows")) {
      AttackRow r;
      r.attribute = parse_attribute(a.at("attribute").get<std::string>());
      r.capability = a.at("capability").get<std::string>();
      r.view = a.at("view").get<std::string>();
      r.m = a.at("M").get<std::size_t>();
      r.aggregator = a.at("aggregator").get<std::string>();
      r.weight_scheme = a.at("weight_scheme").get<std::string>();
      r.accuracy = a.at("accuracy").get<double>();
      r.delta = a.at("delta").get<double>();
      r.n = a.at("n").get<std::size_t>();
      doc.attack_rows.push_back(std::move(r));
    }
    doc.created = j.at("created").get<std::string>();
    doc.version = j.at("version").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::MissingField, std::string("report field missing or mistyped: ") + e.what());
  }
  return doc;
}

std::string derive_run_id(const std::string& command, const std::string& config_json) {
  // FNV-1a 64 over the command and the canonical config text.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  mix(command);
  mix(json::parse(config_json).dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string report_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    require(end != epoch && *end == '\0' && v >= 0, ErrorCode::InvalidArgument,
            "SOURCE_DATE_EPOCH must be a nonnegative integer");
    t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string merge_reports_csv(const std::vector<ReportDocument>& docs) {
  using Row = std::array<std::string, 14>;
  std::vector<Row> rows;
  for (const auto& d : docs) {
    for (const auto& m : d.metrics) {
      auto k = m.parameters.find("k");
      std::string task;
      if (auto t = m.parameters.find("task"); t != m.parameters.end()) task = t->second;
      std::string attribute;
      if (auto a = m.parameters.find("attribute"); a != m.parameters.end()) attribute = a->second;
      rows.push_back({d.run_id, d.command, "metric", m.metric_name, task, attribute, "", "",
                      k == m.parameters.end() ? "" : k->second, "", fixed4(m.value), "",
                      std::to_string(m.n_evaluated), std::to_string(m.n_excluded)});
    }
    for (const auto& r : d.attack_rows) {
      rows.push_back({d.run_id, d.command, "attack", "accuracy", "", std::string(to_string(r.attribute)),
                      r.capability, r.view, std::to_string(r.m), r.aggregator + "/" + r.weight_scheme,
                      fixed4(r.accuracy), fixed4(r.delta), std::to_string(r.n), "0"});
    }
  }
  std::sort(rows.begin(), rows.end());
  std::string out =
      "run_id,command,kind,metric,task,attribute,capability,view,k_or_M,voting,value,delta,n_evaluated,n_excluded\n";
  for (const Row& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += csv_field(r[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace egopriv
