#pragma once

#include "egopriv/attack.hpp"
#include "egopriv/metrics.hpp"

#include <string>
#include <vector>

namespace egopriv {

struct ReportDocument {
  std::string run_id;
  std::string command;
  std::string config = "{}";  // JSON object echo of the run configuration
  std::vector<MetricReport> metrics;
  std::vector<AttackRow> attack_rows;
  std::string created;  // ISO-8601 UTC
  std::string version = EGOPRIV_VERSION;

  bool operator==(const ReportDocument&) const;
};

// Canonical form: sorted keys, values rounded to 4 decimals, trailing newline.
std::string report_json(const ReportDocument& doc);
ReportDocument parse_report(const std::string& text);

// Stable hex id derived from the command and its configuration.
std::string derive_run_id(const std::string& command, const std::string& config_json);

// SOURCE_DATE_EPOCH when set (reproducible runs), otherwise the wall clock.
std::string report_timestamp();

// One plot-ready row per metric and attack row across all reports; rows are
// sorted so the output does not depend on the input order.
std::string merge_reports_csv(const std::vector<ReportDocument>& docs);

}  // namespace egopriv
