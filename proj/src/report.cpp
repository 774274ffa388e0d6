// Copyright 2026 The didlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "didlab/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "didlab/config.hpp"

namespace didlab {

namespace {

using nlohmann::json;

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: no CRLF translation
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::string num12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.11e", v);
  return std::string(buf);
}

}  // namespace

void emit_metrics(const std::vector<MetricRecord>& records,
                  const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "step,loss,js_to_target,js_to_did,kl_ref_to_policy,"
         "mean_logp_chosen,mean_logp_rejected,did_entropy_exact,"
         "grad_dot_w,grad_dot_l\n";
  for (const MetricRecord& r : records) {
    out << r.step << ',' << num12(r.loss) << ',' << num12(r.js_to_target)
        << ',' << num12(r.js_to_did) << ',' << num12(r.kl_ref_to_policy)
        << ',' << num12(r.mean_logp_chosen) << ','
        << num12(r.mean_logp_rejected) << ',' << num12(r.did_entropy_exact)
        << ',' << num12(r.grad_dot_w) << ',' << num12(r.grad_dot_l) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void emit_table(const Table& table, const std::string& path) {
  std::ofstream out = open_for_write(path);
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (!table.row_labels.empty()) out << table.row_labels[r] << ',';
    for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
      if (c) out << ',';
      out << num12(table.rows[r][c]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void emit_report_json(const ExperimentReport& report, const std::string& path) {
  json j;
  j["experiment"] = report.name;
  j["tool_version"] = kToolVersion;
  j["config_hash"] = config_hash_hex(report.config);
  j["config"] = json::parse(serialize_config(report.config));
  j["seeds"] = report.seeds;
  j["all_pass"] = report.all_pass();
  json verdicts = json::array();
  for (const Verdict& v : report.verdicts) {
    verdicts.push_back({{"name", v.name},
                        {"pass", v.pass},
                        {"measured", v.measured},
                        {"threshold", v.threshold},
                        {"comparator", v.comparator},
                        {"detail", v.detail}});
  }
  j["verdicts"] = std::move(verdicts);
  json measurements = json::object();
  for (const auto& [name, value] : report.measurements) measurements[name] = value;
  j["measurements"] = std::move(measurements);
  json metrics_files = json::array();
  for (const MetricsFile& m : report.metrics) metrics_files.push_back(m.filename);
  j["metrics_files"] = std::move(metrics_files);
  json tables = json::array();
  for (const Table& t : report.tables) tables.push_back(t.filename);
  j["tables"] = std::move(tables);

  std::ofstream out = open_for_write(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string render_report_text(const ExperimentReport& report) {
  std::ostringstream os;
  os << "experiment: " << report.name
     << "  (config " << config_hash_hex(report.config) << ")\n";
  int passed = 0;
  for (const Verdict& v : report.verdicts) {
    if (v.pass) ++passed;
    char line[256];
    std::snprintf(line, sizeof(line), "  [%s] %-42s measured=%.6g  want %s %.6g\n",
                  v.pass ? "PASS" : "FAIL", v.name.c_str(), v.measured,
                  v.comparator.c_str(), v.threshold);
    os << line;
  }
  if (!report.verdicts.empty())
    os << "  " << passed << "/" << report.verdicts.size() << " checks passed\n";
  for (const auto& [name, value] : report.measurements) {
    char line[192];
    std::snprintf(line, sizeof(line), "  (reported) %-40s %.6g\n", name.c_str(),
                  value);
    os << line;
  }
  return os.str();
}

void emit_manifest(const RunManifest& manifest, const std::string& path) {
  json j;
  j["experiment"] = manifest.experiment;
  j["config_hash"] = manifest.config_hash;
  j["seeds"] = manifest.seeds;
  j["output_dir"] = manifest.output_dir;
  j["tool_version"] = manifest.tool_version;
  j["files"] = manifest.files;
  std::ofstream out = open_for_write(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> write_experiment_outputs(
    const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  for (const MetricsFile& m : report.metrics) {
    emit_metrics(m.records, (dir / m.filename).string());
    written.push_back(m.filename);
  }
  for (const Table& t : report.tables) {
    emit_table(t, (dir / t.filename).string());
    written.push_back(t.filename);
  }
  emit_report_json(report, (dir / "report.json").string());
  written.push_back("report.json");
  return written;
}

}  // namespace didlab
