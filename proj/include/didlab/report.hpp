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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "didlab/experiments.hpp"
#include "didlab/optimizer.hpp"

namespace didlab {

/// Provenance of one CLI invocation.  Every file the invocation produced is
/// listed in exactly one manifest.
struct RunManifest {
  std::string experiment;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  std::string tool_version;
  std::vector<std::string> files;  // relative to output_dir
};

/// One CSV row per record, fixed column order, decimal text with 12
/// significant digits; byte-identical across platforms for identical input.
void emit_metrics(const std::vector<MetricRecord>& records,
                  const std::string& path);

void emit_table(const Table& table, const std::string& path);

/// Machine-readable report: verdicts, measured values, thresholds, config
/// hash, and the relative paths of every metrics file and table.
void emit_report_json(const ExperimentReport& report, const std::string& path);

/// Human-readable pass/fail summary.
std::string render_report_text(const ExperimentReport& report);

void emit_manifest(const RunManifest& manifest, const std::string& path);

/// Writes all metrics files, tables, and report.json under `dir`; returns
/// the relative paths written (manifest material).
std::vector<std::string> write_experiment_outputs(
    const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace didlab
