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

#include <string>
#include <vector>

#include "didlab/config.hpp"
#include "didlab/optimizer.hpp"

namespace didlab {

/// One pass/fail check backed by a recorded measurement.
struct Verdict {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string comparator;  // relation the measurement must satisfy
  std::string detail;
};

/// Per-run metric rows destined for one CSV file.
struct MetricsFile {
  std::string filename;  // relative to the experiment's output directory
  std::vector<MetricRecord> records;
};

/// Generic numeric table (heatmaps, error distributions, summaries).
/// When row_labels is non-empty it supplies a leading text column.
struct Table {
  std::string filename;
  std::vector<std::string> header;
  std::vector<std::string> row_labels;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  std::string name;
  ExperimentConfig config;
  std::vector<std::uint64_t> seeds;        // seeds the runs consumed
  std::vector<Verdict> verdicts;           // asserted checks
  std::vector<std::pair<std::string, double>> measurements;  // report-only
  std::vector<MetricsFile> metrics;
  std::vector<Table> tables;

  bool all_pass() const {
    for (const Verdict& v : verdicts)
      if (!v.pass) return false;
    return true;
  }
};

/// Mirror-construction runs with the r = log pi objective for
/// tau in {0.25, 0.5, 2, 4}; asserts the final D_JS[did(pi*, pi_ref) || pi]
/// falls below the encode threshold for every tau.
ExperimentReport run_encode_check(const ExperimentConfig& cfg);

/// Trains DPO (log-ratio, beta = 1) and every baseline over its
/// hyper-parameter grid on the same mirror dataset, selecting each
/// objective's best run by the minimum D_JS[pi* || pi] reached during
/// training.  Asserts DPO's best divergence and the 10x separation from
/// every baseline, plus the trained-vs-oracle fixed-point match and the
/// oracle power-law.
ExperimentReport run_objective_comparison(const ExperimentConfig& cfg);

/// Log-likelihood change under DPO.  Case 1 (y_w from the reference):
/// E[log pi(y_l)] must strictly decrease for beta in {0.05 .. 5}.  Case 2
/// (y_l from the reference): E[log pi(y_w)] must strictly increase for
/// beta in {1 .. 32}.  Each beta's verdict covers the trained policy and
/// 100 closed-form oracle instances.
ExperimentReport run_lld(const ExperimentConfig& cfg);

/// Sharpening the sampling distributions (alpha = 2) must strictly raise
/// KL[pi_ref || pi] at every shared beta, and doubling beta on sharpened
/// data must restore the divergence within the relative tolerance; both
/// checked on trained policies and closed-form oracles.
ExperimentReport run_exploration(const ExperimentConfig& cfg);

/// Heatmaps of converged D_JS[pi* || pi] over (data exponent, reward scale)
/// for the optimal-rejected and optimal-chosen constructions, seed-averaged;
/// asserts each row's argmin lies within one grid cell of the diagonal.
ExperimentReport run_optimal_data_sweep(const ExperimentConfig& cfg);

/// Expected log-margin ordering (target > reference > rejected) and the KL
/// triangle inequality KL[ref||l] + KL[l||*] > KL[ref||*], on the trained
/// policy and on 100 oracle instances.
ExperimentReport run_margin_triangle(const ExperimentConfig& cfg);

/// Reports (never asserts) how often H(did(pi*, pi_ref)) falls on the
/// predicted side of H(pi_ref) for reinforcing (tau < 1) and smoothing
/// (tau > 1) targets, over many reference draws.
ExperimentReport run_entropy_claim(const ExperimentConfig& cfg);

/// Projected-gradient training on the mirror dataset from a uniform
/// initialization: asserts the per-step raw-direction sign structure, the
/// per-step DPO-loss descent, checkpoint monotonicity of E[log pi(y_w)],
/// the final-above-initial chosen log-likelihood, and a decreasing DPO-loss
/// trend.
ExperimentReport run_dpo_pg_properties(const ExperimentConfig& cfg);

/// Importance-sampling entropy estimator against the exact entropy:
/// median absolute error non-increasing over sample counts
/// {64, 256, 1024, 4096} (25 seeds), final median under the pre-registered
/// bound, and the exactly-zero expectation term when policy == reference.
ExperimentReport run_entropy_estimator_validation(const ExperimentConfig& cfg);

/// All experiment names in dispatch order.
const std::vector<std::string>& experiment_names();

/// Dispatches by name; throws std::invalid_argument for unknown names.
ExperimentReport run_experiment(const std::string& name,
                                const ExperimentConfig& cfg);

}  // namespace didlab
