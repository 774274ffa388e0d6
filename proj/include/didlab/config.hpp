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

#include <cstdint>
#include <optional>
#include <string>

#include "didlab/objectives.hpp"
#include "didlab/synthesis.hpp"

namespace didlab {

inline constexpr const char* kToolVersion = "0.1.0";

/// Pass/fail thresholds for the experiment verdicts.  Values are the
/// pre-registered defaults; a config file may override them.
struct Thresholds {
  double encode_final_js = 1e-3;      // encode-check: final D_JS[DID || pi]
  double dpo_best_js = 1e-3;          // comparison: DPO best D_JS[pi* || pi]
  double baseline_separation = 10.0;  // comparison: baseline best / DPO best
  double oracle_match_js = 1e-6;      // trained-vs-oracle D_JS
  double power_law_tv = 1e-9;         // oracle power-law, total variation
  double kl_restore_rel = 0.05;       // exploration: relative KL match
  int heatmap_diag_cells = 1;         // optimal-data: argmin offset from diag
  double sign_dot_tol = 1e-10;        // dpo-pg: raw-direction dot tolerance
  double logp_monotone_tol = 1e-6;    // dpo-pg: checkpoint monotonicity
  double grad_check_rel_err = 1e-5;   // finite-difference oracle, max-norm rel
  double estimator_median_err = 0.02; // IS entropy: median |err| at 4096
                                      // (pre-registered pilot bound)
};

/// Experiment configuration with the synthetic-run defaults: K = 32,
/// batch 512, learning rate 0.001, clipping at norm 1.0, seed 42.
struct ExperimentConfig {
  int num_classes = 32;
  int batch_size = 512;
  double learning_rate = 0.001;
  double clip_norm = 1.0;
  std::uint64_t seed = 42;
  long record_every = 50;
  std::optional<long> steps;  // per-experiment default when unset
  double tau = 4.0;
  double alpha = 1.0;
  double beta_data = 1.0;
  Construction construction = Construction::kMirrorRejected;
  ReferenceSide reference_side = ReferenceSide::kChosen;
  ObjectiveSpec objective{ObjectiveKind::kDpo, 1.0, 0.0, 0.0};
  Thresholds thresholds;

  void validate() const;  // throws std::invalid_argument naming the field
};

/// Parses a JSON config file.  An empty (or whitespace-only) file yields the
/// defaults.  Unknown keys and out-of-range values raise
/// std::invalid_argument naming the offending field.
ExperimentConfig parse_config(const std::string& path);

/// Same as parse_config but from a string (used by tests).
ExperimentConfig parse_config_text(const std::string& text);

/// Canonical JSON serialization; parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a hash of the canonical serialization; changes iff any field does.
std::uint64_t config_hash(const ExperimentConfig& config);
std::string config_hash_hex(const ExperimentConfig& config);

}  // namespace didlab
