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
#include <limits>
#include <vector>

#include "didlab/objectives.hpp"
#include "didlab/policy.hpp"
#include "didlab/synthesis.hpp"

namespace didlab {

/// RMSprop with plain squared-gradient accumulation (no momentum).
/// Constants: smoothing 0.99, epsilon 1e-8 -- the framework-family defaults,
/// stated here because only the optimizer itself is prescribed upstream.
struct OptimizerState {
  std::vector<double> square_avg;
  long step_count = 0;
  double lr = 0.001;
  double smoothing = 0.99;
  double epsilon = 1e-8;
  double clip_norm = 1.0;
};

/// grad scaled by min(1, max_norm / ||grad||_2); never increases the norm.
std::vector<double> clip_grad(std::vector<double> grad, double max_norm);

/// square_avg <- s * square_avg + (1-s) * grad^2;
/// theta <- theta - lr * grad / (sqrt(square_avg) + eps).
void rmsprop_step(OptimizerState& state, std::vector<double>& theta,
                  const std::vector<double>& grad);

/// Projected direction g = grad_w - (max(0, grad_w . grad_l) / ||grad_l||^2)
/// * grad_l.  Guarantees g . grad_l <= 0 and g . grad_w >= 0, so stepping
/// along -g descends the chosen-NLL while never descending the rejected-NLL.
/// Degenerate ||grad_l|| < 1e-12 falls back to grad_w (the alpha = 0 branch
/// is the continuous limit).
std::vector<double> dpo_pg_direction(const std::vector<double>& grad_w,
                                     const std::vector<double>& grad_l);

enum class TrainMode { kStandard, kDpoPg };
enum class InitPolicy { kReference, kUniform };

struct TrainConfig {
  long steps = 10000;
  int batch_size = 512;
  ObjectiveSpec objective;
  SynthesisConfig synthesis;
  long record_every = 50;
  std::uint64_t seed = 42;
  double learning_rate = 0.001;
  double clip_norm = 1.0;
  double rms_smoothing = 0.99;
  double rms_epsilon = 1e-8;
  InitPolicy init = InitPolicy::kReference;
  /// When >= 0, logits are additionally averaged over all steps > this
  /// index (tail average; the standard estimator of a stochastic fixed
  /// point under a constant learning rate).
  long average_tail_from = -1;

  void validate() const;  // throws std::invalid_argument
};

struct MetricRecord {
  long step = 0;
  double loss = 0.0;
  double js_to_target = 0.0;       // D_JS[pi* || pi]
  double js_to_did = 0.0;          // D_JS[did(pi*, pi_ref) || pi]
  double kl_ref_to_policy = 0.0;   // KL[pi_ref || pi]
  double mean_logp_chosen = 0.0;   // E_{pi_w}[log pi], exact sum over K
  double mean_logp_rejected = 0.0; // E_{pi_l}[log pi], exact sum over K
  double did_entropy_exact = 0.0;  // H(did(pi, pi_ref))
  double grad_dot_w = 0.0;         // direction . grad of chosen batch NLL
  double grad_dot_l = 0.0;         // direction . grad of rejected batch NLL
};

struct TrainResult {
  std::vector<MetricRecord> records;
  MetricRecord initial;  // pre-training snapshot; never emitted to files
  Logits final_logits;
  Logits averaged_logits;  // tail average; only set when requested
  bool has_averaged = false;
  bool diverged = false;

  double min_js_to_target = std::numeric_limits<double>::infinity();
  double mean_js_last50 = 0.0;  // mean js_to_target over the last 50 steps

  // Per-step tallies of the projected-direction sign structure and of the
  // directional derivative of the DPO loss (beta = 0.1) along the update,
  // evaluated on the raw direction before clipping and preconditioning.
  long sign_violations_w = 0;
  long sign_violations_l = 0;
  long dirderiv_violations = 0;
  double max_dirderiv = -std::numeric_limits<double>::infinity();

  // Distributions of the setup, for downstream verdicts.
  SimplexDist reference_dist;
  SimplexDist target_dist;
  SimplexDist did_dist;
  SimplexDist chosen_dist;
  SimplexDist rejected_dist;
};

/// Runs `steps` iterations of: sample fresh batch -> gradient (objective
/// gradient in standard mode, projected chosen/rejected NLL direction in
/// dpo-pg mode) -> clip -> rmsprop.  Fully deterministic per config.
/// A non-finite loss or gradient aborts the run with a diagnostic record
/// and diverged = true.
TrainResult train_run(const TrainConfig& config, TrainMode mode);

}  // namespace didlab
