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
#include <vector>

#include "didlab/policy.hpp"
#include "didlab/rng.hpp"

namespace didlab {

/// How the chosen/rejected sampling policies are derived from the reference.
///
///   kMirrorRejected     chosen = reference; rejected logits 2*ref - target,
///                       which makes did(pi_ref, pi_l) equal did(pi*, pi_ref).
///   kIndependentNormals one pair slot is the reference, the other an
///                       independent standard-normal logit draw.
///   kOptimalRejected    chosen = reference; rejected proportional to
///                       pi_ref * (pi_ref / pi*)^beta_data.
///   kOptimalChosen      rejected = reference; chosen proportional to
///                       pi_ref * (pi* / pi_ref)^beta_data.
enum class Construction {
  kMirrorRejected,
  kIndependentNormals,
  kOptimalRejected,
  kOptimalChosen,
};

/// Which pair slot the reference policy occupies when the construction
/// leaves it free (independent normals).
enum class ReferenceSide { kChosen, kRejected };

std::string to_string(Construction c);
std::optional<Construction> construction_from_string(const std::string& s);

struct SynthesisConfig {
  int num_classes = 32;
  double tau = 4.0;    // target temperature, > 0 and != 1
  std::uint64_t seed = 42;
  Construction construction = Construction::kMirrorRejected;
  double alpha = 1.0;      // sampling-sharpening factor, >= 1
  double beta_data = 1.0;  // exponent of the optimal-* constructions, > 0
  ReferenceSide reference_side = ReferenceSide::kChosen;

  void validate() const;  // throws std::invalid_argument
};

/// Reference/target policies plus the two sampling policies for preference
/// pairs.  `chosen` and `rejected` already include the alpha sharpening.
/// Constructions without a temperature-defined target (independent normals)
/// leave has_target false; the converged-policy oracle supplies the target
/// in that case.
struct PolicySetup {
  Logits reference;
  Logits target;
  Logits chosen;
  Logits rejected;
  bool has_target = false;
};

/// Paired chosen/rejected class indices; entries at the same position are
/// always distinct.
struct PreferenceBatch {
  std::vector<int> chosen;
  std::vector<int> rejected;

  int size() const { return static_cast<int>(chosen.size()); }
};

/// K i.i.d. standard-normal logits.
Logits make_reference(int num_classes, Rng& rng);

/// Target logits theta_ref / tau (tau < 1 reinforces, tau > 1 smooths).
Logits make_target(const Logits& theta_ref, double tau);

/// Rejected logits 2*theta_ref - theta_star; aligns did(pi_ref, pi_l) with
/// did(pi*, pi_ref).
Logits make_rejected_mirror(const Logits& theta_ref, const Logits& theta_star);

/// alpha * theta, i.e. sampling from pi^alpha renormalized; amplifies
/// pairwise preference strength by the same alpha.
Logits sharpen(const Logits& theta, double alpha);

/// Logits of pi_l proportional to pi_ref * (pi_ref/pi*)^beta:
/// theta_ref + beta * (theta_ref - theta_star).
Logits optimal_rejected(const Logits& theta_ref, const Logits& theta_star,
                        double beta);

/// Logits of pi_w proportional to pi_ref * (pi*/pi_ref)^beta:
/// theta_ref + beta * (theta_star - theta_ref).
Logits optimal_chosen(const Logits& theta_ref, const Logits& theta_star,
                      double beta);

/// num_pairs pairs with y_w ~ pw and y_l ~ pl, resampling any pair that ties.
/// Throws std::runtime_error after 10^6 consecutive rejections for one slot
/// (degenerate distributions).
PreferenceBatch sample_pairs(const SimplexDist& pw, const SimplexDist& pl,
                             int num_pairs, Rng& rng);

/// Builds the full policy setup for a config (deterministic per seed).
PolicySetup build_setup(const SynthesisConfig& config);

}  // namespace didlab
