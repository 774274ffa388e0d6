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

#include <optional>
#include <string>
#include <vector>

#include "didlab/policy.hpp"
#include "didlab/synthesis.hpp"

namespace didlab {

/// Preference-optimization objectives.  With s_y = log pi(y),
/// r_y = log pi(y) - log pi_ref(y) and ds = s_w - s_l, the per-pair losses
/// are
///
///   dpo      -log sigmoid(beta * (r_w - r_l))
///   log-pi   -log sigmoid(ds)
///   slic     max(0, beta - ds) + lambda * (-s_w)
///            (hinge margin beta plus a chosen-likelihood regularizer,
///            following the SLiC calibration loss; "beta" is a margin here)
///   orpo     -s_w + beta * (-log sigmoid(log odds(y_w) - log odds(y_l))),
///            odds(y) = pi(y) / (1 - pi(y)) using exact class probabilities
///   simpo    -log sigmoid(beta * ds - gamma), no length normalization
///            (a single-class outcome has length 1)
///   cal-dpo  -log sigmoid(r_w - r_l) + (r_w - 1/(2 beta))^2
///                                    + (r_l + 1/(2 beta))^2
enum class ObjectiveKind { kDpo, kLogPi, kSlic, kOrpo, kSimpo, kCalDpo };

std::string to_string(ObjectiveKind kind);
std::optional<ObjectiveKind> objective_kind_from_string(const std::string& s);

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::kDpo;
  double beta = 1.0;
  double gamma = 0.0;   // simpo target margin
  double lambda = 0.0;  // slic regularizer weight

  void validate() const;  // throws std::invalid_argument
};

struct LossGrad {
  double loss = 0.0;          // mean per-pair loss over the batch
  std::vector<double> grad;   // d loss / d theta, length K
};

/// Mean per-pair loss and its exact gradient with respect to the policy
/// logits, via d log pi(i) / d theta_j = 1[i=j] - pi(j).  Per-pair
/// contributions are accumulated in batch order (fixed reduction order for
/// bit reproducibility).
LossGrad loss_and_grad(const ObjectiveSpec& spec, const Logits& theta,
                       const Logits& theta_ref, const PreferenceBatch& batch);

/// Central-difference gradient (loss(theta + h e_j) - loss(theta - h e_j))
/// / (2h), the verification oracle for loss_and_grad.
std::vector<double> finite_diff_grad(const ObjectiveSpec& spec,
                                     const Logits& theta,
                                     const Logits& theta_ref,
                                     const PreferenceBatch& batch, double h);

/// The log-ratio reward beta * (log pi(y) - log pi_ref(y)).
double implicit_reward(const Logits& theta, const Logits& theta_ref, int y,
                       double beta);

}  // namespace didlab
