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
#include <vector>

#include "didlab/rng.hpp"

namespace didlab {

/// Logit vector parameterizing a categorical policy pi(i) = exp(theta_i)/Z
/// over K >= 2 classes.  All entries must be finite.
class Logits {
 public:
  Logits() = default;
  explicit Logits(std::vector<double> theta);  // throws std::invalid_argument

  int size() const { return static_cast<int>(theta_.size()); }
  double operator[](int i) const { return theta_[i]; }
  const std::vector<double>& vec() const { return theta_; }

 private:
  std::vector<double> theta_;
};

/// Strictly positive probability vector on the K-simplex.  The checked
/// constructor enforces full support (entries > 1e-300, divisions by these
/// probabilities must stay finite) and normalization within 1e-9.
class SimplexDist {
 public:
  SimplexDist() = default;
  explicit SimplexDist(std::vector<double> p);  // throws std::invalid_argument

  /// For operations whose output is normalized and positive by construction.
  static SimplexDist unchecked(std::vector<double> p);

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[i]; }
  const std::vector<double>& vec() const { return p_; }

 private:
  std::vector<double> p_;
};

/// All divergences and entropies below are in nats.

/// Numerically stabilized softmax (max-subtraction; logits up to +-1000 must
/// not overflow).
SimplexDist softmax(const Logits& theta);

/// log(softmax(theta)) computed as theta - max - log-sum-exp.
std::vector<double> log_softmax(const Logits& theta);

/// n i.i.d. class indices from dist; deterministic given the stream state.
std::vector<int> sample(const SimplexDist& dist, int n, Rng& rng);

/// Differential Information Distribution: the normalized ratio distribution
/// (target_i / reference_i) / Z with Z = sum_j target_j / reference_j.
/// Renormalizing did(p, q)_i * q_i recovers p (Bayesian update).
SimplexDist did(const SimplexDist& target, const SimplexDist& reference);

/// KL[p || q] = sum p log(p/q); nonnegative, zero iff p = q.
double kl_divergence(const SimplexDist& p, const SimplexDist& q);

/// Jensen-Shannon divergence; symmetric, bounded by ln 2.
double js_divergence(const SimplexDist& p, const SimplexDist& q);

/// Bradley-Terry probability that y1 is preferred over y2 when chosen
/// responses are drawn from pw and rejected ones from pl:
///   pw(y1) pl(y2) / (pw(y1) pl(y2) + pw(y2) pl(y1)).
/// Requires y1 != y2 (preference is over distinct responses).
double bt_pref_prob(const SimplexDist& pw, const SimplexDist& pl, int y1,
                    int y2);

/// Shannon entropy, maximal (ln K) at uniform.
double entropy(const SimplexDist& p);

struct DidEntropyEstimate {
  double value = 0.0;          // estimated H(did(policy, reference)), nats
  double log_partition = 0.0;  // estimated log Z, nats
  int num_samples = 0;
};

/// Importance-sampling estimate of the entropy of did(policy, reference)
/// from num_samples >= 2 draws y_i ~ policy:
///   log Z     ~ logsumexp_i(-log reference(y_i)) - log(num_samples)
///   E[log(policy/reference)] ~ self-normalized mean with weights
///                              proportional to 1/reference(y_i)
///   value = log Z - E.
/// When policy == reference the expectation term is identically zero and the
/// estimate reduces to the log-partition estimate of ln K.
DidEntropyEstimate did_entropy_is(const SimplexDist& policy,
                                  const SimplexDist& reference,
                                  int num_samples, Rng& rng);

/// Closed-form fixed point of preference optimization with the log-ratio
/// reward of scale beta on data whose implicit preference distribution is
/// pref_dist: the normalization of reference(y) * pref_dist(y)^(1/beta).
SimplexDist converged_policy_oracle(const SimplexDist& reference,
                                    const SimplexDist& pref_dist, double beta);

}  // namespace didlab
