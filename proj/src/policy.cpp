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

#include "didlab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace didlab {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

void require_same_size(const SimplexDist& p, const SimplexDist& q) {
  require(p.size() == q.size(), "distributions must have the same length");
}

double log_sum_exp(const std::vector<double>& a) {
  const double m = *std::max_element(a.begin(), a.end());
  double s = 0.0;
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

// Normalizes exp(logits) into a SimplexDist.
SimplexDist softmax_of(const std::vector<double>& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return SimplexDist::unchecked(std::move(p));
}

}  // namespace

Logits::Logits(std::vector<double> theta) : theta_(std::move(theta)) {
  require(theta_.size() >= 2, "logits need at least 2 classes");
  for (double v : theta_)
    require(std::isfinite(v), "logits must be finite");
}

SimplexDist::SimplexDist(std::vector<double> p) : p_(std::move(p)) {
  require(p_.size() >= 2, "distribution needs at least 2 classes");
  double sum = 0.0;
  for (double v : p_) {
    require(std::isfinite(v), "probabilities must be finite");
    require(v > 1e-300, "distribution must have full support");
    sum += v;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "probabilities must sum to 1");
}

SimplexDist SimplexDist::unchecked(std::vector<double> p) {
  SimplexDist d;
  d.p_ = std::move(p);
  return d;
}

SimplexDist softmax(const Logits& theta) { return softmax_of(theta.vec()); }

std::vector<double> log_softmax(const Logits& theta) {
  const double lz = log_sum_exp(theta.vec());
  std::vector<double> out(theta.vec());
  for (double& v : out) v -= lz;
  return out;
}

std::vector<int> sample(const SimplexDist& dist, int n, Rng& rng) {
  require(n >= 1, "sample count must be >= 1");
  const int k = dist.size();
  std::vector<double> cdf(k);
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    acc += dist[i];
    cdf[i] = acc;
  }
  cdf[k - 1] = std::max(cdf[k - 1], 1.0);  // guard against rounding below 1
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    out[i] = std::min(static_cast<int>(it - cdf.begin()), k - 1);
  }
  return out;
}

SimplexDist did(const SimplexDist& target, const SimplexDist& reference) {
  require_same_size(target, reference);
  // Ratios in log space; the shared normalization happens in softmax_of.
  std::vector<double> log_ratio(target.size());
  for (int i = 0; i < target.size(); ++i)
    log_ratio[i] = std::log(target[i]) - std::log(reference[i]);
  return softmax_of(log_ratio);
}

double kl_divergence(const SimplexDist& p, const SimplexDist& q) {
  require_same_size(p, q);
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i)
    s += p[i] * (std::log(p[i]) - std::log(q[i]));
  return s;
}

double js_divergence(const SimplexDist& p, const SimplexDist& q) {
  require_same_size(p, q);
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    s += 0.5 * p[i] * (std::log(p[i]) - std::log(m)) +
         0.5 * q[i] * (std::log(q[i]) - std::log(m));
  }
  return s;
}

double bt_pref_prob(const SimplexDist& pw, const SimplexDist& pl, int y1,
                    int y2) {
  require_same_size(pw, pl);
  require(y1 >= 0 && y1 < pw.size() && y2 >= 0 && y2 < pw.size(),
          "class index out of range");
  require(y1 != y2, "preference requires an unordered pair of distinct responses");
  // sigma(log pw(y1) pl(y2) - log pw(y2) pl(y1)), stable for tiny products.
  const double x = std::log(pw[y1]) + std::log(pl[y2]) - std::log(pw[y2]) -
                   std::log(pl[y1]);
  return 1.0 / (1.0 + std::exp(-x));
}

double entropy(const SimplexDist& p) {
  double h = 0.0;
  for (int i = 0; i < p.size(); ++i) h -= p[i] * std::log(p[i]);
  return h;
}

DidEntropyEstimate did_entropy_is(const SimplexDist& policy,
                                  const SimplexDist& reference,
                                  int num_samples, Rng& rng) {
  require_same_size(policy, reference);
  require(num_samples >= 2, "estimator needs at least 2 samples");
  const std::vector<int> draws = sample(policy, num_samples, rng);

  // a_i = -log reference(y_i); both the log-partition estimate and the
  // self-normalized importance weights derive from it.
  std::vector<double> a(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i)
    a[i] = -std::log(reference[draws[i]]);
  const double m = *std::max_element(a.begin(), a.end());

  double sum_w = 0.0;
  double sum_wf = 0.0;
  double sum_exp = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double w = std::exp(a[i] - m);
    sum_exp += w;
    const double f = std::log(policy[draws[i]]) - std::log(reference[draws[i]]);
    sum_w += w;
    sum_wf += w * f;
  }
  const double log_z = m + std::log(sum_exp) - std::log(num_samples);
  const double e_hat = sum_wf / sum_w;

  DidEntropyEstimate est;
  est.value = log_z - e_hat;
  est.log_partition = log_z;
  est.num_samples = num_samples;
  return est;
}

SimplexDist converged_policy_oracle(const SimplexDist& reference,
                                    const SimplexDist& pref_dist,
                                    double beta) {
  require_same_size(reference, pref_dist);
  require(beta > 0.0, "beta must be > 0");
  std::vector<double> logits(reference.size());
  for (int i = 0; i < reference.size(); ++i)
    logits[i] = std::log(reference[i]) + std::log(pref_dist[i]) / beta;
  return softmax_of(logits);
}

}  // namespace didlab
