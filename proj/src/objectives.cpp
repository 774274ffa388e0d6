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

#include "didlab/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace didlab {

namespace {

// -log sigmoid(x) = softplus(-x), stable on both tails.
double neg_log_sigmoid(double x) {
  if (x > 0.0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 - pi(y)) from log pi(y); exact through expm1 when pi(y) is close
// to 1.
double log_one_minus_prob(double log_p) {
  return std::log(-std::expm1(log_p));
}

}  // namespace

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kDpo: return "dpo";
    case ObjectiveKind::kLogPi: return "log-pi";
    case ObjectiveKind::kSlic: return "slic";
    case ObjectiveKind::kOrpo: return "orpo";
    case ObjectiveKind::kSimpo: return "simpo";
    case ObjectiveKind::kCalDpo: return "cal-dpo";
  }
  return "unknown";
}

std::optional<ObjectiveKind> objective_kind_from_string(const std::string& s) {
  if (s == "dpo") return ObjectiveKind::kDpo;
  if (s == "log-pi") return ObjectiveKind::kLogPi;
  if (s == "slic") return ObjectiveKind::kSlic;
  if (s == "orpo") return ObjectiveKind::kOrpo;
  if (s == "simpo") return ObjectiveKind::kSimpo;
  if (s == "cal-dpo") return ObjectiveKind::kCalDpo;
  return std::nullopt;
}

void ObjectiveSpec::validate() const {
  switch (kind) {
    case ObjectiveKind::kLogPi:
      break;  // no hyper-parameters
    case ObjectiveKind::kSlic:
      if (beta <= 0.0) throw std::invalid_argument("beta must be > 0");
      if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
      break;
    default:
      if (beta <= 0.0) throw std::invalid_argument("beta must be > 0");
      break;
  }
}

LossGrad loss_and_grad(const ObjectiveSpec& spec, const Logits& theta,
                       const Logits& theta_ref, const PreferenceBatch& batch) {
  spec.validate();
  if (theta.size() != theta_ref.size())
    throw std::invalid_argument("policy and reference lengths must match");
  if (batch.size() < 1) throw std::invalid_argument("batch must be non-empty");

  const int k = theta.size();
  const std::vector<double> logp = log_softmax(theta);
  const std::vector<double> logr = log_softmax(theta_ref);
  std::vector<double> prob(k);
  for (int i = 0; i < k; ++i) prob[i] = std::exp(logp[i]);

  // Every per-pair gradient decomposes as a_w e_w + a_l e_l + b pi, so the
  // batch gradient needs only the summed coefficients: O(M + K).
  std::vector<double> coeff(k, 0.0);
  double coeff_pi = 0.0;
  double loss_sum = 0.0;

  for (int n = 0; n < batch.size(); ++n) {
    const int w = batch.chosen[n];
    const int l = batch.rejected[n];
    const double ds = logp[w] - logp[l];
    double a_w = 0.0, a_l = 0.0, b = 0.0;

    switch (spec.kind) {
      case ObjectiveKind::kDpo: {
        const double x = spec.beta * (ds - (logr[w] - logr[l]));
        const double s = sigmoid(-x);
        loss_sum += neg_log_sigmoid(x);
        a_w = -s * spec.beta;
        a_l = +s * spec.beta;
        break;
      }
      case ObjectiveKind::kLogPi: {
        const double s = sigmoid(-ds);
        loss_sum += neg_log_sigmoid(ds);
        a_w = -s;
        a_l = +s;
        break;
      }
      case ObjectiveKind::kSlic: {
        const double hinge = spec.beta - ds;
        loss_sum += (hinge > 0.0 ? hinge : 0.0) + spec.lambda * (-logp[w]);
        if (hinge > 0.0) {
          a_w -= 1.0;
          a_l += 1.0;
        }
        a_w -= spec.lambda;
        b += spec.lambda;
        break;
      }
      case ObjectiveKind::kOrpo: {
        const double lo_w = logp[w] - log_one_minus_prob(logp[w]);
        const double lo_l = logp[l] - log_one_minus_prob(logp[l]);
        const double x = lo_w - lo_l;
        const double s = sigmoid(-x);
        loss_sum += -logp[w] + spec.beta * neg_log_sigmoid(x);
        // d log odds(y) / d theta = (e_y - pi) / (1 - pi(y))
        const double cw = spec.beta * s / (-std::expm1(logp[w]));
        const double cl = spec.beta * s / (-std::expm1(logp[l]));
        a_w = -1.0 - cw;
        a_l = +cl;
        b = 1.0 + cw - cl;
        break;
      }
      case ObjectiveKind::kSimpo: {
        const double x = spec.beta * ds - spec.gamma;
        const double s = sigmoid(-x);
        loss_sum += neg_log_sigmoid(x);
        a_w = -s * spec.beta;
        a_l = +s * spec.beta;
        break;
      }
      case ObjectiveKind::kCalDpo: {
        const double r_w = logp[w] - logr[w];
        const double r_l = logp[l] - logr[l];
        const double x = r_w - r_l;
        const double s = sigmoid(-x);
        const double target = 1.0 / (2.0 * spec.beta);
        loss_sum += neg_log_sigmoid(x) + (r_w - target) * (r_w - target) +
                    (r_l + target) * (r_l + target);
        a_w = -s + 2.0 * (r_w - target);
        a_l = +s + 2.0 * (r_l + target);
        b = -(a_w + a_l);  // the (e_y - pi) jacobian of both reward terms
        break;
      }
    }

    coeff[w] += a_w;
    coeff[l] += a_l;
    coeff_pi += b;
  }

  const double inv_m = 1.0 / batch.size();
  LossGrad out;
  out.loss = loss_sum * inv_m;
  out.grad.resize(k);
  for (int i = 0; i < k; ++i)
    out.grad[i] = (coeff[i] + coeff_pi * prob[i]) * inv_m;
  return out;
}

std::vector<double> finite_diff_grad(const ObjectiveSpec& spec,
                                     const Logits& theta,
                                     const Logits& theta_ref,
                                     const PreferenceBatch& batch, double h) {
  if (h <= 0.0) throw std::invalid_argument("h must be > 0");
  std::vector<double> out(theta.size());
  std::vector<double> shifted(theta.vec());
  for (int j = 0; j < theta.size(); ++j) {
    const double orig = shifted[j];
    shifted[j] = orig + h;
    const double up =
        loss_and_grad(spec, Logits(shifted), theta_ref, batch).loss;
    shifted[j] = orig - h;
    const double down =
        loss_and_grad(spec, Logits(shifted), theta_ref, batch).loss;
    shifted[j] = orig;
    out[j] = (up - down) / (2.0 * h);
  }
  return out;
}

double implicit_reward(const Logits& theta, const Logits& theta_ref, int y,
                       double beta) {
  if (beta <= 0.0) throw std::invalid_argument("beta must be > 0");
  if (y < 0 || y >= theta.size())
    throw std::invalid_argument("class index out of range");
  const std::vector<double> logp = log_softmax(theta);
  const std::vector<double> logr = log_softmax(theta_ref);
  return beta * (logp[y] - logr[y]);
}

}  // namespace didlab
