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

#include "didlab/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "didlab/rng.hpp"

namespace didlab {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// E_{dist}[log pi], exact sum over the K classes.
double expected_logp(const SimplexDist& dist, const std::vector<double>& logp) {
  double s = 0.0;
  for (int i = 0; i < dist.size(); ++i) s += dist[i] * logp[i];
  return s;
}

}  // namespace

std::vector<double> clip_grad(std::vector<double> grad, double max_norm) {
  if (max_norm <= 0.0) throw std::invalid_argument("max_norm must be > 0");
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
  }
  return grad;
}

void rmsprop_step(OptimizerState& state, std::vector<double>& theta,
                  const std::vector<double>& grad) {
  if (state.square_avg.size() != theta.size() || grad.size() != theta.size())
    throw std::invalid_argument("optimizer state/parameter shape mismatch");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.square_avg[i] = state.smoothing * state.square_avg[i] +
                          (1.0 - state.smoothing) * grad[i] * grad[i];
    theta[i] -= state.lr * grad[i] / (std::sqrt(state.square_avg[i]) +
                                      state.epsilon);
  }
  ++state.step_count;
}

std::vector<double> dpo_pg_direction(const std::vector<double>& grad_w,
                                     const std::vector<double>& grad_l) {
  if (grad_w.size() != grad_l.size())
    throw std::invalid_argument("gradient lengths must match");
  const double norm_l_sq = dot(grad_l, grad_l);
  if (std::sqrt(norm_l_sq) < 1e-12) return grad_w;
  const double alignment = dot(grad_w, grad_l);
  if (alignment <= 0.0) return grad_w;
  std::vector<double> out(grad_w);
  const double scale = alignment / norm_l_sq;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= scale * grad_l[i];
  return out;
}

void TrainConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
  if (clip_norm <= 0.0) throw std::invalid_argument("clip_norm must be > 0");
  if (rms_smoothing <= 0.0 || rms_smoothing >= 1.0)
    throw std::invalid_argument("rms_smoothing must be in (0, 1)");
  if (rms_epsilon <= 0.0) throw std::invalid_argument("rms_epsilon must be > 0");
  objective.validate();
  synthesis.validate();
}

TrainResult train_run(const TrainConfig& config, TrainMode mode) {
  config.validate();

  const PolicySetup setup = build_setup(config.synthesis);
  const int k = setup.reference.size();

  TrainResult result;
  result.reference_dist = softmax(setup.reference);
  result.chosen_dist = softmax(setup.chosen);
  result.rejected_dist = softmax(setup.rejected);
  // Constructions without a temperature target converge to the analytic
  // fixed point of the objective's reward scale; use it as the target.
  result.target_dist =
      setup.has_target
          ? softmax(setup.target)
          : converged_policy_oracle(
                result.reference_dist,
                did(result.chosen_dist, result.rejected_dist),
                config.objective.beta);
  result.did_dist = did(result.target_dist, result.reference_dist);

  std::vector<double> theta = config.init == InitPolicy::kReference
                                  ? setup.reference.vec()
                                  : std::vector<double>(k, 0.0);

  OptimizerState opt;
  opt.square_avg.assign(k, 0.0);
  opt.lr = config.learning_rate;
  opt.smoothing = config.rms_smoothing;
  opt.epsilon = config.rms_epsilon;
  opt.clip_norm = config.clip_norm;

  Rng rng(Rng::derive(config.seed, 0x747261696eULL));

  const ObjectiveSpec dpo_probe{ObjectiveKind::kDpo, 0.1, 0.0, 0.0};

  std::vector<double> js_ring(50, 0.0);
  int ring_count = 0;
  std::vector<double> theta_sum(k, 0.0);
  long theta_sum_count = 0;

  const auto snapshot = [&](long step, double loss, double dot_w,
                            double dot_l) {
    const Logits cur(theta);
    const SimplexDist pi = softmax(cur);
    const std::vector<double> logp = log_softmax(cur);
    MetricRecord rec;
    rec.step = step;
    rec.loss = loss;
    rec.js_to_target = js_divergence(result.target_dist, pi);
    rec.js_to_did = js_divergence(result.did_dist, pi);
    rec.kl_ref_to_policy = kl_divergence(result.reference_dist, pi);
    rec.mean_logp_chosen = expected_logp(result.chosen_dist, logp);
    rec.mean_logp_rejected = expected_logp(result.rejected_dist, logp);
    rec.did_entropy_exact = entropy(did(pi, result.reference_dist));
    rec.grad_dot_w = dot_w;
    rec.grad_dot_l = dot_l;
    return rec;
  };

  result.initial =
      snapshot(0, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0);

  for (long step = 1; step <= config.steps; ++step) {
    const PreferenceBatch batch = sample_pairs(
        result.chosen_dist, result.rejected_dist, config.batch_size, rng);

    const Logits cur(theta);
    const SimplexDist pi = softmax(cur);

    // Batch negative-log-likelihood gradients of the chosen and rejected
    // sides: grad of -(1/M) sum log pi(y) is pi - empirical frequency.
    std::vector<double> grad_w(pi.vec());
    std::vector<double> grad_l(pi.vec());
    const double inv_m = 1.0 / config.batch_size;
    for (int n = 0; n < batch.size(); ++n) {
      grad_w[batch.chosen[n]] -= inv_m;
      grad_l[batch.rejected[n]] -= inv_m;
    }

    double loss = 0.0;
    std::vector<double> direction;
    if (mode == TrainMode::kStandard) {
      LossGrad lg = loss_and_grad(config.objective, cur, setup.reference, batch);
      loss = lg.loss;
      direction = std::move(lg.grad);
    } else {
      direction = dpo_pg_direction(grad_w, grad_l);
      // The DPO loss the projected direction must still descend.
      const LossGrad probe =
          loss_and_grad(dpo_probe, cur, setup.reference, batch);
      loss = probe.loss;
      const double dirderiv = -dot(probe.grad, direction);
      if (dirderiv > result.max_dirderiv) result.max_dirderiv = dirderiv;
      if (dirderiv > 1e-10) ++result.dirderiv_violations;
    }

    const double dot_w = dot(direction, grad_w);
    const double dot_l = dot(direction, grad_l);
    if (mode == TrainMode::kDpoPg) {
      if (dot_w < -1e-10) ++result.sign_violations_w;
      if (dot_l > 1e-10) ++result.sign_violations_l;
    }

    if (!std::isfinite(loss) || !all_finite(direction)) {
      result.diverged = true;
      result.records.push_back(snapshot(step, loss, dot_w, dot_l));
      break;
    }

    const std::vector<double> clipped = clip_grad(direction, config.clip_norm);
    rmsprop_step(opt, theta, clipped);

    const SimplexDist pi_new = softmax(Logits(theta));
    const double js_now = js_divergence(result.target_dist, pi_new);
    if (js_now < result.min_js_to_target) result.min_js_to_target = js_now;
    js_ring[step % 50] = js_now;
    if (ring_count < 50) ++ring_count;

    if (config.average_tail_from >= 0 && step > config.average_tail_from) {
      for (int i = 0; i < k; ++i) theta_sum[i] += theta[i];
      ++theta_sum_count;
    }

    if (step % config.record_every == 0 || step == config.steps)
      result.records.push_back(snapshot(step, loss, dot_w, dot_l));
  }

  double js_tail = 0.0;
  for (int i = 0; i < ring_count; ++i) js_tail += js_ring[i];
  result.mean_js_last50 = ring_count > 0 ? js_tail / ring_count : 0.0;

  result.final_logits = Logits(theta);
  if (theta_sum_count > 0) {
    std::vector<double> avg(k);
    for (int i = 0; i < k; ++i) avg[i] = theta_sum[i] / theta_sum_count;
    result.averaged_logits = Logits(std::move(avg));
    result.has_averaged = true;
  }
  return result;
}

}  // namespace didlab
