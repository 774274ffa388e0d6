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

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "didlab/objectives.hpp"
#include "didlab/policy.hpp"
#include "didlab/rng.hpp"
#include "didlab/synthesis.hpp"

using namespace didlab;

namespace {

Logits random_logits(int k, Rng& rng, double scale = 1.0) {
  std::vector<double> theta(k);
  for (double& v : theta) v = scale * rng.normal();
  return Logits(std::move(theta));
}

PreferenceBatch random_batch(int k, int m, Rng& rng) {
  PreferenceBatch batch;
  batch.chosen.resize(m);
  batch.rejected.resize(m);
  for (int i = 0; i < m; ++i) {
    const int w = static_cast<int>(rng.uniform() * k);
    int l = static_cast<int>(rng.uniform() * (k - 1));
    if (l >= w) ++l;
    batch.chosen[i] = w;
    batch.rejected[i] = l;
  }
  return batch;
}

const std::vector<ObjectiveSpec> kAllSpecs = {
    {ObjectiveKind::kDpo, 0.7, 0.0, 0.0},
    {ObjectiveKind::kLogPi, 0.0, 0.0, 0.0},
    {ObjectiveKind::kSlic, 1.3, 0.0, 0.4},
    {ObjectiveKind::kOrpo, 0.6, 0.0, 0.0},
    {ObjectiveKind::kSimpo, 2.0, 0.8, 0.0},
    {ObjectiveKind::kCalDpo, 0.05, 0.0, 0.0},
};

double max_rel_err(const std::vector<double>& analytic,
                   const std::vector<double>& numeric) {
  double max_abs = 1e-12;
  for (double a : analytic) max_abs = std::max(max_abs, std::abs(a));
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / max_abs);
  return worst;
}

}  // namespace

TEST_CASE("dpo and log-pi at the neutral point give ln 2") {
  Rng rng(1);
  const Logits ref = random_logits(8, rng);
  const PreferenceBatch batch = random_batch(8, 32, rng);

  const LossGrad dpo = loss_and_grad({ObjectiveKind::kDpo, 2.5, 0.0, 0.0},
                                     ref, ref, batch);
  CHECK(dpo.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const Logits uniform(std::vector<double>(8, 0.0));
  const LossGrad lp = loss_and_grad({ObjectiveKind::kLogPi, 0.0, 0.0, 0.0},
                                    uniform, ref, batch);
  CHECK(lp.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("dpo gradient at theta = theta_ref, single pair") {
  Rng rng(2);
  const int k = 6;
  const Logits ref = random_logits(k, rng);
  PreferenceBatch batch;
  batch.chosen = {2};
  batch.rejected = {4};
  const double beta = 1.7;
  const LossGrad lg =
      loss_and_grad({ObjectiveKind::kDpo, beta, 0.0, 0.0}, ref, ref, batch);
  // At the neutral point the sigmoid is 1/2 and the pair difference leaves
  // only the chosen/rejected coordinates.
  for (int j = 0; j < k; ++j) {
    const double expected =
        0.5 * beta * ((j == 4 ? 1.0 : 0.0) - (j == 2 ? 1.0 : 0.0));
    CHECK(lg.grad[j] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients match central differences for every kind") {
  Rng rng(3);
  for (const ObjectiveSpec& spec : kAllSpecs) {
    for (int k : {4, 32}) {
      for (int m : {1, 64}) {
        for (int trial = 0; trial < 5; ++trial) {
          const Logits theta = random_logits(k, rng);
          const Logits ref = random_logits(k, rng);
          const PreferenceBatch batch = random_batch(k, m, rng);
          const LossGrad lg = loss_and_grad(spec, theta, ref, batch);
          const std::vector<double> fd =
              finite_diff_grad(spec, theta, ref, batch, 1e-5);
          CHECK(max_rel_err(lg.grad, fd) < 1e-5);
        }
      }
    }
  }
}

TEST_CASE("finite differences: h sweep is V-shaped, shift direction is flat") {
  Rng rng(4);
  const ObjectiveSpec spec{ObjectiveKind::kDpo, 1.0, 0.0, 0.0};
  const Logits theta = random_logits(16, rng);
  const Logits ref = random_logits(16, rng);
  const PreferenceBatch batch = random_batch(16, 32, rng);
  const LossGrad lg = loss_and_grad(spec, theta, ref, batch);

  const double e3 = max_rel_err(lg.grad, finite_diff_grad(spec, theta, ref, batch, 1e-3));
  const double e5 = max_rel_err(lg.grad, finite_diff_grad(spec, theta, ref, batch, 1e-5));
  const double e7 = max_rel_err(lg.grad, finite_diff_grad(spec, theta, ref, batch, 1e-7));
  CHECK(e5 < e3);
  CHECK(e5 < e7);

  // Directional derivative along the all-ones direction vanishes.
  const double h = 1e-6;
  std::vector<double> up(theta.vec()), down(theta.vec());
  for (double& v : up) v += h;
  for (double& v : down) v -= h;
  const double dd = (loss_and_grad(spec, Logits(up), ref, batch).loss -
                     loss_and_grad(spec, Logits(down), ref, batch).loss) /
                    (2.0 * h);
  CHECK(std::abs(dd) < 1e-8);
}

TEST_CASE("every loss is invariant to a constant logit shift") {
  Rng rng(5);
  for (const ObjectiveSpec& spec : kAllSpecs) {
    const Logits theta = random_logits(12, rng);
    const Logits ref = random_logits(12, rng);
    const PreferenceBatch batch = random_batch(12, 16, rng);
    std::vector<double> shifted(theta.vec());
    for (double& v : shifted) v += 7.25;
    const double base = loss_and_grad(spec, theta, ref, batch).loss;
    const double moved = loss_and_grad(spec, Logits(shifted), ref, batch).loss;
    CHECK(std::abs(base - moved) < 1e-10);
  }
}

TEST_CASE("pair swap: margin losses obey loss(x) + loss(-x) >= 2 ln 2") {
  Rng rng(6);
  for (ObjectiveKind kind :
       {ObjectiveKind::kDpo, ObjectiveKind::kLogPi, ObjectiveKind::kSimpo}) {
    const ObjectiveSpec spec{kind, 1.4, 0.0, 0.0};
    const Logits theta = random_logits(10, rng);
    const Logits ref = random_logits(10, rng);
    const PreferenceBatch batch = random_batch(10, 24, rng);
    PreferenceBatch swapped;
    swapped.chosen = batch.rejected;
    swapped.rejected = batch.chosen;
    const double fwd = loss_and_grad(spec, theta, ref, batch).loss;
    const double bwd = loss_and_grad(spec, theta, ref, swapped).loss;
    CHECK(fwd + bwd >= 2.0 * std::log(2.0) - 1e-12);
    CHECK(fwd > 0.0);
  }

  // Equality exactly at zero margin (dpo at the reference, gamma-free).
  Rng rng2(7);
  const Logits ref = random_logits(10, rng2);
  const PreferenceBatch batch = random_batch(10, 8, rng2);
  const double at_ref =
      loss_and_grad({ObjectiveKind::kDpo, 1.0, 0.0, 0.0}, ref, ref, batch).loss;
  CHECK(2.0 * at_ref == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("implicit_reward: zero at reference, linear in beta, oracle identity") {
  Rng rng(8);
  const Logits ref = random_logits(16, rng);
  for (int y = 0; y < 16; ++y)
    CHECK(implicit_reward(ref, ref, y, 0.5) == doctest::Approx(0.0).epsilon(1e-12));

  const Logits theta = random_logits(16, rng);
  const double r1 = implicit_reward(theta, ref, 3, 1.0);
  const double r2 = implicit_reward(theta, ref, 3, 2.0);
  CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-12));

  // At the converged policy for data did(pi_ref, pi_l), reward differences
  // reproduce the preference-distribution log-ratios.
  const Logits rejected = random_logits(16, rng);
  const double beta = 0.7;
  const SimplexDist p_star = did(softmax(ref), softmax(rejected));
  const SimplexDist conv = converged_policy_oracle(softmax(ref), p_star, beta);
  std::vector<double> conv_logits(16);
  for (int i = 0; i < 16; ++i) conv_logits[i] = std::log(conv[i]);
  const Logits conv_theta(conv_logits);
  for (int y1 = 0; y1 < 4; ++y1) {
    for (int y2 = 8; y2 < 12; ++y2) {
      const double lhs = implicit_reward(conv_theta, ref, y1, beta) -
                         implicit_reward(conv_theta, ref, y2, beta);
      const double rhs = std::log(p_star[y1]) - std::log(p_star[y2]);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  }
}

TEST_CASE("objective validation") {
  Rng rng(9);
  const Logits theta = random_logits(4, rng);
  const PreferenceBatch batch = random_batch(4, 4, rng);
  CHECK_THROWS_AS(
      loss_and_grad({ObjectiveKind::kDpo, -1.0, 0.0, 0.0}, theta, theta, batch),
      std::invalid_argument);
  CHECK_THROWS_AS(
      loss_and_grad({ObjectiveKind::kSlic, 1.0, 0.0, -0.1}, theta, theta, batch),
      std::invalid_argument);
  CHECK_THROWS_AS(finite_diff_grad({ObjectiveKind::kDpo, 1.0, 0.0, 0.0}, theta,
                                   theta, batch, 0.0),
                  std::invalid_argument);
  CHECK(objective_kind_from_string("cal-dpo") == ObjectiveKind::kCalDpo);
  CHECK(!objective_kind_from_string("nope").has_value());
}
