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

#include "didlab/optimizer.hpp"
#include "didlab/rng.hpp"

using namespace didlab;

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

TrainConfig small_config() {
  TrainConfig tc;
  tc.steps = 50;
  tc.batch_size = 64;
  tc.record_every = 10;
  tc.objective = {ObjectiveKind::kDpo, 1.0, 0.0, 0.0};
  tc.synthesis.num_classes = 16;
  tc.synthesis.tau = 4.0;
  tc.synthesis.seed = 42;
  tc.seed = 42;
  return tc;
}

}  // namespace

TEST_CASE("clip_grad: passthrough, scaling, norm bound") {
  const std::vector<double> small = {0.3, 0.4};
  CHECK(clip_grad(small, 1.0) == small);

  const std::vector<double> big = clip_grad({3.0, 4.0}, 1.0);
  CHECK(big[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(big[1] == doctest::Approx(0.8).epsilon(1e-12));

  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> g(8);
    for (double& v : g) v = 10.0 * rng.normal();
    const double max_norm = 0.1 + rng.uniform() * 5.0;
    CHECK(norm(clip_grad(g, max_norm)) <= max_norm + 1e-12);
  }
  CHECK_THROWS_AS(clip_grad({1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("rmsprop_step: zero grad, first-step magnitude, determinism") {
  OptimizerState st;
  st.square_avg = {0.5, 0.5};
  st.lr = 0.001;
  std::vector<double> theta = {1.0, -1.0};
  rmsprop_step(st, theta, {0.0, 0.0});
  CHECK(theta[0] == doctest::Approx(1.0));
  CHECK(theta[1] == doctest::Approx(-1.0));
  CHECK(st.square_avg[0] == doctest::Approx(0.495));  // decays by s = 0.99
  CHECK(st.step_count == 1);

  // First step with a large gradient moves by about lr / sqrt(1 - s).
  OptimizerState fresh;
  fresh.square_avg = {0.0};
  std::vector<double> x = {0.0};
  rmsprop_step(fresh, x, {100.0});
  CHECK(x[0] == doctest::Approx(-0.001 / std::sqrt(0.01)).epsilon(1e-4));

  OptimizerState a, b;
  a.square_avg.assign(4, 0.0);
  b.square_avg.assign(4, 0.0);
  std::vector<double> ta(4, 0.3), tb(4, 0.3);
  const std::vector<double> g = {0.1, -0.2, 0.05, 0.7};
  for (int i = 0; i < 10; ++i) {
    rmsprop_step(a, ta, g);
    rmsprop_step(b, tb, g);
  }
  CHECK(ta == tb);
}

TEST_CASE("dpo_pg_direction: branches and sign structure") {
  // Orthogonal gradients: alpha = 0, direction untouched.
  CHECK(dpo_pg_direction({1.0, 0.0}, {0.0, 1.0}) == std::vector<double>{1.0, 0.0});

  // Fully aligned: everything projected away.
  const std::vector<double> zero = dpo_pg_direction({1.0, 0.0}, {1.0, 0.0});
  CHECK(zero[0] == doctest::Approx(0.0));
  CHECK(zero[1] == doctest::Approx(0.0));

  // Worked example with the documented dot products.
  const std::vector<double> g = dpo_pg_direction({1.0, 1.0}, {1.0, 0.0});
  CHECK(g[0] == doctest::Approx(0.0));
  CHECK(g[1] == doctest::Approx(1.0));
  CHECK(dot(g, {1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(dot(g, {1.0, 1.0}) == doctest::Approx(1.0));

  // Degenerate rejected gradient falls back to the chosen gradient.
  const std::vector<double> fb = dpo_pg_direction({0.4, -0.2}, {1e-15, 0.0});
  CHECK(fb[0] == doctest::Approx(0.4));

  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> gw(8), gl(8);
    for (double& v : gw) v = rng.normal();
    for (double& v : gl) v = rng.normal();
    const std::vector<double> d = dpo_pg_direction(gw, gl);
    CHECK(dot(d, gl) <= 1e-12);
    CHECK(dot(d, gw) >= -1e-12);
  }
}

TEST_CASE("train_run: record count, reproducibility") {
  TrainConfig tc = small_config();
  tc.steps = 1;
  tc.record_every = 1;
  const TrainResult one = train_run(tc, TrainMode::kStandard);
  CHECK(one.records.size() == 1);

  tc = small_config();
  const TrainResult a = train_run(tc, TrainMode::kStandard);
  const TrainResult b = train_run(tc, TrainMode::kStandard);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].step == b.records[i].step);
    CHECK(a.records[i].loss == b.records[i].loss);
    CHECK(a.records[i].js_to_target == b.records[i].js_to_target);
    CHECK(a.records[i].kl_ref_to_policy == b.records[i].kl_ref_to_policy);
    CHECK(a.records[i].mean_logp_chosen == b.records[i].mean_logp_chosen);
    CHECK(a.records[i].grad_dot_w == b.records[i].grad_dot_w);
  }
  CHECK(a.final_logits.vec() == b.final_logits.vec());

  CHECK_THROWS_AS(
      [] {
        TrainConfig bad = small_config();
        bad.steps = 0;
        return train_run(bad, TrainMode::kStandard);
      }(),
      std::invalid_argument);
}

TEST_CASE("train_run: dpo-pg sign structure on every record") {
  TrainConfig tc = small_config();
  tc.steps = 300;
  tc.record_every = 25;
  tc.init = InitPolicy::kUniform;
  const TrainResult r = train_run(tc, TrainMode::kDpoPg);
  CHECK(r.sign_violations_w == 0);
  CHECK(r.sign_violations_l == 0);
  CHECK(r.dirderiv_violations == 0);
  for (const MetricRecord& rec : r.records) {
    CHECK(rec.grad_dot_l <= 1e-10);
    CHECK(rec.grad_dot_w >= -1e-10);
  }
}

TEST_CASE("train_run: tail averaging produces a policy between iterates") {
  TrainConfig tc = small_config();
  tc.steps = 200;
  tc.average_tail_from = 100;
  const TrainResult r = train_run(tc, TrainMode::kStandard);
  REQUIRE(r.has_averaged);
  CHECK(r.averaged_logits.size() == 16);
}

TEST_CASE("train_run: non-finite loss aborts with a diagnostic record") {
  TrainConfig tc = small_config();
  // An unclipped orpo run at an absurd learning rate drives a class
  // probability to exactly 1, where the odds blow up.
  tc.objective = {ObjectiveKind::kOrpo, 1.0, 0.0, 0.0};
  tc.learning_rate = 50.0;
  tc.clip_norm = 1e9;
  tc.steps = 2000;
  tc.record_every = 1000000;  // only the abort record
  const TrainResult r = train_run(tc, TrainMode::kStandard);
  CHECK(r.diverged);
  REQUIRE(!r.records.empty());
  // The abort fires on a non-finite loss or gradient; the diagnostic record
  // carries whichever went bad.
  CHECK((!std::isfinite(r.records.back().loss) ||
         !std::isfinite(r.records.back().grad_dot_w)));
  CHECK(r.records.back().step < tc.steps);
}
