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
#include <numeric>
#include <vector>

#include "didlab/policy.hpp"
#include "didlab/rng.hpp"

using namespace didlab;

namespace {

SimplexDist random_dist(int k, Rng& rng) {
  std::vector<double> p(k);
  double sum = 0.0;
  for (double& v : p) {
    v = 0.05 + rng.uniform();
    sum += v;
  }
  for (double& v : p) v /= sum;
  return SimplexDist(std::move(p));
}

double total_variation(const SimplexDist& a, const SimplexDist& b) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("softmax: symmetry, hand values, shift invariance") {
  const SimplexDist u = softmax(Logits({0.0, 0.0, 0.0, 0.0}));
  for (int i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.25).epsilon(1e-12));

  // exp(ln k) = k, so the normalization is k / 10.
  const SimplexDist p = softmax(
      Logits({std::log(1.0), std::log(2.0), std::log(3.0), std::log(4.0)}));
  CHECK(p[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(p[3] == doctest::Approx(0.4).epsilon(1e-12));

  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> theta(8);
    for (double& v : theta) v = 3.0 * rng.normal();
    std::vector<double> shifted(theta);
    const double c = 10.0 * rng.normal();
    for (double& v : shifted) v += c;
    const SimplexDist a = softmax(Logits(theta));
    const SimplexDist b = softmax(Logits(shifted));
    for (int i = 0; i < 8; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
}

TEST_CASE("softmax normalization invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> theta(2 + static_cast<int>(rng.uniform() * 63));
    for (double& v : theta) v = 5.0 * rng.normal();
    const SimplexDist p = softmax(Logits(theta));
    double sum = 0.0;
    for (int i = 0; i < p.size(); ++i) sum += p[i];
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("log_softmax: hand values, normalization, extreme logits") {
  const std::vector<double> two = log_softmax(Logits({0.0, 0.0}));
  CHECK(two[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK(two[1] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));

  Rng rng(3);
  std::vector<double> theta(16);
  for (double& v : theta) v = 4.0 * rng.normal();
  const std::vector<double> lp = log_softmax(Logits(theta));
  double sum = 0.0;
  for (double v : lp) sum += std::exp(v);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  // Stays finite where the naive exp would overflow.
  const std::vector<double> hot = log_softmax(Logits({1000.0, 0.0}));
  CHECK(std::isfinite(hot[0]));
  CHECK(std::isfinite(hot[1]));
  CHECK(hot[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(hot[1] == doctest::Approx(-1000.0).epsilon(1e-12));
}

TEST_CASE("sample: law of large numbers, near-point-mass, determinism") {
  const SimplexDist u = softmax(Logits({0.0, 0.0, 0.0, 0.0}));
  Rng rng(42);
  const std::vector<int> draws = sample(u, 100000, rng);
  std::vector<int> counts(4, 0);
  for (int d : draws) ++counts[d];
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(counts[i] / 100000.0 - 0.25) < 0.01);

  const double eps = 1e-12;
  const SimplexDist peak({1.0 - 3 * eps, eps, eps, eps});
  Rng rng2(1);
  const std::vector<int> d2 = sample(peak, 10000, rng2);
  int zeros = 0;
  for (int d : d2) zeros += d == 0;
  CHECK(zeros == 10000);

  Rng a(123), b(123);
  CHECK(sample(u, 1000, a) == sample(u, 1000, b));
}

TEST_CASE("did: constant ratio, construction algebra, Bayes recomposition") {
  Rng rng(5);
  const SimplexDist p = random_dist(6, rng);
  const SimplexDist self = did(p, p);
  for (int i = 0; i < 6; ++i)
    CHECK(self[i] == doctest::Approx(1.0 / 6).epsilon(1e-12));

  // Target logits theta_ref / tau make the ratio distribution proportional
  // to exp((1/tau - 1) theta_ref).
  const double tau = 4.0;
  std::vector<double> theta_ref(32);
  for (double& v : theta_ref) v = rng.normal();
  std::vector<double> expected_logits(32), target_logits(32);
  for (int i = 0; i < 32; ++i) {
    target_logits[i] = theta_ref[i] / tau;
    expected_logits[i] = (1.0 / tau - 1.0) * theta_ref[i];
  }
  const SimplexDist lhs =
      did(softmax(Logits(target_logits)), softmax(Logits(theta_ref)));
  const SimplexDist rhs = softmax(Logits(expected_logits));
  CHECK(total_variation(lhs, rhs) < 1e-12);

  // Renormalizing did(p, q) * q recovers p, K in {2, ..., 64}.
  for (int k : {2, 3, 8, 17, 64}) {
    for (int trial = 0; trial < 10; ++trial) {
      const SimplexDist pp = random_dist(k, rng);
      const SimplexDist qq = random_dist(k, rng);
      const SimplexDist r = did(pp, qq);
      std::vector<double> recomposed(k);
      double z = 0.0;
      for (int i = 0; i < k; ++i) {
        recomposed[i] = r[i] * qq[i];
        z += recomposed[i];
      }
      for (double& v : recomposed) v /= z;
      CHECK(total_variation(SimplexDist::unchecked(recomposed), pp) < 1e-9);
    }
  }
}

TEST_CASE("kl: zero at equality, hand value, Gibbs inequality") {
  Rng rng(9);
  const SimplexDist p = random_dist(5, rng);
  CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-15));

  // 0.75 ln 3 - 0.25 ln 3 = 0.5 ln 3
  const SimplexDist a({0.75, 0.25});
  const SimplexDist b({0.25, 0.75});
  CHECK(kl_divergence(a, b) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-12));

  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform() * 30);
    const SimplexDist pp = random_dist(k, rng);
    const SimplexDist qq = random_dist(k, rng);
    CHECK(kl_divergence(pp, qq) >= 0.0);
  }
}

TEST_CASE("js: zero, symmetry, disjoint limit, bounds") {
  Rng rng(13);
  const SimplexDist p = random_dist(7, rng);
  CHECK(js_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-15));

  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform() * 30);
    const SimplexDist pp = random_dist(k, rng);
    const SimplexDist qq = random_dist(k, rng);
    const double ab = js_divergence(pp, qq);
    const double ba = js_divergence(qq, pp);
    CHECK(std::abs(ab - ba) < 1e-12);
    CHECK(ab >= 0.0);
    CHECK(ab <= std::log(2.0) + 1e-12);
  }

  const double eps = 1e-9;
  const SimplexDist near0({1.0 - eps, eps});
  const SimplexDist near1({eps, 1.0 - eps});
  CHECK(js_divergence(near0, near1) == doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("bt_pref_prob: coin flip, hand value, complement, DID identity") {
  Rng rng(17);
  const SimplexDist p = random_dist(4, rng);
  CHECK(bt_pref_prob(p, p, 0, 3) == doctest::Approx(0.5).epsilon(1e-12));

  const SimplexDist pw({0.8, 0.2});
  const SimplexDist pl({0.2, 0.8});
  CHECK(bt_pref_prob(pw, pl, 0, 1) == doctest::Approx(16.0 / 17.0).epsilon(1e-12));

  for (int trial = 0; trial < 30; ++trial) {
    const int k = 3 + static_cast<int>(rng.uniform() * 13);
    const SimplexDist w = random_dist(k, rng);
    const SimplexDist l = random_dist(k, rng);
    const int y1 = static_cast<int>(rng.uniform() * k);
    int y2 = static_cast<int>(rng.uniform() * k);
    if (y2 == y1) y2 = (y1 + 1) % k;
    const double fwd = bt_pref_prob(w, l, y1, y2);
    const double bwd = bt_pref_prob(w, l, y2, y1);
    CHECK(std::abs(fwd + bwd - 1.0) < 1e-12);

    // Equals the sigmoid of the DID log-ratio difference.
    const SimplexDist r = did(w, l);
    const double via_did = sigmoid(std::log(r[y1]) - std::log(r[y2]));
    CHECK(std::abs(fwd - via_did) < 1e-10);
  }

  CHECK_THROWS_AS(bt_pref_prob(pw, pl, 1, 1), std::invalid_argument);
}

TEST_CASE("entropy: uniform maximum, near-deterministic, DID sharpening") {
  std::vector<double> u32(32, 1.0 / 32);
  CHECK(entropy(SimplexDist(u32)) == doctest::Approx(std::log(32.0)).epsilon(1e-12));

  const double eps = 1e-9;
  std::vector<double> peak(8, eps / 7);
  peak[0] = 1.0 - eps;
  CHECK(entropy(SimplexDist(peak)) < 1e-7);

  // Strongly reinforcing target (tau = 0.25): the DID is a sharper
  // rescaling of the reference logits, so its entropy drops.
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> theta(32), target(32);
    for (int i = 0; i < 32; ++i) {
      theta[i] = rng.normal();
      target[i] = theta[i] / 0.25;
    }
    const SimplexDist ref = softmax(Logits(theta));
    const SimplexDist r = did(softmax(Logits(target)), ref);
    CHECK(entropy(r) < entropy(ref));
  }
}

TEST_CASE("did_entropy_is: identity case, smoke at n=2, convergence") {
  Rng rng(31);
  std::vector<double> theta(32);
  for (double& v : theta) v = rng.normal();
  const SimplexDist ref = softmax(Logits(theta));

  // policy == reference: the ratio is identically 1, the expectation term
  // vanishes exactly and the estimate reduces to the log-partition.
  Rng est_rng(1);
  const DidEntropyEstimate same = did_entropy_is(ref, ref, 4096, est_rng);
  CHECK(same.value == same.log_partition);
  CHECK(same.value == doctest::Approx(std::log(32.0)).epsilon(0.02));
  CHECK(same.num_samples == 4096);

  Rng tiny_rng(2);
  const DidEntropyEstimate tiny = did_entropy_is(ref, ref, 2, tiny_rng);
  CHECK(std::isfinite(tiny.value));

  CHECK_THROWS_AS(did_entropy_is(ref, ref, 1, est_rng), std::invalid_argument);

  // Errors shrink as the sample count grows (single fixed-seed pair).
  std::vector<double> target(32);
  for (int i = 0; i < 32; ++i) target[i] = theta[i] / 4.0;
  const SimplexDist policy = softmax(Logits(target));
  const double exact = entropy(did(policy, ref));
  Rng small_rng(3), large_rng(3);
  const double err_small =
      std::abs(did_entropy_is(policy, ref, 64, small_rng).value - exact);
  const double err_large =
      std::abs(did_entropy_is(policy, ref, 16384, large_rng).value - exact);
  CHECK(err_large < err_small);
}

TEST_CASE("converged_policy_oracle: neutral evidence, large beta, hand value") {
  Rng rng(37);
  const SimplexDist ref = random_dist(8, rng);
  std::vector<double> u(8, 1.0 / 8);
  const SimplexDist back = converged_policy_oracle(ref, SimplexDist(u), 1.0);
  CHECK(total_variation(back, ref) < 1e-12);

  const SimplexDist pref = random_dist(8, rng);
  const SimplexDist big = converged_policy_oracle(ref, pref, 1e6);
  CHECK(total_variation(big, ref) < 1e-6);

  const SimplexDist half({0.5, 0.5});
  const SimplexDist skew({0.9, 0.1});
  const SimplexDist out = converged_policy_oracle(half, skew, 1.0);
  CHECK(out[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(0.1).epsilon(1e-12));

  CHECK_THROWS_AS(converged_policy_oracle(half, skew, 0.0), std::invalid_argument);
}

TEST_CASE("oracle fixed point satisfies the power law") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform() * 62);
    const SimplexDist ref = random_dist(k, rng);
    const SimplexDist rej = random_dist(k, rng);
    const double beta = std::exp(std::log(0.05) + rng.uniform() * std::log(100.0));
    const SimplexDist data_did = did(ref, rej);
    const SimplexDist conv = converged_policy_oracle(ref, data_did, beta);
    // did(conv, ref)^beta renormalized must equal did(ref, rej).
    const SimplexDist conv_did = did(conv, ref);
    std::vector<double> lo(k);
    for (int i = 0; i < k; ++i) lo[i] = beta * std::log(conv_did[i]);
    const SimplexDist powered = softmax(Logits(lo));
    CHECK(total_variation(powered, data_did) < 1e-9);
  }
}

TEST_CASE("type invariants are enforced") {
  CHECK_THROWS_AS(Logits({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Logits({1.0, std::nan("")}), std::invalid_argument);
  CHECK_THROWS_AS(SimplexDist({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(SimplexDist({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(SimplexDist({0.5}), std::invalid_argument);

  Rng rng(2);
  const SimplexDist p2 = random_dist(2, rng);
  const SimplexDist p3 = random_dist(3, rng);
  CHECK_THROWS_AS(kl_divergence(p2, p3), std::invalid_argument);
  CHECK_THROWS_AS(js_divergence(p2, p3), std::invalid_argument);
  CHECK_THROWS_AS(did(p2, p3), std::invalid_argument);
}
