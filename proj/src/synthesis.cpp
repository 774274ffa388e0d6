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

#include "didlab/synthesis.hpp"

#include <cmath>
#include <stdexcept>

namespace didlab {

namespace {

constexpr long kMaxConsecutiveRejections = 1000000;

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

std::string to_string(Construction c) {
  switch (c) {
    case Construction::kMirrorRejected: return "mirror-rejected";
    case Construction::kIndependentNormals: return "independent-normals";
    case Construction::kOptimalRejected: return "optimal-rejected";
    case Construction::kOptimalChosen: return "optimal-chosen";
  }
  return "unknown";
}

std::optional<Construction> construction_from_string(const std::string& s) {
  if (s == "mirror-rejected") return Construction::kMirrorRejected;
  if (s == "independent-normals") return Construction::kIndependentNormals;
  if (s == "optimal-rejected") return Construction::kOptimalRejected;
  if (s == "optimal-chosen") return Construction::kOptimalChosen;
  return std::nullopt;
}

void SynthesisConfig::validate() const {
  require(num_classes >= 2, "num_classes must be >= 2");
  require(tau > 0.0, "tau must be > 0");
  require(alpha >= 1.0, "alpha must be >= 1");
  require(beta_data > 0.0, "beta_data must be > 0");
  if (construction != Construction::kIndependentNormals) {
    // tau = 1 makes the target equal the reference and collapses the pair
    // distributions (pi_w = pi_l carries no preference signal).
    require(tau != 1.0, "tau must not equal 1");
  }
}

Logits make_reference(int num_classes, Rng& rng) {
  require(num_classes >= 2, "num_classes must be >= 2");
  std::vector<double> theta(num_classes);
  for (double& v : theta) v = rng.normal();
  return Logits(std::move(theta));
}

Logits make_target(const Logits& theta_ref, double tau) {
  require(tau > 0.0, "tau must be > 0");
  std::vector<double> out(theta_ref.vec());
  for (double& v : out) v /= tau;
  return Logits(std::move(out));
}

Logits make_rejected_mirror(const Logits& theta_ref,
                            const Logits& theta_star) {
  require(theta_ref.size() == theta_star.size(), "logit lengths must match");
  std::vector<double> out(theta_ref.size());
  for (int i = 0; i < theta_ref.size(); ++i)
    out[i] = 2.0 * theta_ref[i] - theta_star[i];
  return Logits(std::move(out));
}

Logits sharpen(const Logits& theta, double alpha) {
  require(alpha >= 1.0, "alpha must be >= 1");
  std::vector<double> out(theta.vec());
  for (double& v : out) v *= alpha;
  return Logits(std::move(out));
}

Logits optimal_rejected(const Logits& theta_ref, const Logits& theta_star,
                        double beta) {
  require(theta_ref.size() == theta_star.size(), "logit lengths must match");
  require(beta > 0.0, "beta must be > 0");
  std::vector<double> out(theta_ref.size());
  for (int i = 0; i < theta_ref.size(); ++i)
    out[i] = theta_ref[i] + beta * (theta_ref[i] - theta_star[i]);
  return Logits(std::move(out));
}

Logits optimal_chosen(const Logits& theta_ref, const Logits& theta_star,
                      double beta) {
  require(theta_ref.size() == theta_star.size(), "logit lengths must match");
  require(beta > 0.0, "beta must be > 0");
  std::vector<double> out(theta_ref.size());
  for (int i = 0; i < theta_ref.size(); ++i)
    out[i] = theta_ref[i] + beta * (theta_star[i] - theta_ref[i]);
  return Logits(std::move(out));
}

PreferenceBatch sample_pairs(const SimplexDist& pw, const SimplexDist& pl,
                             int num_pairs, Rng& rng) {
  require(num_pairs >= 1, "batch size must be >= 1");
  require(pw.size() == pl.size(), "distributions must have the same length");
  PreferenceBatch batch;
  batch.chosen.resize(num_pairs);
  batch.rejected.resize(num_pairs);
  for (int i = 0; i < num_pairs; ++i) {
    long rejections = 0;
    for (;;) {
      const int w = sample(pw, 1, rng)[0];
      const int l = sample(pl, 1, rng)[0];
      if (w != l) {
        batch.chosen[i] = w;
        batch.rejected[i] = l;
        break;
      }
      if (++rejections >= kMaxConsecutiveRejections)
        throw std::runtime_error(
            "sample_pairs: degenerate distributions, cannot draw a distinct "
            "pair");
    }
  }
  return batch;
}

PolicySetup build_setup(const SynthesisConfig& config) {
  config.validate();
  Rng rng(config.seed);
  PolicySetup setup;
  setup.reference = make_reference(config.num_classes, rng);

  switch (config.construction) {
    case Construction::kMirrorRejected: {
      setup.target = make_target(setup.reference, config.tau);
      setup.has_target = true;
      setup.chosen = setup.reference;
      setup.rejected = make_rejected_mirror(setup.reference, setup.target);
      break;
    }
    case Construction::kIndependentNormals: {
      const Logits other = make_reference(config.num_classes, rng);
      setup.has_target = false;
      if (config.reference_side == ReferenceSide::kChosen) {
        setup.chosen = setup.reference;
        setup.rejected = other;
      } else {
        setup.chosen = other;
        setup.rejected = setup.reference;
      }
      break;
    }
    case Construction::kOptimalRejected: {
      setup.target = make_target(setup.reference, config.tau);
      setup.has_target = true;
      setup.chosen = setup.reference;
      setup.rejected =
          optimal_rejected(setup.reference, setup.target, config.beta_data);
      break;
    }
    case Construction::kOptimalChosen: {
      setup.target = make_target(setup.reference, config.tau);
      setup.has_target = true;
      setup.chosen =
          optimal_chosen(setup.reference, setup.target, config.beta_data);
      setup.rejected = setup.reference;
      break;
    }
  }

  if (config.alpha != 1.0) {
    setup.chosen = sharpen(setup.chosen, config.alpha);
    setup.rejected = sharpen(setup.rejected, config.alpha);
  }
  return setup;
}

}  // namespace didlab
