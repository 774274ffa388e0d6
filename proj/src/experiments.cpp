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

#include "didlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <thread>

#include "didlab/rng.hpp"

namespace didlab {

namespace {

// ---------------------------------------------------------------------------
// shared helpers

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min<int>(
      n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return std::string(buf);
}

TrainConfig base_train_config(const ExperimentConfig& cfg) {
  TrainConfig tc;
  tc.batch_size = cfg.batch_size;
  tc.learning_rate = cfg.learning_rate;
  tc.clip_norm = cfg.clip_norm;
  tc.record_every = cfg.record_every;
  tc.seed = cfg.seed;
  tc.synthesis.num_classes = cfg.num_classes;
  tc.synthesis.tau = cfg.tau;
  tc.synthesis.seed = cfg.seed;
  return tc;
}

double expected_logp(const SimplexDist& dist, const std::vector<double>& logp) {
  double s = 0.0;
  for (int i = 0; i < dist.size(); ++i) s += dist[i] * logp[i];
  return s;
}

std::vector<double> log_of(const SimplexDist& d) {
  std::vector<double> out(d.size());
  for (int i = 0; i < d.size(); ++i) out[i] = std::log(d[i]);
  return out;
}

double total_variation(const SimplexDist& p, const SimplexDist& q) {
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

// d^e renormalized.
SimplexDist power_renormalized(const SimplexDist& d, double e) {
  std::vector<double> lo(d.size());
  for (int i = 0; i < d.size(); ++i) lo[i] = e * std::log(d[i]);
  return softmax(Logits(std::move(lo)));
}

Verdict make_verdict(std::string name, bool pass, double measured,
                     double threshold, std::string comparator,
                     std::string detail = {}) {
  Verdict v;
  v.name = std::move(name);
  v.pass = pass;
  v.measured = measured;
  v.threshold = threshold;
  v.comparator = std::move(comparator);
  v.detail = std::move(detail);
  return v;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Random instance for closed-form checks: independent normal logit draws.
struct OracleDraw {
  SimplexDist reference;
  SimplexDist other;
};

OracleDraw make_oracle_draw(int num_classes, Rng& rng) {
  OracleDraw d;
  d.reference = softmax(make_reference(num_classes, rng));
  d.other = softmax(make_reference(num_classes, rng));
  return d;
}

constexpr int kOracleInstances = 100;

// ---------------------------------------------------------------------------
// pinned experiment constants (synthetic-figure settings)

const std::vector<double> kEncodeTaus = {0.25, 0.5, 2.0, 4.0};
constexpr long kEncodeSteps = 10000;

constexpr long kComparisonSteps = 7500;
const std::vector<double> kSlicBetas = {0.1, 0.5, 1.0, 2.0};
const std::vector<double> kSlicLambdas = {0.1, 0.5, 1.0, 10.0};
const std::vector<double> kOrpoBetas = {0.1, 0.5, 1.0, 2.0};
const std::vector<double> kSimpoBetas = {2.0, 2.5};
const std::vector<double> kSimpoGammas = {0.3, 0.5, 1.0, 1.2, 1.4, 1.6};
const std::vector<double> kCalDpoBetas = {0.001, 0.002, 0.003, 0.01, 0.1};

// The trained-vs-oracle fixed-point comparison uses a long run whose tail
// logits are averaged; the final iterate of a constant-rate stochastic run
// hovers at D_JS ~ 2e-5 around the fixed point and never reaches 1e-6.
constexpr long kOracleMatchSteps = 400000;
constexpr long kOracleMatchTailFrom = 40000;

constexpr long kLldSteps = 7500;
const std::vector<double> kLldCase1Betas = {0.05, 0.1, 0.5, 1.0, 2.0, 5.0};
const std::vector<double> kLldCase2Betas = {1.0, 2.0, 4.0, 8.0, 16.0, 32.0};

constexpr long kExplorationSteps = 20000;
const std::vector<double> kExplorationBaseBetas = {0.25, 0.5, 1.0, 2.0, 4.0};
const std::vector<double> kExplorationSharpBetas = {0.5, 1.0, 2.0, 4.0, 8.0};
constexpr double kExplorationAlpha = 2.0;

constexpr long kHeatmapSteps = 5000;
constexpr long kHeatmapRecordEvery = 1000;
constexpr int kHeatmapSeeds = 5;
const std::vector<double> kHeatmapBetaGrid = {0.02, 0.1, 0.5, 1.0, 2.5, 5.0};

constexpr long kMarginTriangleSteps = 10000;

const std::vector<double> kEntropyClaimTaus = {0.25, 0.5, 2.0, 4.0};
constexpr int kEntropyClaimDraws = 1000;

constexpr long kDpoPgSteps = 1200;
constexpr long kDpoPgRecordEvery = 300;

const std::vector<int> kEstimatorSampleCounts = {64, 256, 1024, 4096};
constexpr int kEstimatorSeeds = 25;

}  // namespace

// ---------------------------------------------------------------------------

ExperimentReport run_encode_check(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = "encode-check";
  report.config = cfg;

  const long steps = cfg.steps.value_or(kEncodeSteps);
  std::vector<TrainResult> results(kEncodeTaus.size());
  parallel_for(static_cast<int>(kEncodeTaus.size()), [&](int i) {
    TrainConfig tc = base_train_config(cfg);
    tc.steps = steps;
    tc.objective = {ObjectiveKind::kLogPi, 0.0, 0.0, 0.0};
    tc.synthesis.construction = Construction::kMirrorRejected;
    tc.synthesis.tau = kEncodeTaus[i];
    tc.seed = Rng::derive(cfg.seed, static_cast<std::uint64_t>(i));
    results[i] = train_run(tc, TrainMode::kStandard);
  });

  for (std::size_t i = 0; i < kEncodeTaus.size(); ++i) {
    const TrainResult& r = results[i];
    const double final_js = r.records.back().js_to_did;
    report.verdicts.push_back(make_verdict(
        "encode-tau-" + fmt_g(kEncodeTaus[i]),
        !r.diverged && final_js < cfg.thresholds.encode_final_js, final_js,
        cfg.thresholds.encode_final_js, "<",
        "final D_JS[did(pi*, pi_ref) || pi] after " + std::to_string(steps) +
            " log-pi steps"));
    report.metrics.push_back(
        {"encode_tau_" + fmt_g(kEncodeTaus[i]) + ".csv", r.records});
  }
  report.seeds = {cfg.seed};
  return report;
}

// ---------------------------------------------------------------------------

namespace {

struct ComparisonRun {
  std::string label;
  ObjectiveSpec spec;
};

std::vector<ComparisonRun> comparison_grid() {
  std::vector<ComparisonRun> runs;
  runs.push_back({"dpo_beta1", {ObjectiveKind::kDpo, 1.0, 0.0, 0.0}});
  runs.push_back({"log-pi", {ObjectiveKind::kLogPi, 0.0, 0.0, 0.0}});
  for (double b : kSlicBetas)
    for (double l : kSlicLambdas)
      runs.push_back({"slic_b" + fmt_g(b) + "_l" + fmt_g(l),
                      {ObjectiveKind::kSlic, b, 0.0, l}});
  for (double b : kOrpoBetas)
    runs.push_back({"orpo_b" + fmt_g(b), {ObjectiveKind::kOrpo, b, 0.0, 0.0}});
  for (double b : kSimpoBetas)
    for (double g : kSimpoGammas)
      runs.push_back({"simpo_b" + fmt_g(b) + "_g" + fmt_g(g),
                      {ObjectiveKind::kSimpo, b, g, 0.0}});
  for (double b : kCalDpoBetas)
    runs.push_back(
        {"cal-dpo_b" + fmt_g(b), {ObjectiveKind::kCalDpo, b, 0.0, 0.0}});
  return runs;
}

}  // namespace

ExperimentReport run_objective_comparison(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = "objective-comparison";
  report.config = cfg;
  report.seeds = {cfg.seed};

  const long steps = cfg.steps.value_or(kComparisonSteps);
  const std::vector<ComparisonRun> runs = comparison_grid();
  std::vector<TrainResult> results(runs.size());
  parallel_for(static_cast<int>(runs.size()), [&](int i) {
    TrainConfig tc = base_train_config(cfg);
    tc.steps = steps;
    tc.objective = runs[i].spec;
    tc.synthesis.construction = Construction::kMirrorRejected;
    tc.seed = Rng::derive(cfg.seed, 100 + static_cast<std::uint64_t>(i));
    results[i] = train_run(tc, TrainMode::kStandard);
  });

  Table summary;
  summary.filename = "comparison_summary.csv";
  summary.header = {"objective", "beta", "gamma", "lambda", "best_js_to_target",
                    "final_js_to_target"};
  double best_per_kind[6];
  std::fill(std::begin(best_per_kind), std::end(best_per_kind),
            std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const TrainResult& r = results[i];
    const int kind = static_cast<int>(runs[i].spec.kind);
    best_per_kind[kind] = std::min(best_per_kind[kind], r.min_js_to_target);
    summary.row_labels.push_back(runs[i].label);
    summary.rows.push_back({runs[i].spec.beta, runs[i].spec.gamma,
                            runs[i].spec.lambda, r.min_js_to_target,
                            r.records.back().js_to_target});
    report.metrics.push_back({"objcmp_" + runs[i].label + ".csv", r.records});
  }
  report.tables.push_back(std::move(summary));

  const double dpo_best = best_per_kind[static_cast<int>(ObjectiveKind::kDpo)];
  report.verdicts.push_back(make_verdict(
      "dpo-best-js", dpo_best < cfg.thresholds.dpo_best_js, dpo_best,
      cfg.thresholds.dpo_best_js, "<",
      "minimum D_JS[pi* || pi] over the DPO run"));

  for (ObjectiveKind kind :
       {ObjectiveKind::kSlic, ObjectiveKind::kOrpo, ObjectiveKind::kSimpo,
        ObjectiveKind::kCalDpo}) {
    const double best = best_per_kind[static_cast<int>(kind)];
    const double ratio = best / dpo_best;
    report.verdicts.push_back(make_verdict(
        to_string(kind) + "-separation",
        ratio >= cfg.thresholds.baseline_separation, ratio,
        cfg.thresholds.baseline_separation, ">=",
        "grid-best D_JS[pi* || pi] relative to DPO's best"));
  }

  // log pi converges to the DID, not to the target.
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].spec.kind != ObjectiveKind::kLogPi) continue;
    const MetricRecord& last = results[i].records.back();
    report.verdicts.push_back(make_verdict(
        "log-pi-fits-did-not-target", last.js_to_target > last.js_to_did,
        last.js_to_target - last.js_to_did, 0.0, ">",
        "final D_JS[pi* || pi] minus D_JS[did || pi] for the log-pi run"));
  }

  // Trained-vs-oracle fixed point: long DPO run, tail-averaged iterate.
  {
    TrainConfig tc = base_train_config(cfg);
    tc.steps = kOracleMatchSteps;
    tc.objective = {ObjectiveKind::kDpo, 1.0, 0.0, 0.0};
    tc.synthesis.construction = Construction::kMirrorRejected;
    tc.seed = Rng::derive(cfg.seed, 777);
    tc.record_every = 2000;
    tc.average_tail_from = kOracleMatchTailFrom;
    const TrainResult r = train_run(tc, TrainMode::kStandard);
    const SimplexDist oracle = converged_policy_oracle(
        r.reference_dist, did(r.chosen_dist, r.rejected_dist), 1.0);
    const double js_avg = js_divergence(softmax(r.averaged_logits), oracle);
    const double js_final = js_divergence(softmax(r.final_logits), oracle);
    report.verdicts.push_back(make_verdict(
        "dpo-oracle-match", js_avg < cfg.thresholds.oracle_match_js, js_avg,
        cfg.thresholds.oracle_match_js, "<",
        "D_JS between the tail-averaged DPO policy (beta = 1) and the "
        "closed-form fixed point"));
    report.measurements.emplace_back("oracle_match_final_step_js", js_final);
    report.metrics.push_back({"objcmp_dpo_oracle_run.csv", r.records});
  }

  // Power law of the closed form itself: did(oracle, ref)^beta renormalized
  // must reproduce the data DID.
  {
    Rng rng(Rng::derive(cfg.seed, 0xA11CE));
    double max_tv = 0.0;
    for (int i = 0; i < kOracleInstances; ++i) {
      const OracleDraw draw = make_oracle_draw(cfg.num_classes, rng);
      const double beta =
          std::exp(std::log(0.05) + rng.uniform() * std::log(5.0 / 0.05));
      const SimplexDist data_did = did(draw.reference, draw.other);
      const SimplexDist oracle =
          converged_policy_oracle(draw.reference, data_did, beta);
      const SimplexDist recovered =
          power_renormalized(did(oracle, draw.reference), beta);
      max_tv = std::max(max_tv, total_variation(recovered, data_did));
    }
    report.verdicts.push_back(make_verdict(
        "oracle-power-law", max_tv < cfg.thresholds.power_law_tv, max_tv,
        cfg.thresholds.power_law_tv, "<",
        "max total variation over 100 random instances"));
  }

  return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_lld(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = "lld";
  report.config = cfg;
  report.seeds = {cfg.seed};

  const long steps = cfg.steps.value_or(kLldSteps);
  const bool mirror_flavor =
      cfg.construction != Construction::kIndependentNormals;

  struct LldRun {
    int case_id;  // 1: y_w ~ pi_ref, 2: y_l ~ pi_ref
    double beta;
  };
  std::vector<LldRun> runs;
  for (double b : kLldCase1Betas) runs.push_back({1, b});
  for (double b : kLldCase2Betas) runs.push_back({2, b});

  std::vector<TrainResult> results(runs.size());
  parallel_for(static_cast<int>(runs.size()), [&](int i) {
    TrainConfig tc = base_train_config(cfg);
    tc.steps = steps;
    tc.objective = {ObjectiveKind::kDpo, runs[i].beta, 0.0, 0.0};
    if (runs[i].case_id == 1) {
      tc.synthesis.construction = mirror_flavor
                                      ? Construction::kMirrorRejected
                                      : Construction::kIndependentNormals;
      tc.synthesis.reference_side = ReferenceSide::kChosen;
    } else if (mirror_flavor) {
      // Mirror analogue of case 2: chosen drawn from the target policy,
      // rejected from the reference.
      tc.synthesis.construction = Construction::kOptimalChosen;
      tc.synthesis.beta_data = 1.0;
    } else {
      tc.synthesis.construction = Construction::kIndependentNormals;
      tc.synthesis.reference_side = ReferenceSide::kRejected;
    }
    tc.seed = Rng::derive(cfg.seed, 200 + static_cast<std::uint64_t>(i));
    results[i] = train_run(tc, TrainMode::kStandard);
  });

  // Closed-form checks, no training: random (theta_ref, theta_other) pairs.
  const auto oracle_violations = [&](int case_id, double beta) {
    Rng rng(Rng::derive(cfg.seed, 0x11D + case_id));
    int violations = 0;
    for (int i = 0; i < kOracleInstances; ++i) {
      const OracleDraw draw = make_oracle_draw(cfg.num_classes, rng);
      if (case_id == 1) {
        const SimplexDist conv = converged_policy_oracle(
            draw.reference, did(draw.reference, draw.other), beta);
        const double delta =
            expected_logp(draw.other, log_of(conv)) -
            expected_logp(draw.other, log_of(draw.reference));
        if (!(delta < 0.0)) ++violations;
      } else {
        const SimplexDist conv = converged_policy_oracle(
            draw.reference, did(draw.other, draw.reference), beta);
        const double delta =
            expected_logp(draw.other, log_of(conv)) -
            expected_logp(draw.other, log_of(draw.reference));
        if (!(delta > 0.0)) ++violations;
      }
    }
    return violations;
  };

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const TrainResult& r = results[i];
    const int case_id = runs[i].case_id;
    const double beta = runs[i].beta;
    const std::vector<double> logp_final = log_of(softmax(r.final_logits));
    double trained_delta;
    if (case_id == 1) {
      trained_delta = expected_logp(r.rejected_dist, logp_final) -
                      expected_logp(r.rejected_dist, log_of(r.reference_dist));
    } else {
      trained_delta = expected_logp(r.chosen_dist, logp_final) -
                      expected_logp(r.chosen_dist, log_of(r.reference_dist));
    }
    const int violations = oracle_violations(case_id, beta);
    const bool trained_ok =
        case_id == 1 ? trained_delta < 0.0 : trained_delta > 0.0;
    report.verdicts.push_back(make_verdict(
        "case" + std::to_string(case_id) + "-beta-" + fmt_g(beta),
        trained_ok && violations == 0 && !r.diverged, trained_delta, 0.0,
        case_id == 1 ? "<" : ">",
        "trained E[log pi] change vs reference; oracle violations " +
            std::to_string(violations) + "/" +
            std::to_string(kOracleInstances)));
    report.metrics.push_back({"lld_case" + std::to_string(case_id) + "_beta" +
                                  fmt_g(beta) + ".csv",
                              r.records});
  }
  return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_exploration(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = "exploration";
  report.config = cfg;
  report.seeds = {cfg.seed};

  const long steps = cfg.steps.value_or(kExplorationSteps);

  struct ExploreRun {
    double alpha;
    double beta;
  };
  std::vector<ExploreRun> runs;
  for (double b : kExplorationBaseBetas) runs.push_back({1.0, b});
  for (double b : kExplorationSharpBetas) runs.push_back({kExplorationAlpha, b});

  std::vector<TrainResult> results(runs.size());
  parallel_for(static_cast<int>(runs.size()), [&](int i) {
    TrainConfig tc = base_train_config(cfg);
    tc.steps = steps;
    tc.objective = {ObjectiveKind::kDpo, runs[i].beta, 0.0, 0.0};
    // Independent rejected logits keep every class covered once the
    // sampling distributions are sharpened; the mirror rejected policy at
    // alpha = 2 turns near-deterministic and starves rare classes of
    // gradient signal.
    tc.synthesis.construction = Construction::kIndependentNormals;
    tc.synthesis.reference_side = ReferenceSide::kChosen;
    tc.synthesis.alpha = runs[i].alpha;
    tc.seed = Rng::derive(cfg.seed, 300 + static_cast<std::uint64_t>(i));
    results[i] = train_run(tc, TrainMode::kStandard);
  });

  const auto kl_of = [&](double alpha, double beta) {
    for (std::size_t i = 0; i < runs.size(); ++i)
      if (runs[i].alpha == alpha && runs[i].beta == beta)
        return results[i].records.back().kl_ref_to_policy;
    throw std::logic_error("exploration run not found");
  };

  Table summary;
  summary.filename = "exploration_kl.csv";
  summary.header = {"alpha", "beta", "kl_ref_to_policy"};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    summary.rows.push_back({runs[i].alpha, runs[i].beta,
                            results[i].records.back().kl_ref_to_policy});
    report.metrics.push_back(
        {"explr_alpha" + fmt_g(runs[i].alpha) + "_beta" + fmt_g(runs[i].beta) +
             ".csv",
         results[i].records});
  }
  report.tables.push_back(std::move(summary));

  // Strictly larger divergence at every beta present in both grids.
  for (double b : kExplorationBaseBetas) {
    if (std::find(kExplorationSharpBetas.begin(), kExplorationSharpBetas.end(),
                  b) == kExplorationSharpBetas.end())
      continue;
    const double gap = kl_of(kExplorationAlpha, b) - kl_of(1.0, b);
    report.verdicts.push_back(make_verdict(
        "sharpen-increases-kl-beta-" + fmt_g(b), gap > 0.0, gap, 0.0, ">",
        "KL[pi_ref || pi] gap, sharpened minus base"));
  }

  // beta' = 2 beta restores the divergence of the base dataset.
  for (double b : kExplorationBaseBetas) {
    const double base = kl_of(1.0, b);
    const double restored = kl_of(kExplorationAlpha, 2.0 * b);
    const double rel = std::abs(restored - base) / base;
    report.verdicts.push_back(make_verdict(
        "restore-kl-beta-" + fmt_g(b), rel <= cfg.thresholds.kl_restore_rel,
        rel, cfg.thresholds.kl_restore_rel, "<=",
        "relative KL mismatch between (alpha=2, 2 beta) and (alpha=1, beta)"));
  }

  // Closed-form versions of both statements.
  {
    Rng rng(Rng::derive(cfg.seed, 0xE59));
    int strict_violations = 0;
    double max_restore_gap = 0.0;
    for (int i = 0; i < kOracleInstances; ++i) {
      const OracleDraw draw = make_oracle_draw(cfg.num_classes, rng);
      const SimplexDist p_star = did(draw.reference, draw.other);
      const SimplexDist p_star_sharp =
          power_renormalized(p_star, kExplorationAlpha);
      for (double b : kExplorationBaseBetas) {
        const SimplexDist base =
            converged_policy_oracle(draw.reference, p_star, b);
        const SimplexDist sharp =
            converged_policy_oracle(draw.reference, p_star_sharp, b);
        const SimplexDist restored =
            converged_policy_oracle(draw.reference, p_star_sharp, 2.0 * b);
        const double kl_base = kl_divergence(draw.reference, base);
        const double kl_sharp = kl_divergence(draw.reference, sharp);
        const double kl_restored = kl_divergence(draw.reference, restored);
        if (!(kl_sharp > kl_base)) ++strict_violations;
        max_restore_gap =
            std::max(max_restore_gap, std::abs(kl_restored - kl_base));
      }
    }
    report.verdicts.push_back(make_verdict(
        "oracle-sharpen-strict", strict_violations == 0,
        static_cast<double>(strict_violations), 0.0, "==",
        "violations of the strict KL increase over 100 instances x 5 betas"));
    report.verdicts.push_back(make_verdict(
        "oracle-restore-exact", max_restore_gap <= 1e-12, max_restore_gap,
        1e-12, "<=",
        "max |KL difference| between (alpha=2, 2 beta) and (alpha=1, beta) "
        "fixed points"));
  }
  return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_optimal_data_sweep(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = "optimal-data";
  report.config = cfg;
  for (int s = 0; s < kHeatmapSeeds; ++s)
    report.seeds.push_back(cfg.seed + static_cast<std::uint64_t>(s));

  const long steps = cfg.steps.value_or(kHeatmapSteps);
  const int g = static_cast<int>(kHeatmapBetaGrid.size());

  for (const bool sweep_rejected : {true, false}) {
    const std::string sweep_name = sweep_rejected ? "rejected" : "chosen";
    // heat[i][j]: reward scale row i, data exponent column j.
    std::vector<std::vector<double>> heat(g, std::vector<double>(g, 0.0));

    const int total = g * g * kHeatmapSeeds;
    std::vector<TrainResult> results(total);
    parallel_for(total, [&](int idx) {
      const int s = idx % kHeatmapSeeds;
      const int j = (idx / kHeatmapSeeds) % g;
      const int i = idx / (kHeatmapSeeds * g);
      TrainConfig tc = base_train_config(cfg);
      tc.steps = steps;
      tc.record_every = kHeatmapRecordEvery;
      tc.objective = {ObjectiveKind::kDpo, kHeatmapBetaGrid[i], 0.0, 0.0};
      tc.synthesis.construction = sweep_rejected
                                      ? Construction::kOptimalRejected
                                      : Construction::kOptimalChosen;
      tc.synthesis.beta_data = kHeatmapBetaGrid[j];
      tc.synthesis.seed = cfg.seed + static_cast<std::uint64_t>(s);
      tc.seed = Rng::derive(cfg.seed + static_cast<std::uint64_t>(s),
                            1000 + static_cast<std::uint64_t>(idx));
      results[idx] = train_run(tc, TrainMode::kStandard);
    });

    for (int idx = 0; idx < total; ++idx) {
      const int s = idx % kHeatmapSeeds;
      const int j = (idx / kHeatmapSeeds) % g;
      const int i = idx / (kHeatmapSeeds * g);
      heat[i][j] += results[idx].mean_js_last50 / kHeatmapSeeds;
      report.metrics.push_back(
          {"heat_" + sweep_name + "_br" + fmt_g(kHeatmapBetaGrid[i]) + "_bd" +
               fmt_g(kHeatmapBetaGrid[j]) + "_s" +
               std::to_string(cfg.seed + static_cast<std::uint64_t>(s)) +
               ".csv",
           results[idx].records});
    }

    Table table;
    table.filename = "heatmap_" + sweep_name + ".csv";
    table.header = {"beta_r"};
    for (int j = 0; j < g; ++j)
      table.header.push_back("data_beta_" + fmt_g(kHeatmapBetaGrid[j]));
    for (int i = 0; i < g; ++i) {
      std::vector<double> row = {kHeatmapBetaGrid[i]};
      row.insert(row.end(), heat[i].begin(), heat[i].end());
      table.rows.push_back(std::move(row));
    }
    report.tables.push_back(std::move(table));

    for (int i = 0; i < g; ++i) {
      const int argmin = static_cast<int>(
          std::min_element(heat[i].begin(), heat[i].end()) - heat[i].begin());
      const int offset = std::abs(argmin - i);
      report.verdicts.push_back(make_verdict(
          sweep_name + "-row-argmin-beta-" + fmt_g(kHeatmapBetaGrid[i]),
          offset <= cfg.thresholds.heatmap_diag_cells,
          static_cast<double>(offset),
          static_cast<double>(cfg.thresholds.heatmap_diag_cells), "<=",
          "grid-cell distance between the row argmin and the diagonal"));
    }

    // At beta_r = 1 the diagonal cell dominates its row decisively.
    const auto it = std::find(kHeatmapBetaGrid.begin(), kHeatmapBetaGrid.end(), 1.0);
    if (it != kHeatmapBetaGrid.end()) {
      const int i = static_cast<int>(it - kHeatmapBetaGrid.begin());
      double off_min = std::numeric_limits<double>::infinity();
      for (int j = 0; j < g; ++j)
        if (j != i) off_min = std::min(off_min, heat[i][j]);
      const double ratio = off_min / heat[i][i];
      report.verdicts.push_back(make_verdict(
          sweep_name + "-diagonal-dominance-beta-1", ratio >= 2.0, ratio, 2.0,
          ">=", "smallest off-diagonal JS over the diagonal JS in the "
                "beta_r = 1 row"));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_margin_triangle(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = "margin-triangle";
  report.config = cfg;
  report.seeds = {cfg.seed};

  TrainConfig tc = base_train_config(cfg);
  tc.steps = cfg.steps.value_or(kMarginTriangleSteps);
  tc.objective = {ObjectiveKind::kDpo, cfg.objective.beta, 0.0, 0.0};
  tc.synthesis.construction = Construction::kMirrorRejected;
  tc.seed = Rng::derive(cfg.seed, 400);
  const TrainResult r = train_run(tc, TrainMode::kStandard);
  report.metrics.push_back({"margin_triangle_train.csv", r.records});

  const auto margin = [](const SimplexDist& ref, const SimplexDist& rej,
                         const std::vector<double>& logp) {
    return expected_logp(ref, logp) - expected_logp(rej, logp);
  };

  const SimplexDist trained = softmax(r.final_logits);
  const double m_star = margin(r.reference_dist, r.rejected_dist, log_of(trained));
  const double m_ref =
      margin(r.reference_dist, r.rejected_dist, log_of(r.reference_dist));
  const double m_rej =
      margin(r.reference_dist, r.rejected_dist, log_of(r.rejected_dist));
  report.measurements.emplace_back("trained_margin_star", m_star);
  report.measurements.emplace_back("margin_ref", m_ref);
  report.measurements.emplace_back("margin_rejected", m_rej);

  report.verdicts.push_back(make_verdict(
      "trained-margin-ordering", m_star > m_ref && m_ref > m_rej,
      std::min(m_star - m_ref, m_ref - m_rej), 0.0, ">",
      "smaller gap of the log-margin chain target > reference > rejected"));

  const double trained_triangle = kl_divergence(r.reference_dist, r.rejected_dist) +
                                  kl_divergence(r.rejected_dist, trained) -
                                  kl_divergence(r.reference_dist, trained);
  report.verdicts.push_back(make_verdict(
      "trained-triangle", trained_triangle > 0.0, trained_triangle, 0.0, ">",
      "KL[ref||rej] + KL[rej||pi] - KL[ref||pi] on the trained policy"));

  // Closed-form instances: random rejected policy and beta.
  Rng rng(Rng::derive(cfg.seed, 0x7A1));
  int order_violations = 0;
  int triangle_violations = 0;
  double min_order_gap = std::numeric_limits<double>::infinity();
  double min_triangle_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kOracleInstances; ++i) {
    const OracleDraw draw = make_oracle_draw(cfg.num_classes, rng);
    const double beta =
        std::exp(std::log(0.05) + rng.uniform() * std::log(5.0 / 0.05));
    const SimplexDist conv = converged_policy_oracle(
        draw.reference, did(draw.reference, draw.other), beta);
    const double o_star = margin(draw.reference, draw.other, log_of(conv));
    const double o_ref =
        margin(draw.reference, draw.other, log_of(draw.reference));
    const double o_rej = margin(draw.reference, draw.other, log_of(draw.other));
    const double gap = std::min(o_star - o_ref, o_ref - o_rej);
    min_order_gap = std::min(min_order_gap, gap);
    if (!(gap > 0.0)) ++order_violations;
    const double slack = kl_divergence(draw.reference, draw.other) +
                         kl_divergence(draw.other, conv) -
                         kl_divergence(draw.reference, conv);
    min_triangle_slack = std::min(min_triangle_slack, slack);
    if (!(slack > 0.0)) ++triangle_violations;
  }
  report.verdicts.push_back(make_verdict(
      "oracle-margin-ordering", order_violations == 0, min_order_gap, 0.0, ">",
      "smallest chain gap over 100 closed-form instances; violations " +
          std::to_string(order_violations)));
  report.verdicts.push_back(make_verdict(
      "oracle-triangle", triangle_violations == 0, min_triangle_slack, 0.0,
      ">", "smallest triangle slack over 100 closed-form instances; "
           "violations " + std::to_string(triangle_violations)));
  return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_entropy_claim(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = "entropy-claim";
  report.config = cfg;
  report.seeds = {cfg.seed};

  Table table;
  table.filename = "entropy_claim.csv";
  table.header = {"tau", "violation_rate", "mean_entropy_gap"};

  for (double tau : kEntropyClaimTaus) {
    Rng rng(Rng::derive(cfg.seed, 0xE47 + static_cast<std::uint64_t>(tau * 100)));
    int violations = 0;
    double gap_sum = 0.0;
    for (int i = 0; i < kEntropyClaimDraws; ++i) {
      const Logits theta_ref = make_reference(cfg.num_classes, rng);
      const SimplexDist ref = softmax(theta_ref);
      const SimplexDist target = softmax(make_target(theta_ref, tau));
      const double h_did = entropy(did(target, ref));
      const double h_ref = entropy(ref);
      gap_sum += h_did - h_ref;
      // Reinforcing targets (tau < 1) should learn a lower-entropy DID,
      // smoothing targets (tau > 1) a higher-entropy one.
      const bool ok = tau < 1.0 ? h_did < h_ref : h_did > h_ref;
      if (!ok) ++violations;
    }
    const double rate =
        static_cast<double>(violations) / kEntropyClaimDraws;
    table.rows.push_back({tau, rate, gap_sum / kEntropyClaimDraws});
    report.measurements.emplace_back("violation_rate_tau_" + fmt_g(tau), rate);
  }
  report.tables.push_back(std::move(table));
  // Qualitative claim: measured and reported, never asserted.
  return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_dpo_pg_properties(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = "dpo-pg";
  report.config = cfg;
  report.seeds = {cfg.seed};

  TrainConfig tc = base_train_config(cfg);
  tc.steps = cfg.steps.value_or(kDpoPgSteps);
  tc.record_every = kDpoPgRecordEvery;
  tc.objective = {ObjectiveKind::kDpo, 0.1, 0.0, 0.0};
  // Chosen responses from the target policy, rejected from the reference
  // (the DID-aligned pairing with the reference on the rejected side).  A
  // run started at the reference then has chosen-likelihood headroom; the
  // section-3.3 pairing puts the reference on the chosen side, where
  // E[log pi(y_w)] is already maximal at initialization and cannot rise.
  tc.synthesis.construction = Construction::kOptimalChosen;
  tc.synthesis.beta_data = 1.0;
  tc.seed = Rng::derive(cfg.seed, 500);
  const TrainResult r = train_run(tc, TrainMode::kDpoPg);
  report.metrics.push_back({"dpo_pg.csv", r.records});

  report.verdicts.push_back(make_verdict(
      "raw-direction-descends-chosen-nll", r.sign_violations_w == 0,
      static_cast<double>(r.sign_violations_w), 0.0, "==",
      "steps with direction . grad_w < -1e-10 (pre-clip direction)"));
  report.verdicts.push_back(make_verdict(
      "raw-direction-never-descends-rejected-nll", r.sign_violations_l == 0,
      static_cast<double>(r.sign_violations_l), 0.0, "==",
      "steps with direction . grad_l > 1e-10 (pre-clip direction)"));
  report.verdicts.push_back(make_verdict(
      "dpo-loss-descent-direction",
      r.dirderiv_violations == 0 && r.max_dirderiv <= cfg.thresholds.sign_dot_tol,
      r.max_dirderiv, cfg.thresholds.sign_dot_tol, "<=",
      "max directional derivative of the DPO loss (beta = 0.1) along the "
      "update direction"));

  double min_diff = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < r.records.size(); ++i)
    min_diff = std::min(min_diff, r.records[i].mean_logp_chosen -
                                      r.records[i - 1].mean_logp_chosen);
  report.verdicts.push_back(make_verdict(
      "chosen-logp-monotone-checkpoints",
      min_diff >= -cfg.thresholds.logp_monotone_tol, min_diff,
      -cfg.thresholds.logp_monotone_tol, ">=",
      "smallest E[log pi(y_w)] change between recorded checkpoints"));

  const double logp_gain =
      r.records.back().mean_logp_chosen - r.initial.mean_logp_chosen;
  report.verdicts.push_back(make_verdict(
      "chosen-logp-final-above-initial", logp_gain > 0.0, logp_gain, 0.0, ">",
      "final minus initial E[log pi(y_w)]"));

  const std::size_t q = std::max<std::size_t>(1, r.records.size() / 4);
  double first_q = 0.0, last_q = 0.0;
  for (std::size_t i = 0; i < q; ++i) first_q += r.records[i].loss / q;
  for (std::size_t i = r.records.size() - q; i < r.records.size(); ++i)
    last_q += r.records[i].loss / q;
  report.verdicts.push_back(make_verdict(
      "dpo-loss-trend-decreasing", last_q < first_q, first_q - last_q, 0.0,
      ">", "first-quartile mean DPO loss minus last-quartile mean"));

  // Contrast: standard DPO from the same initialization may displace the
  // chosen log-likelihood; reported, not asserted.
  {
    TrainConfig std_tc = tc;
    const TrainResult std_r = train_run(std_tc, TrainMode::kStandard);
    report.measurements.emplace_back(
        "standard_dpo_logp_chosen_change",
        std_r.records.back().mean_logp_chosen - std_r.initial.mean_logp_chosen);
    report.metrics.push_back({"dpo_standard_contrast.csv", std_r.records});
  }
  return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_entropy_estimator_validation(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.name = "entropy-estimator";
  report.config = cfg;
  report.seeds = {cfg.seed};

  Table table;
  table.filename = "estimator_errors.csv";
  table.header = {"seed_index", "num_samples", "abs_error"};

  std::vector<std::vector<double>> errors(kEstimatorSampleCounts.size());
  for (int s = 0; s < kEstimatorSeeds; ++s) {
    Rng setup_rng(Rng::derive(cfg.seed, 600 + static_cast<std::uint64_t>(s)));
    const Logits theta_ref = make_reference(cfg.num_classes, setup_rng);
    const SimplexDist ref = softmax(theta_ref);
    const SimplexDist policy = softmax(make_target(theta_ref, cfg.tau));
    const double exact = entropy(did(policy, ref));
    for (std::size_t ni = 0; ni < kEstimatorSampleCounts.size(); ++ni) {
      Rng est_rng(Rng::derive(cfg.seed,
                              700 + static_cast<std::uint64_t>(s) * 16 + ni));
      const DidEntropyEstimate est =
          did_entropy_is(policy, ref, kEstimatorSampleCounts[ni], est_rng);
      const double err = std::abs(est.value - exact);
      errors[ni].push_back(err);
      table.rows.push_back({static_cast<double>(s),
                            static_cast<double>(kEstimatorSampleCounts[ni]),
                            err});
    }
  }
  report.tables.push_back(std::move(table));

  std::vector<double> medians;
  for (auto& e : errors) medians.push_back(median(e));
  for (std::size_t i = 0; i < medians.size(); ++i)
    report.measurements.emplace_back(
        "median_abs_error_" + std::to_string(kEstimatorSampleCounts[i]),
        medians[i]);

  double max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < medians.size(); ++i)
    max_increase = std::max(max_increase, medians[i] - medians[i - 1]);
  report.verdicts.push_back(make_verdict(
      "median-error-non-increasing", max_increase <= 0.0, max_increase, 0.0,
      "<=", "largest increase of the median |error| when samples double"));
  report.verdicts.push_back(make_verdict(
      "median-error-4096-bound",
      medians.back() < cfg.thresholds.estimator_median_err, medians.back(),
      cfg.thresholds.estimator_median_err, "<",
      "median |estimate - exact| at 4096 samples (pre-registered bound)"));

  // policy == reference: the ratio expectation term is identically zero.
  double max_expectation_term = 0.0;
  {
    Rng rng(Rng::derive(cfg.seed, 0x1DE));
    const Logits theta_ref = make_reference(cfg.num_classes, rng);
    const SimplexDist ref = softmax(theta_ref);
    for (int n : kEstimatorSampleCounts) {
      const DidEntropyEstimate est = did_entropy_is(ref, ref, n, rng);
      max_expectation_term = std::max(
          max_expectation_term, std::abs(est.log_partition - est.value));
    }
  }
  report.verdicts.push_back(make_verdict(
      "identity-zero-expectation-term", max_expectation_term == 0.0,
      max_expectation_term, 0.0, "==",
      "max |self-normalized expectation term| with policy == reference"));
  return report;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "encode-check",  "objective-comparison", "lld",
      "exploration",   "optimal-data",         "margin-triangle",
      "entropy-claim", "dpo-pg",               "entropy-estimator"};
  return names;
}

ExperimentReport run_experiment(const std::string& name,
                                const ExperimentConfig& cfg) {
  if (name == "encode-check") return run_encode_check(cfg);
  if (name == "objective-comparison") return run_objective_comparison(cfg);
  if (name == "lld") return run_lld(cfg);
  if (name == "exploration") return run_exploration(cfg);
  if (name == "optimal-data") return run_optimal_data_sweep(cfg);
  if (name == "margin-triangle") return run_margin_triangle(cfg);
  if (name == "entropy-claim") return run_entropy_claim(cfg);
  if (name == "dpo-pg") return run_dpo_pg_properties(cfg);
  if (name == "entropy-estimator") return run_entropy_estimator_validation(cfg);
  throw std::invalid_argument("unknown experiment: " + name);
}

}  // namespace didlab
