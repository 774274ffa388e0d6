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

#include "didlab/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace didlab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

void expect_keys(const json& obj, const std::string& scope,
                 std::initializer_list<const char*> known) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok) fail("unknown config key '" + scope + item.key() + "'");
  }
}

double get_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(std::string(key) + " must be a number");
  return obj[key].get<double>();
}

long get_integer(const json& obj, const char* key, long fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    fail(std::string(key) + " must be an integer");
  return obj[key].get<long>();
}

std::string get_string(const json& obj, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) fail(std::string(key) + " must be a string");
  return obj[key].get<std::string>();
}

std::string reference_side_name(ReferenceSide s) {
  return s == ReferenceSide::kChosen ? "chosen" : "rejected";
}

}  // namespace

void ExperimentConfig::validate() const {
  if (num_classes < 2) fail("num_classes must be >= 2");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (learning_rate <= 0.0) fail("learning_rate must be > 0");
  if (clip_norm <= 0.0) fail("clip_norm must be > 0");
  if (record_every < 1) fail("record_every must be >= 1");
  if (steps && *steps < 1) fail("steps must be >= 1");
  if (tau <= 0.0) fail("tau must be > 0");
  // tau = 1 collapses the pair construction (pi_w = pi_l, no preference
  // signal) and the target onto the reference.
  if (tau == 1.0) fail("tau must not equal 1");
  if (alpha < 1.0) fail("alpha must be >= 1");
  if (beta_data <= 0.0) fail("beta_data must be > 0");
  switch (objective.kind) {
    case ObjectiveKind::kLogPi:
      break;
    default:
      if (objective.beta <= 0.0) fail("objective.beta must be > 0");
      break;
  }
  if (objective.kind == ObjectiveKind::kSlic && objective.lambda < 0.0)
    fail("objective.lambda must be >= 0");
  if (thresholds.encode_final_js <= 0.0) fail("thresholds.encode_final_js must be > 0");
  if (thresholds.dpo_best_js <= 0.0) fail("thresholds.dpo_best_js must be > 0");
  if (thresholds.baseline_separation <= 1.0)
    fail("thresholds.baseline_separation must be > 1");
  if (thresholds.oracle_match_js <= 0.0) fail("thresholds.oracle_match_js must be > 0");
  if (thresholds.power_law_tv <= 0.0) fail("thresholds.power_law_tv must be > 0");
  if (thresholds.kl_restore_rel <= 0.0) fail("thresholds.kl_restore_rel must be > 0");
  if (thresholds.heatmap_diag_cells < 0)
    fail("thresholds.heatmap_diag_cells must be >= 0");
  if (thresholds.sign_dot_tol <= 0.0) fail("thresholds.sign_dot_tol must be > 0");
  if (thresholds.logp_monotone_tol <= 0.0)
    fail("thresholds.logp_monotone_tol must be > 0");
  if (thresholds.grad_check_rel_err <= 0.0)
    fail("thresholds.grad_check_rel_err must be > 0");
  if (thresholds.estimator_median_err <= 0.0)
    fail("thresholds.estimator_median_err must be > 0");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;

  std::string trimmed = text;
  const auto first = trimmed.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return cfg;  // empty file: all defaults

  json j;
  try {
    j = json::parse(trimmed);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not well-formed JSON: ") + e.what());
  }
  if (!j.is_object()) fail("config root must be an object");

  expect_keys(j, "",
              {"num_classes", "batch_size", "learning_rate", "clip_norm",
               "seed", "record_every", "steps", "tau", "alpha", "beta_data",
               "construction", "reference_side", "objective", "thresholds"});

  cfg.num_classes = static_cast<int>(get_integer(j, "num_classes", cfg.num_classes));
  cfg.batch_size = static_cast<int>(get_integer(j, "batch_size", cfg.batch_size));
  cfg.learning_rate = get_number(j, "learning_rate", cfg.learning_rate);
  cfg.clip_norm = get_number(j, "clip_norm", cfg.clip_norm);
  cfg.seed = static_cast<std::uint64_t>(get_integer(j, "seed", static_cast<long>(cfg.seed)));
  cfg.record_every = get_integer(j, "record_every", cfg.record_every);
  if (j.contains("steps")) cfg.steps = get_integer(j, "steps", 0);
  cfg.tau = get_number(j, "tau", cfg.tau);
  cfg.alpha = get_number(j, "alpha", cfg.alpha);
  cfg.beta_data = get_number(j, "beta_data", cfg.beta_data);

  const std::string cons = get_string(j, "construction", to_string(cfg.construction));
  if (auto c = construction_from_string(cons))
    cfg.construction = *c;
  else
    fail("construction must be one of mirror-rejected, independent-normals, "
         "optimal-rejected, optimal-chosen");

  const std::string side =
      get_string(j, "reference_side", reference_side_name(cfg.reference_side));
  if (side == "chosen")
    cfg.reference_side = ReferenceSide::kChosen;
  else if (side == "rejected")
    cfg.reference_side = ReferenceSide::kRejected;
  else
    fail("reference_side must be 'chosen' or 'rejected'");

  if (j.contains("objective")) {
    const json& o = j["objective"];
    if (!o.is_object()) fail("objective must be an object");
    expect_keys(o, "objective.", {"kind", "beta", "gamma", "lambda"});
    const std::string kind = get_string(o, "kind", to_string(cfg.objective.kind));
    if (auto k = objective_kind_from_string(kind))
      cfg.objective.kind = *k;
    else
      fail("objective.kind must be one of dpo, log-pi, slic, orpo, simpo, "
           "cal-dpo");
    cfg.objective.beta = get_number(o, "beta", cfg.objective.beta);
    cfg.objective.gamma = get_number(o, "gamma", cfg.objective.gamma);
    cfg.objective.lambda = get_number(o, "lambda", cfg.objective.lambda);
  }

  if (j.contains("thresholds")) {
    const json& t = j["thresholds"];
    if (!t.is_object()) fail("thresholds must be an object");
    expect_keys(t, "thresholds.",
                {"encode_final_js", "dpo_best_js", "baseline_separation",
                 "oracle_match_js", "power_law_tv", "kl_restore_rel",
                 "heatmap_diag_cells", "sign_dot_tol", "logp_monotone_tol",
                 "grad_check_rel_err", "estimator_median_err"});
    Thresholds& th = cfg.thresholds;
    th.encode_final_js = get_number(t, "encode_final_js", th.encode_final_js);
    th.dpo_best_js = get_number(t, "dpo_best_js", th.dpo_best_js);
    th.baseline_separation = get_number(t, "baseline_separation", th.baseline_separation);
    th.oracle_match_js = get_number(t, "oracle_match_js", th.oracle_match_js);
    th.power_law_tv = get_number(t, "power_law_tv", th.power_law_tv);
    th.kl_restore_rel = get_number(t, "kl_restore_rel", th.kl_restore_rel);
    th.heatmap_diag_cells =
        static_cast<int>(get_integer(t, "heatmap_diag_cells", th.heatmap_diag_cells));
    th.sign_dot_tol = get_number(t, "sign_dot_tol", th.sign_dot_tol);
    th.logp_monotone_tol = get_number(t, "logp_monotone_tol", th.logp_monotone_tol);
    th.grad_check_rel_err = get_number(t, "grad_check_rel_err", th.grad_check_rel_err);
    th.estimator_median_err = get_number(t, "estimator_median_err", th.estimator_median_err);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  json j;
  j["num_classes"] = config.num_classes;
  j["batch_size"] = config.batch_size;
  j["learning_rate"] = config.learning_rate;
  j["clip_norm"] = config.clip_norm;
  j["seed"] = config.seed;
  j["record_every"] = config.record_every;
  if (config.steps) j["steps"] = *config.steps;
  j["tau"] = config.tau;
  j["alpha"] = config.alpha;
  j["beta_data"] = config.beta_data;
  j["construction"] = to_string(config.construction);
  j["reference_side"] = reference_side_name(config.reference_side);
  j["objective"] = {{"kind", to_string(config.objective.kind)},
                    {"beta", config.objective.beta},
                    {"gamma", config.objective.gamma},
                    {"lambda", config.objective.lambda}};
  const Thresholds& th = config.thresholds;
  j["thresholds"] = {{"encode_final_js", th.encode_final_js},
                     {"dpo_best_js", th.dpo_best_js},
                     {"baseline_separation", th.baseline_separation},
                     {"oracle_match_js", th.oracle_match_js},
                     {"power_law_tv", th.power_law_tv},
                     {"kl_restore_rel", th.kl_restore_rel},
                     {"heatmap_diag_cells", th.heatmap_diag_cells},
                     {"sign_dot_tol", th.sign_dot_tol},
                     {"logp_monotone_tol", th.logp_monotone_tol},
                     {"grad_check_rel_err", th.grad_check_rel_err},
                     {"estimator_median_err", th.estimator_median_err}};
  // nlohmann objects iterate in key order, so the dump is canonical.
  return j.dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string s = serialize_config(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash_hex(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  return std::string(buf);
}

}  // namespace didlab
