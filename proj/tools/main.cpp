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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "didlab/config.hpp"
#include "didlab/experiments.hpp"
#include "didlab/report.hpp"

namespace {

namespace fs = std::filesystem;
using namespace didlab;

std::string default_output_root() {
  if (const char* env = std::getenv("DIDLAB_OUT")) return env;
  return "didlab-out";
}

struct CliOptions {
  std::string config_path;
  std::string out_dir = default_output_root();
  std::optional<long> seed;
  std::optional<long> steps;
  std::optional<double> tau;
  std::string construction;  // empty: keep the experiment's default
};

ExperimentConfig load_config(const CliOptions& opt) {
  ExperimentConfig cfg = opt.config_path.empty()
                             ? ExperimentConfig{}
                             : parse_config(opt.config_path);
  if (opt.seed) cfg.seed = static_cast<std::uint64_t>(*opt.seed);
  if (opt.steps) cfg.steps = *opt.steps;
  if (opt.tau) cfg.tau = *opt.tau;
  if (!opt.construction.empty()) {
    const auto c = construction_from_string(opt.construction);
    if (!c) throw std::invalid_argument("unknown construction: " + opt.construction);
    cfg.construction = *c;
  }
  cfg.validate();
  return cfg;
}

// The log-likelihood experiment defaults to the independent-normals pairs;
// every other experiment builds its own construction.
ExperimentConfig config_for(const std::string& name, ExperimentConfig cfg,
                            const CliOptions& opt) {
  if (name == "lld" && opt.construction.empty())
    cfg.construction = Construction::kIndependentNormals;
  return cfg;
}

int run_single(const std::string& name, const CliOptions& opt) {
  const ExperimentConfig cfg = config_for(name, load_config(opt), opt);
  const ExperimentReport report = run_experiment(name, cfg);
  const fs::path dir = fs::path(opt.out_dir) / name;
  RunManifest manifest;
  manifest.experiment = name;
  manifest.config_hash = config_hash_hex(cfg);
  manifest.seeds = report.seeds;
  manifest.output_dir = dir.string();
  manifest.tool_version = kToolVersion;
  manifest.files = write_experiment_outputs(report, dir);
  emit_manifest(manifest, (dir / "manifest.json").string());
  std::cout << render_report_text(report);
  std::cout << "outputs: " << dir.string() << "\n";
  return report.all_pass() ? 0 : 1;
}

int run_all(const CliOptions& opt) {
  const ExperimentConfig base = load_config(opt);
  const fs::path root(opt.out_dir);
  RunManifest manifest;
  manifest.experiment = "all";
  manifest.config_hash = config_hash_hex(base);
  manifest.output_dir = root.string();
  manifest.tool_version = kToolVersion;
  bool all_ok = true;
  for (const std::string& name : experiment_names()) {
    const ExperimentConfig cfg = config_for(name, base, opt);
    const ExperimentReport report = run_experiment(name, cfg);
    const fs::path dir = root / name;
    for (const std::string& f : write_experiment_outputs(report, dir))
      manifest.files.push_back(name + "/" + f);
    for (std::uint64_t s : report.seeds)
      if (std::find(manifest.seeds.begin(), manifest.seeds.end(), s) ==
          manifest.seeds.end())
        manifest.seeds.push_back(s);
    std::cout << render_report_text(report) << "\n";
    all_ok = all_ok && report.all_pass();
  }
  emit_manifest(manifest, (root / "manifest.json").string());
  std::cout << (all_ok ? "all experiments passed" : "FAILURES present")
            << "; outputs under " << root.string() << "\n";
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"didlab: preference-optimization experiments on categorical "
               "energy-based policies"};
  app.require_subcommand(1);

  CliOptions opt;
  std::vector<CLI::App*> subs;
  std::vector<std::string> names = experiment_names();
  names.push_back("all");
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(
        name, name == "all" ? "run every experiment with a shared manifest"
                            : "run the " + name + " experiment");
    sub->add_option("--config", opt.config_path, "JSON config file");
    sub->add_option("--out", opt.out_dir,
                    "output root (default: $DIDLAB_OUT or ./didlab-out)");
    sub->add_option("--seed", opt.seed, "seed override");
    sub->add_option("--steps", opt.steps, "training-steps override");
    sub->add_option("--tau", opt.tau, "target temperature override");
    if (name == "lld")
      sub->add_option("--construction", opt.construction,
                      "pair construction (default independent-normals)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints usage, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      return names[i] == "all" ? run_all(opt) : run_single(names[i], opt);
    }
    std::cerr << app.help() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}
