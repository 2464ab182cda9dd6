// Copyright 2026 The nonuniform-opt Authors
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

// nonuniform_opt: run experiment configs, figure presets and verification suites.

#include "config.hpp"
#include "experiment.hpp"
#include "figures_generated.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace nu = nonuniform;
namespace cli = nonuniform::cli;

namespace {

constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

std::string figure_of(const std::string& file) {
  const std::string stem = file.substr(0, file.rfind('.'));
  return stem.substr(0, stem.find('_'));
}

std::vector<cli::ExperimentConfig> figure_configs(const std::string& id) {
  std::vector<cli::ExperimentConfig> out;
  for (const auto& fig : cli::kEmbeddedFigures) {
    if (figure_of(fig.file) != id) continue;
    const auto doc = cli::ConfigDoc::parse(fig.text, cli::ConfigDoc::Format::toml, fig.file);
    out.push_back(cli::parse_config(doc));
  }
  if (out.empty()) {
    std::string ids;
    for (const auto& v : nu::presets::figure_ids()) ids += (ids.empty() ? "" : ", ") + v;
    throw nu::ConfigError("unknown figure id '" + id + "' (valid ids: " + ids + ")");
  }
  return out;
}

int run_configs(std::vector<cli::ExperimentConfig> cfgs, const cli::Overrides& ov, const std::string& out_dir) {
  for (auto& c : cfgs) cli::apply(c, ov);
  const auto written = cli::run_experiments(cfgs, out_dir, cli::thread_cap());
  for (const auto& w : written)
    std::printf("%s (%zu rows, %s)\n", w.csv.string().c_str(), w.rows, w.stop_reason.c_str());
  return 0;
}

cli::Json violation_json(const nu::Violation& v) {
  cli::Json j = cli::Json::object();
  j["point"] = v.point;
  j["lhs"] = v.lhs;
  j["rhs"] = v.rhs;
  j["note"] = v.note;
  return j;
}

int run_verify(const std::string& suite, std::uint64_t seed) {
  const auto reports = nu::verify::run_suite(suite, seed);
  bool ok = true;
  cli::Json checks = cli::Json::array();
  for (const auto& r : reports) {
    cli::Json j = cli::Json::object();
    j["name"] = r.name;
    j["checked"] = r.checked;
    j["passed"] = r.passed;
    j["worst_margin"] = r.worst_margin;
    cli::Json vs = cli::Json::array();
    for (const auto& v : r.violations) vs.push_back(violation_json(v));
    j["violations"] = vs;
    checks.push_back(j);
    ok = ok && r.ok();
  }
  cli::Json report = cli::Json::object();
  report["version"] = NONUNIFORM_OPT_VERSION;
  report["suite"] = suite;
  report["seed"] = seed;
  report["ok"] = ok;
  report["checks"] = checks;
  std::cout << report.dump(2) << "\n";
  return ok ? 0 : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient methods under non-uniform smoothness: experiments and checks", "nonuniform_opt"};
  app.set_version_flag("--version", NONUNIFORM_OPT_VERSION);
  app.require_subcommand(1);

  std::string out_dir = "results";
  std::optional<std::uint64_t> seed;
  std::optional<long> max_iters;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out-dir", out_dir, "Directory for CSV and JSON output")->capture_default_str();
    sub->add_option("--seed", seed, "Seed overriding the config");
    sub->add_option("--max-iters", max_iters, "Iteration budget overriding the config");
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment config (TOML, or JSON by .json extension)");
  run->add_option("config", config_path, "Config file")->required();
  add_common(run);

  std::string figure_id;
  auto* figure = app.add_subcommand("figure", "Run a figure preset: fig3, fig6, fig7, d1, d2, d3, d4");
  figure->add_option("id", figure_id, "Figure id")->required();
  add_common(figure);

  std::string suite;
  std::uint64_t verify_seed = 7;
  auto* verify = app.add_subcommand("verify", "Run sampled inequality checks; JSON report on stdout");
  verify->add_option("suite", suite, "all, core, objectives, bandit, mdp, glm or lemmas")->required();
  verify->add_option("--seed", verify_seed, "Sampling seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const cli::Overrides ov{seed, max_iters};
    if (*run) {
      const auto doc = cli::ConfigDoc::load(config_path);
      const std::string stem = std::filesystem::path(config_path).stem().string();
      return run_configs({cli::parse_config(doc, stem)}, ov, out_dir);
    }
    if (*figure) return run_configs(figure_configs(figure_id), ov, out_dir);
    return run_verify(suite, verify_seed);
  } catch (const nu::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
