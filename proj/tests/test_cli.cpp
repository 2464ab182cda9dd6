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

#include "config.hpp"
#include "experiment.hpp"
#include "figures_generated.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace nu = nonuniform;
namespace cli = nonuniform::cli;
namespace fs = std::filesystem;

namespace {

cli::ExperimentConfig parse_toml(const std::string& text) {
  return cli::parse_config(cli::ConfigDoc::parse(text, cli::ConfigDoc::Format::toml, "test.toml"));
}

std::string error_of(const std::string& text, cli::ConfigDoc::Format fmt = cli::ConfigDoc::Format::toml) {
  try {
    cli::parse_config(cli::ConfigDoc::parse(text, fmt, fmt == cli::ConfigDoc::Format::toml ? "c.toml" : "c.json"));
  } catch (const nu::ConfigError& e) {
    return e.what();
  }
  return "no error";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nonuniform_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kPower4 = R"(
name = "p4"
[objective]
kind = "power"
p = 4.0
[init]
kind = "theta"
theta = [1.0]
[[rules]]
kind = "gd"
eta = 0.01
[[rules]]
kind = "gngd"
eta = 0.01
[run]
max_iters = 3000
)";

}  // namespace

TEST(ConfigParse, ReadsAllSections) {
  const auto cfg = parse_toml(kPower4);
  EXPECT_EQ(cfg.name, "p4");
  EXPECT_EQ(cfg.objective.kind, "power");
  EXPECT_EQ(cfg.objective.p, 4.0);
  ASSERT_EQ(cfg.rules.size(), 2u);
  EXPECT_EQ(cfg.rules[1].kind, "gngd");
  EXPECT_EQ(cfg.run.max_iters, 3000);
  EXPECT_EQ(cfg.init.theta, std::vector<double>{1.0});
}

TEST(ConfigParse, MissingObjectiveNamesTheKey) {
  const std::string msg = error_of("name = \"x\"\n[[rules]]\nkind = \"gd\"\neta = 0.1\n");
  EXPECT_NE(msg.find("missing required key 'objective'"), std::string::npos) << msg;
  EXPECT_EQ(msg.rfind("c.toml:", 0), 0u) << msg;
}

TEST(ConfigParse, MissingNestedKeyNamesTheKey) {
  const std::string msg = error_of("[objective]\np = 2.0\n[[rules]]\nkind = \"gd\"\neta = 0.1\n");
  EXPECT_NE(msg.find("'objective.kind'"), std::string::npos) << msg;
  EXPECT_EQ(msg.rfind("c.toml:1:", 0), 0u) << msg;
}

TEST(ConfigParse, UnknownKeysAreRejectedWithTheirLine) {
  const std::string msg = error_of("[objective]\nkind = \"huber\"\n\nwidth = 3\n[[rules]]\nkind = \"gd\"\neta = 0.1\n");
  EXPECT_EQ(msg, "c.toml:4: unknown key 'objective.width'");
  const std::string top = error_of("extra = 1\n[objective]\nkind = \"huber\"\n[[rules]]\nkind = \"gd\"\neta = 0.1\n");
  EXPECT_EQ(top, "c.toml:1: unknown key 'extra'");
}

TEST(ConfigParse, JsonErrorsAreLineAnchored) {
  const std::string text = "{\n  \"objective\": {\"kind\": \"huber\"},\n  \"rules\": [\n    {\"kind\": \"gd\",\n     \"eta\": 0.1, \"zzz\": 1}\n  ]\n}\n";
  EXPECT_EQ(error_of(text, cli::ConfigDoc::Format::json), "c.json:5: unknown key 'rules[0].zzz'");
}

TEST(ConfigParse, TomlSyntaxErrorCarriesLine) {
  const std::string msg = error_of("[objective]\nkind = \n");
  EXPECT_EQ(msg.rfind("c.toml:2:", 0), 0u) << msg;
}

TEST(ConfigParse, RejectsBadValues) {
  EXPECT_NE(error_of("[objective]\nkind = \"cubic\"\n[[rules]]\nkind = \"gd\"\neta = 0.1\n").find("unknown objective kind"),
            std::string::npos);
  EXPECT_NE(error_of("[objective]\nkind = \"huber\"\n[[rules]]\nkind = \"gd\"\neta = -1.0\n").find("positive"),
            std::string::npos);
  EXPECT_NE(error_of("[objective]\nkind = \"huber\"\n[[rules]]\nkind = \"gnpg\"\neta = 0.1\n").find("pg and gnpg"),
            std::string::npos);
  EXPECT_NE(error_of("[objective]\nkind = \"bandit\"\n[[rules]]\nkind = \"gd\"\neta = 0.1\n").find("take pg or gnpg"),
            std::string::npos);
  EXPECT_NE(error_of("[objective]\nkind = \"huber\"\n[[rules]]\nkind = \"gd\"\neta = 0.1\n[[rules]]\nkind = \"gd\"\neta = 0.2\n")
                .find("duplicate rule label"),
            std::string::npos);
  EXPECT_NE(error_of("[objective]\nkind = \"huber\"\n[[rules]]\nkind = \"gd\"\neta = \"big\"\n").find("eta must be"),
            std::string::npos);
}

TEST(ConfigParse, JsonAndTomlGiveTheSameConfig) {
  const auto a = parse_toml(kPower4);
  const std::string json = R"({"name": "p4", "objective": {"kind": "power", "p": 4.0},
    "init": {"kind": "theta", "theta": [1.0]},
    "rules": [{"kind": "gd", "eta": 0.01}, {"kind": "gngd", "eta": 0.01}], "run": {"max_iters": 3000}})";
  const auto b = cli::parse_config(cli::ConfigDoc::parse(json, cli::ConfigDoc::Format::json, "c.json"));
  EXPECT_EQ(a.objective.p, b.objective.p);
  EXPECT_EQ(a.rules.size(), b.rules.size());
  EXPECT_EQ(a.run.max_iters, b.run.max_iters);
  EXPECT_EQ(a.init.theta, b.init.theta);
}

TEST(CsvOutput, SeventeenDigitsAndLineFeeds) {
  EXPECT_EQ(cli::format_field(0.1), "0.10000000000000001");
  EXPECT_EQ(cli::format_field(std::optional<double>{}), "");
  cli::CellResult cell;
  cell.rows.push_back({1, 1.0 / 3.0, 1.0 / 3.0, 2.0, std::nullopt, 0.5});
  const std::string text = cli::csv_text(cell);
  EXPECT_EQ(text, "t,value,delta,grad_norm,ns_coeff,effective_step\n1,0.33333333333333331,0.33333333333333331,2,,0.5\n");
  EXPECT_EQ(std::stod("0.33333333333333331"), 1.0 / 3.0);
}

TEST(RunExperiments, PowerConfigWritesTwoCellsDeterministically) {
  const auto cfg = parse_toml(kPower4);
  const fs::path a = fresh_dir("a"), b = fresh_dir("b");
  const auto wa = cli::run_experiments({cfg}, a, 1);
  const auto wb = cli::run_experiments({cfg}, b, 4);
  ASSERT_EQ(wa.size(), 2u);
  for (const char* f : {"p4_gd.csv", "p4_gngd.csv", "p4_gd.json", "p4_gngd.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const std::string csv = slurp(a / "p4_gd.csv");
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), wa[0].rows + 1);
  const auto side = cli::Json::parse(slurp(a / "p4_gd.json"));
  EXPECT_EQ(side["rows"].get<std::size_t>(), wa[0].rows);
  EXPECT_EQ(side["stop_reason"], "max_iters");
  EXPECT_EQ(side["rate_fit"]["model"], "sublinear");
  EXPECT_EQ(side["config"]["objective"]["kind"], "power");
  EXPECT_TRUE(side.contains("version"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(RunExperiments, StrideIsRecordedAndRowsMatch) {
  auto cfg = parse_toml(kPower4);
  cfg.run.max_iters = 1000;
  cfg.run.keep_all = 100;
  const fs::path dir = fresh_dir("stride");
  const auto w = cli::run_experiments({cfg}, dir, 2);
  const auto side = cli::Json::parse(slurp(dir / "p4_gd.json"));
  EXPECT_EQ(side["stride"], 10);
  EXPECT_EQ(w[0].rows, 101u);
  fs::remove_all(dir);
}

TEST(RunExperiments, DivergenceIsReportedNotThrown) {
  auto cfg = parse_toml(kPower4);
  cfg.rules.resize(1);
  cfg.rules[0].eta = 10.0;
  const fs::path dir = fresh_dir("div");
  const auto w = cli::run_experiments({cfg}, dir, 1);
  EXPECT_EQ(w[0].stop_reason, "diverged");
  const auto side = cli::Json::parse(slurp(dir / "p4_gd.json"));
  EXPECT_EQ(side["stop_reason"], "diverged");
  EXPECT_FALSE(side["converged"].get<bool>());
  fs::remove_all(dir);
}

TEST(RunExperiments, OverridesApply) {
  auto cfg = parse_toml(kPower4);
  cli::apply(cfg, {std::uint64_t{5}, 10L});
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.run.max_iters, 10);
  EXPECT_THROW(cli::apply(cfg, {std::nullopt, 0L}), nu::ConfigError);
}

TEST(RunExperiments, PolicyCellsUseFullBudgetAndNsColumn) {
  const auto cfg = parse_toml(R"(
name = "b"
[objective]
kind = "bandit"
[init]
kind = "plateau"
[[rules]]
kind = "pg"
eta = 0.4
[run]
max_iters = 50
grad_tol = 0.0
delta_tol = 0.0
)");
  const auto pb = cli::build_problem(cfg);
  const auto cell = cli::run_cell(cfg, pb, cfg.rules[0]);
  ASSERT_EQ(cell.rows.size(), 51u);
  EXPECT_EQ(cell.rows.front().effective_step, 0.4);
  EXPECT_DOUBLE_EQ(*cell.rows.front().ns_coeff, 3.0 * cell.rows.front().grad_norm);
  EXPECT_NEAR(cell.rows.front().value, 0.02 * 1.0 + 0.96 * 0.8 + 0.02 * 0.1, 1e-15);
}

TEST(RunExperiments, HessianColumnMatchesExactGlmHessian) {
  auto cfg = parse_toml(R"(
name = "g"
seed = 7
[objective]
kind = "glm"
[[rules]]
kind = "gd"
eta = 0.09
[run]
max_iters = 5
ns_column = "hessian"
)");
  const auto pb = cli::build_problem(cfg);
  const auto cell = cli::run_cell(cfg, pb, cfg.rules[0]);
  const double expected = nu::symmetric_spectral_radius(nu::glm_hessian(*pb.glm, nu::Vec::Zero(2)));
  EXPECT_EQ(*cell.rows.front().ns_coeff, expected);
}

TEST(Figures, EmbeddedPresetsMatchConfigFiles) {
  const fs::path dir = fs::path(NONUNIFORM_SOURCE_DIR) / "configs" / "figures";
  std::size_t n = 0;
  for (const auto& fig : cli::kEmbeddedFigures) {
    EXPECT_EQ(slurp(dir / fig.file), fig.text) << fig.file;
    EXPECT_NO_THROW(cli::parse_config(cli::ConfigDoc::parse(fig.text, cli::ConfigDoc::Format::toml, fig.file)))
        << fig.file;
    ++n;
  }
  EXPECT_EQ(n, 8u);
}

TEST(Figures, PresetsMatchLibraryConstants) {
  for (const auto& fig : cli::kEmbeddedFigures) {
    const auto cfg = cli::parse_config(cli::ConfigDoc::parse(fig.text, cli::ConfigDoc::Format::toml, fig.file));
    if (cfg.objective.kind == "tree-mdp") {
      bool found = false;
      for (const auto& p : nu::presets::tree_presets()) {
        if (p.height == cfg.objective.height && p.branching == cfg.objective.branching) {
          found = true;
          for (const auto& r : cfg.rules) EXPECT_EQ(r.eta, p.eta);
        }
      }
      EXPECT_TRUE(found) << fig.file;
      EXPECT_EQ(cfg.seed, nu::presets::kTreeSeed);
      EXPECT_EQ(cfg.objective.gamma, nu::presets::kTreeGamma);
      EXPECT_EQ(cfg.run.max_iters, nu::presets::kTreeIters);
    }
    if (cfg.objective.kind == "glm") {
      EXPECT_EQ(cfg.seed, nu::presets::kGlmSeed);
      EXPECT_EQ(cfg.objective.samples, nu::presets::kGlmSamples);
      EXPECT_EQ(cfg.objective.features, nu::presets::kGlmDim);
    }
  }
}

TEST(Environment, ThreadCapParsesEnvironment) {
  ::setenv("NONUNIFORM_OPT_THREADS", "3", 1);
  EXPECT_EQ(cli::thread_cap(), 3u);
  ::setenv("NONUNIFORM_OPT_THREADS", "zero", 1);
  EXPECT_THROW(cli::thread_cap(), nu::ConfigError);
  ::unsetenv("NONUNIFORM_OPT_THREADS");
  EXPECT_GE(cli::thread_cap(), 1u);
}
