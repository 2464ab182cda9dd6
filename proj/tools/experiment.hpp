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

// Runs validated experiment configs and writes one CSV plus JSON sidecar per rule.

#ifndef NONUNIFORM_TOOLS_EXPERIMENT_HPP
#define NONUNIFORM_TOOLS_EXPERIMENT_HPP

#include "config.hpp"

#include "nonuniform.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#ifndef NONUNIFORM_OPT_VERSION
#define NONUNIFORM_OPT_VERSION "v1.0.0"
#endif

namespace nonuniform::cli {

inline constexpr const char* kCsvHeader = "t,value,delta,grad_norm,ns_coeff,effective_step";
inline constexpr Index kMaxHessianColumnDim = 64;

/// The objective of a config together with the structured instance behind it.
struct Problem {
  std::unique_ptr<Objective> objective;
  std::optional<BanditInstance> bandit;
  std::optional<TabularMdp> mdp;
  std::optional<OptimalPolicy> optimum;
  std::optional<GlmDataset> glm;
  Json meta = Json::object();
};

inline Json to_json(const Vec& v) { return Json(to_std(v)); }

inline Vec make_vec_from(const std::vector<double>& xs) {
  return Eigen::Map<const Vec>(xs.data(), static_cast<Index>(xs.size()));
}

inline Problem build_problem(const ExperimentConfig& cfg) {
  const auto& o = cfg.objective;
  Problem pb;
  pb.meta["kind"] = o.kind;
  if (o.kind == "glm") {
    pb.glm = GlmDataset::generate(o.samples, o.features, cfg.seed, o.unit_features);
    pb.objective = std::make_unique<GlmObjective>(*pb.glm);
    pb.meta["samples"] = o.samples;
    pb.meta["features"] = o.features;
    pb.meta["unit_features"] = o.unit_features;
    pb.meta["theta_star"] = to_json(pb.glm->theta_star());
    pb.meta["lambda_phi"] = pb.glm->lambda_phi();
    pb.meta["v"] = pb.glm->v();
    pb.meta["max_feature_sq"] = pb.glm->max_feature_sq();
    pb.meta["beta_uniform"] = pb.glm->beta_uniform();
  } else if (o.kind == "bandit") {
    pb.bandit = BanditInstance(make_vec_from(o.rewards));
    pb.objective = std::make_unique<BanditObjective>(*pb.bandit);
    pb.meta["rewards"] = o.rewards;
    pb.meta["best_arm"] = pb.bandit->best_arm();
  } else if (o.kind == "tree-mdp" || o.kind == "random-mdp") {
    if (o.kind == "tree-mdp") {
      TreeMdpInfo info;
      pb.mdp = tree_mdp(o.height, o.branching, o.gamma, parse_tree_rewards(o.tree_rewards), cfg.seed, &info);
      pb.meta["height"] = o.height;
      pb.meta["branching"] = o.branching;
      pb.meta["rewards"] = o.tree_rewards;
      pb.meta["reward_redraws"] = info.redraws;
      pb.meta["reward_seed"] = info.seed_used;
    } else {
      if (o.states < 1 || o.actions < 1) throw ConfigError("random-mdp needs positive states and actions");
      pb.mdp = random_mdp(o.states, o.actions, o.gamma, cfg.seed);
    }
    auto obj = std::make_unique<MdpObjective>(*pb.mdp);
    pb.optimum = obj->optimum();
    pb.objective = std::move(obj);
    pb.meta["states"] = pb.mdp->states();
    pb.meta["actions"] = pb.mdp->actions();
    pb.meta["gamma"] = pb.mdp->gamma();
    pb.meta["v_star_rho"] = plain_dot(pb.mdp->rho(), pb.optimum->v);
    pb.meta["optimal_actions"] = pb.optimum->actions;
  } else {
    std::optional<Vec> target;
    if (o.target) target = make_vec_from(*o.target);
    pb.objective = o.kind == "power" ? std::make_unique<PowerObjective>(o.p) : make_objective(o.kind, target);
    if (o.kind == "power") pb.meta["p"] = o.p;
    if (target) pb.meta["target"] = *o.target;
  }
  pb.meta["name"] = pb.objective->name();
  pb.meta["dim"] = pb.objective->dim();
  pb.meta["sense"] = pb.objective->sense() == Sense::minimize ? "minimize" : "maximize";
  return pb;
}

inline Vec initial_theta(const ExperimentConfig& cfg, const Problem& pb) {
  const Index dim = pb.objective->dim();
  const auto& init = cfg.init;
  if (init.kind == "zeros") return Vec::Zero(dim);
  if (init.kind == "theta") {
    if (static_cast<Index>(init.theta.size()) != dim)
      throw ConfigError("init.theta has " + std::to_string(init.theta.size()) + " entries, objective needs " +
                        std::to_string(dim));
    return make_vec_from(init.theta);
  }
  if (init.kind == "plateau") {
    if (!pb.bandit) throw ConfigError("init kind 'plateau' needs a bandit objective");
    return bandit_plateau_init(*pb.bandit);
  }
  if (init.kind == "log-target") {
    if (!cfg.objective.target && cfg.objective.kind != "softmax-kl" && cfg.objective.kind != "softmax-mse")
      throw ConfigError("init kind 'log-target' needs a softmax objective");
    const Vec y = cfg.objective.target ? make_vec_from(*cfg.objective.target) : default_softmax_target();
    return y.array().log().matrix();
  }
  std::mt19937_64 rng(cfg.seed + 1);
  std::normal_distribution<double> normal(0.0, init.scale);
  return Vec::NullaryExpr(dim, [&] { return normal(rng); });
}

inline double resolve_eta(const RuleSpec& rule, const Problem& pb) {
  if (rule.eta_expr.empty()) return rule.eta;
  if (rule.eta_expr == "1/beta_uniform") {
    if (!pb.glm) throw ConfigError("eta \"1/beta_uniform\" needs a glm objective");
    return 1.0 / pb.glm->beta_uniform();
  }
  if (pb.mdp) return gnpg_default_step(*pb.mdp);
  if (pb.bandit) return 1.0 / 6.0;
  throw ConfigError("eta \"theory\" needs a bandit or MDP objective");
}

// ---------------------------------------------------------------------------
// One (objective, rule) cell
// ---------------------------------------------------------------------------

struct Row {
  long t = 0;
  double value = 0.0;
  std::optional<double> delta;
  double grad_norm = 0.0;
  std::optional<double> ns_coeff;
  double effective_step = 0.0;
};

struct CellResult {
  std::string label;
  std::vector<Row> rows;
  std::string stop_reason;
  long stride = 1;
  Json extra = Json::object();
};

inline double hessian_radius(const Problem& pb, const Vec& theta) {
  if (pb.glm) return symmetric_spectral_radius(glm_hessian(*pb.glm, theta));
  return symmetric_spectral_radius(finite_diff_hessian(*pb.objective, theta));
}

inline long stride_for(long max_iters, long keep_all) {
  return max_iters <= keep_all ? 1 : (max_iters + keep_all - 1) / keep_all;
}

inline CellResult run_cell(const ExperimentConfig& cfg, const Problem& pb, const RuleSpec& rule) {
  const bool hessian = cfg.run.ns_column == "hessian";
  if (hessian && pb.objective->dim() > kMaxHessianColumnDim)
    throw ConfigError("ns_column = \"hessian\" supports at most " + std::to_string(kMaxHessianColumnDim) +
                      " parameters");
  const Vec theta1 = initial_theta(cfg, pb);
  const double eta = resolve_eta(rule, pb);
  CellResult cell;
  cell.label = rule.label;
  cell.extra["eta"] = eta;
  std::vector<Vec> thetas;

  if (rule.kind == "pg" || rule.kind == "gnpg") {
    PolicyRunOptions po;
    po.normalized = rule.kind == "gnpg";
    po.eta = eta;
    po.iters = cfg.run.max_iters + 1;
    po.stop_delta = cfg.run.delta_tol;
    po.grad_tol = cfg.run.grad_tol;
    po.record_stride = stride_for(cfg.run.max_iters, cfg.run.keep_all);
    po.keep_thetas = hessian;
    const PolicyRun run = pb.bandit ? bandit_policy_run(*pb.bandit, theta1, po)
                                    : mdp_policy_run(*pb.mdp, *pb.optimum, theta1, po);
    cell.stride = po.record_stride;
    cell.stop_reason = to_string(run.stop);
    std::optional<double> ns_factor;
    if (pb.bandit) ns_factor = 3.0;
    if (pb.mdp && pb.mdp->min_mu() > 0.0)
      ns_factor = mdp_ns_factor(pb.mdp->gamma(), c_infinity_bound(*pb.mdp), pb.mdp->states());
    for (const auto& r : run.records) {
      Row row{r.t, r.value, r.delta, r.grad_norm, std::nullopt, 0.0};
      if (ns_factor) row.ns_coeff = *ns_factor * r.grad_norm;
      row.effective_step = po.normalized ? (r.grad_norm > 0.0 ? eta / r.grad_norm : 0.0) : eta;
      cell.rows.push_back(row);
    }
    cell.extra["min_pi_star"] = run.min_pi_star();
    thetas = run.thetas;
  } else {
    RunOptions ro;
    ro.max_iters = cfg.run.max_iters;
    ro.grad_tol = cfg.run.grad_tol;
    ro.delta_tol = cfg.run.delta_tol;
    ro.divergence = cfg.run.divergence;
    ro.beta_floor = cfg.run.beta_floor;
    ro.keep_all = cfg.run.keep_all;
    ro.record_ns = !hessian;
    ro.keep_thetas = hessian || (pb.glm && rule.kind == "gngd");
    const RunResult run = nonuniform::run(StepRule(parse_step_kind(rule.kind), eta), *pb.objective, theta1, ro);
    cell.stride = run.stride;
    cell.stop_reason = to_string(run.stop_reason);
    for (const auto& r : run.records)
      cell.rows.push_back(Row{r.t, r.value, r.delta, r.grad_norm, r.ns_coeff, r.effective_step});
    thetas = run.thetas;
    if (pb.glm && rule.kind == "gngd") {
      long capped = 0;
      Json first = nullptr;
      for (std::size_t i = 0; i < thetas.size(); ++i) {
        if (glm_smoothness(*pb.glm, thetas[i]).capped) {
          if (!capped) first = cell.rows[i].t;
          ++capped;
        }
      }
      cell.extra["beta_capped_rows"] = capped;
      cell.extra["beta_capped_first_t"] = first;
    }
  }
  if (hessian)
    for (std::size_t i = 0; i < thetas.size(); ++i) cell.rows[i].ns_coeff = hessian_radius(pb, thetas[i]);
  return cell;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline std::string format_field(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_field(const std::optional<double>& x) { return x ? format_field(*x) : std::string(); }

inline std::string csv_text(const CellResult& cell) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : cell.rows) {
    out += std::to_string(r.t) + ',' + format_field(r.value) + ',' + format_field(r.delta) + ',' +
           format_field(r.grad_norm) + ',' + format_field(r.ns_coeff) + ',' + format_field(r.effective_step) + '\n';
  }
  return out;
}

inline Json fit_json(const ExperimentConfig& cfg, const CellResult& cell, Json& error) {
  std::vector<RatePoint> traj;
  for (const auto& r : cell.rows)
    if (r.delta) traj.push_back({static_cast<double>(r.t), *r.delta});
  try {
    const FitWindow window{cfg.fit.t_lo, cfg.fit.t_hi};
    RateFit fit;
    if (cfg.fit.model == "auto")
      fit = fit_rate(traj, window);
    else
      fit = fit_model(fit_points(traj, window),
                      cfg.fit.model == "linear" ? RateModel::linear : RateModel::sublinear);
    Json j = Json::object();
    j["model"] = to_string(fit.model);
    j["exponent_or_rate"] = fit.exponent_or_rate;
    j["intercept"] = fit.intercept;
    j["r_squared"] = fit.r_squared;
    j["t_lo"] = fit.t_lo;
    j["t_hi"] = fit.t_hi;
    j["points"] = fit.points;
    return j;
  } catch (const Error& e) {
    error = e.what();
    return nullptr;
  }
}

inline Json sidecar(const ExperimentConfig& cfg, const Problem& pb, const RuleSpec& rule, const CellResult& cell) {
  Json j = Json::object();
  j["version"] = NONUNIFORM_OPT_VERSION;
  j["name"] = cfg.name;
  j["label"] = cell.label;
  j["seed"] = cfg.seed;
  j["objective"] = pb.meta;
  Json r = Json::object();
  r["kind"] = rule.kind;
  r["eta"] = cell.extra["eta"];
  if (!rule.eta_expr.empty()) r["eta_expr"] = rule.eta_expr;
  j["rule"] = r;
  Json run = Json::object();
  run["max_iters"] = cfg.run.max_iters;
  run["grad_tol"] = cfg.run.grad_tol;
  run["delta_tol"] = cfg.run.delta_tol;
  run["divergence"] = cfg.run.divergence;
  run["beta_floor"] = cfg.run.beta_floor;
  run["keep_all"] = cfg.run.keep_all;
  run["ns_column"] = cfg.run.ns_column;
  j["run"] = run;
  j["stop_reason"] = cell.stop_reason;
  j["converged"] = cell.stop_reason == "grad_tol" || cell.stop_reason == "delta_tol";
  j["stride"] = cell.stride;
  j["rows"] = cell.rows.size();
  if (!cell.rows.empty()) {
    j["final_t"] = cell.rows.back().t;
    j["final_value"] = cell.rows.back().value;
    j["final_delta"] = cell.rows.back().delta ? Json(*cell.rows.back().delta) : Json(nullptr);
  }
  for (const auto& [k, v] : cell.extra.items())
    if (k != "eta") j[k] = v;
  Json error = nullptr;
  j["rate_fit"] = fit_json(cfg, cell, error);
  if (!error.is_null()) j["rate_fit_error"] = error;
  j["config"] = cfg.echo;
  return j;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

struct WrittenCell {
  std::filesystem::path csv;
  std::filesystem::path json;
  std::string stop_reason;
  std::size_t rows = 0;
};

/// Overrides from the command line.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<long> max_iters;
};

inline void apply(ExperimentConfig& cfg, const Overrides& ov) {
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.max_iters) {
    if (*ov.max_iters < 1) throw ConfigError("--max-iters must be at least 1");
    cfg.run.max_iters = *ov.max_iters;
  }
}

/// Thread cap from NONUNIFORM_OPT_THREADS, defaulting to the hardware count.
inline unsigned thread_cap() {
  if (const char* env = std::getenv("NONUNIFORM_OPT_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1)
      throw ConfigError(std::string("NONUNIFORM_OPT_THREADS must be a positive integer, got '") + env + "'");
    return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs every (config, rule) cell, up to `threads` at a time. Each cell writes
/// only its own files; results come back in config and rule order.
inline std::vector<WrittenCell> run_experiments(const std::vector<ExperimentConfig>& cfgs,
                                                const std::filesystem::path& out_dir, unsigned threads) {
  std::vector<Problem> problems;
  problems.reserve(cfgs.size());
  for (const auto& c : cfgs) problems.push_back(build_problem(c));

  struct Job {
    std::size_t cfg;
    std::size_t rule;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cfgs.size(); ++c)
    for (std::size_t r = 0; r < cfgs[c].rules.size(); ++r) jobs.push_back({c, r});

  std::filesystem::create_directories(out_dir);
  std::vector<WrittenCell> written(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        const auto& cfg = cfgs[jobs[j].cfg];
        const auto& rule = cfg.rules[jobs[j].rule];
        const auto& pb = problems[jobs[j].cfg];
        const CellResult cell = run_cell(cfg, pb, rule);
        const std::string stem = cfg.name + "_" + rule.label;
        WrittenCell w{out_dir / (stem + ".csv"), out_dir / (stem + ".json"), cell.stop_reason, cell.rows.size()};
        write_file(w.csv, csv_text(cell));
        write_file(w.json, sidecar(cfg, pb, rule, cell).dump(2) + "\n");
        written[j] = std::move(w);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return written;
}

}  // namespace nonuniform::cli

#endif  // NONUNIFORM_TOOLS_EXPERIMENT_HPP
