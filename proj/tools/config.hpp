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

// Experiment configuration: TOML or JSON documents validated into ExperimentConfig.

#ifndef NONUNIFORM_TOOLS_CONFIG_HPP
#define NONUNIFORM_TOOLS_CONFIG_HPP

#include "nonuniform/core.hpp"
#include "nonuniform/optimizers.hpp"

#include <json.hpp>
#include <toml.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace nonuniform::cli {

using Json = nlohmann::ordered_json;

/// Parsed document plus the source line of every key, addressed by JSON pointer.
class ConfigDoc {
 public:
  enum class Format { toml, json };

  static ConfigDoc parse(const std::string& text, Format format, std::string origin) {
    ConfigDoc doc;
    doc.origin_ = std::move(origin);
    if (format == Format::json) {
      try {
        doc.root_ = Json::parse(text);
      } catch (const Json::parse_error& e) {
        throw ConfigError(doc.origin_ + ": " + e.what());
      }
      std::size_t cursor = 0;
      doc.index_json(text, doc.root_, "", cursor);
    } else {
      try {
        const toml::table table = toml::parse(text, doc.origin_);
        doc.root_ = doc.from_toml(table, "");
      } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << doc.origin_ << ":" << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
      }
    }
    if (!doc.root_.is_object()) throw ConfigError(doc.origin_ + ":1: top level must be a table");
    return doc;
  }

  static ConfigDoc load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const Format fmt = path.extension() == ".json" ? Format::json : Format::toml;
    return parse(buf.str(), fmt, path.filename().string());
  }

  const Json& root() const { return root_; }
  const std::string& origin() const { return origin_; }

  int line_of(const std::string& pointer) const {
    auto it = lines_.find(pointer);
    return it == lines_.end() ? 0 : it->second;
  }

  /// "origin:line" for a key, falling back to the nearest ancestor with a line.
  std::string where(std::string pointer) const {
    for (;;) {
      if (const int line = line_of(pointer)) return origin_ + ":" + std::to_string(line);
      if (pointer.empty()) return origin_ + ":1";
      pointer = pointer.substr(0, pointer.rfind('/'));
    }
  }

 private:
  Json from_toml(const toml::node& node, const std::string& ptr) {
    if (node.source().begin.line) lines_.emplace(ptr, static_cast<int>(node.source().begin.line));
    if (const auto* t = node.as_table()) {
      Json out = Json::object();
      for (const auto& [key, child] : *t) {
        const std::string child_ptr = ptr + "/" + std::string(key.str());
        if (key.source().begin.line) lines_[child_ptr] = static_cast<int>(key.source().begin.line);
        const int key_line = line_of(child_ptr);
        out[std::string(key.str())] = from_toml(child, child_ptr);
        if (key_line) lines_[child_ptr] = key_line;
      }
      return out;
    }
    if (const auto* a = node.as_array()) {
      Json out = Json::array();
      for (std::size_t i = 0; i < a->size(); ++i) out.push_back(from_toml(*a->get(i), ptr + "/" + std::to_string(i)));
      return out;
    }
    if (const auto* v = node.as_string()) return v->get();
    if (const auto* v = node.as_integer()) return v->get();
    if (const auto* v = node.as_floating_point()) return v->get();
    if (const auto* v = node.as_boolean()) return v->get();
    throw ConfigError(origin_ + ":" + std::to_string(node.source().begin.line) +
                      ": dates and times are not supported");
  }

  // nlohmann keeps no positions; keys are located by scanning forward in
  // document order, which ordered_json preserves.
  void index_json(const std::string& text, const Json& node, const std::string& ptr, std::size_t& cursor) {
    if (node.is_object()) {
      for (const auto& [key, child] : node.items()) {
        const std::string needle = Json(key).dump();
        std::size_t pos = text.find(needle, cursor);
        while (pos != std::string::npos) {
          std::size_t after = pos + needle.size();
          while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
          if (after < text.size() && text[after] == ':') break;
          pos = text.find(needle, pos + 1);
        }
        const std::string child_ptr = ptr + "/" + key;
        if (pos != std::string::npos) {
          lines_[child_ptr] = 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
          cursor = pos + needle.size();
        }
        index_json(text, child, child_ptr, cursor);
      }
    } else if (node.is_array()) {
      for (std::size_t i = 0; i < node.size(); ++i) index_json(text, node[i], ptr + "/" + std::to_string(i), cursor);
    }
  }

  Json root_;
  std::string origin_;
  std::map<std::string, int> lines_;
};

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

struct ObjectiveSpec {
  std::string kind;
  double p = 4.0;                        // power
  std::optional<std::vector<double>> target;  // softmax-kl, softmax-mse
  long samples = 10;                     // glm
  long features = 2;                     // glm
  bool unit_features = true;             // glm
  std::vector<double> rewards = {1.0, 0.8, 0.1};  // bandit
  int height = 4;                        // tree-mdp
  int branching = 4;                     // tree-mdp
  std::string tree_rewards = "uniform";  // tree-mdp
  long states = 5;                       // random-mdp
  long actions = 3;                      // random-mdp
  double gamma = 0.99;                   // tree-mdp, random-mdp
};

struct InitSpec {
  std::string kind = "zeros";  // zeros | theta | plateau | gaussian | log-target
  std::vector<double> theta;
  double scale = 1.0;
};

struct RuleSpec {
  std::string kind;   // gd | ngd | ngd_const | ngd_sqrt | gngd | pg | gnpg
  double eta = 0.0;
  std::string eta_expr;  // "1/beta_uniform" or "theory" when eta is given symbolically
  std::string label;
};

struct RunSpec {
  long max_iters = 10000;
  double grad_tol = 1e-12;
  double delta_tol = 1e-14;
  double divergence = 1e12;
  double beta_floor = kDefaultBetaFloor;
  long keep_all = 100000;
  std::string ns_column = "bound";  // bound | hessian
};

struct FitSpec {
  std::optional<double> t_lo;
  std::optional<double> t_hi;
  std::string model = "auto";  // auto | linear | sublinear
};

struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 0;
  ObjectiveSpec objective;
  InitSpec init;
  std::vector<RuleSpec> rules;
  RunSpec run;
  FitSpec fit;
  Json echo;
};

inline const std::vector<std::string>& objective_kinds() {
  static const std::vector<std::string> kinds = {"power",       "huber", "sigmoid-quartic", "softmax-kl",
                                                 "softmax-mse", "glm",   "bandit",          "tree-mdp",
                                                 "random-mdp"};
  return kinds;
}

inline bool is_policy_kind(const std::string& k) { return k == "bandit" || k == "tree-mdp" || k == "random-mdp"; }

namespace detail {

inline std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x;
  return out;
}

/// Typed, line-anchored access to one table of the document.
class TableReader {
 public:
  TableReader(const ConfigDoc& doc, const Json& table, std::string ptr, std::string display)
      : doc_(doc), table_(table), ptr_(std::move(ptr)), display_(std::move(display)) {
    if (!table_.is_object()) fail(ptr_, display_ + " must be a table");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return table_.contains(key);
  }

  const Json& raw(const std::string& key) {
    if (!has(key)) fail(ptr_, "missing required key '" + qualified(key) + "'");
    return table_.at(key);
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) return fallback ? *fallback : (raw(key), std::string());
    const Json& v = table_.at(key);
    if (!v.is_string()) fail(ptr_ + "/" + key, "key '" + qualified(key) + "' must be a string");
    return v.get<std::string>();
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) return fallback ? *fallback : (raw(key), 0.0);
    const Json& v = table_.at(key);
    if (!v.is_number()) fail(ptr_ + "/" + key, "key '" + qualified(key) + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(ptr_ + "/" + key, "key '" + qualified(key) + "' must be finite");
    return x;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  long integer(const std::string& key, std::optional<long> fallback = std::nullopt) {
    if (!has(key)) return fallback ? *fallback : (raw(key), 0L);
    const Json& v = table_.at(key);
    if (!v.is_number_integer()) fail(ptr_ + "/" + key, "key '" + qualified(key) + "' must be an integer");
    return v.get<long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = table_.at(key);
    if (!v.is_boolean()) fail(ptr_ + "/" + key, "key '" + qualified(key) + "' must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array() || v.empty()) fail(ptr_ + "/" + key, "key '" + qualified(key) + "' must be a non-empty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(ptr_ + "/" + key + "/" + std::to_string(i), "'" + qualified(key) + "' entries must be numbers");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  /// Rejects keys that were never looked up.
  void reject_unknown() const {
    for (const auto& [key, value] : table_.items()) {
      (void)value;
      if (!used_.count(key)) fail(ptr_ + "/" + key, "unknown key '" + qualified(key) + "'");
    }
  }

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    throw ConfigError(doc_.where(ptr) + ": " + msg);
  }

  std::string qualified(const std::string& key) const { return display_.empty() ? key : display_ + "." + key; }

 private:
  const ConfigDoc& doc_;
  const Json& table_;
  std::string ptr_;
  std::string display_;
  std::set<std::string> used_;
};

}  // namespace detail

inline ExperimentConfig parse_config(const ConfigDoc& doc, const std::string& default_name = "experiment") {
  ExperimentConfig cfg;
  cfg.echo = doc.root();
  detail::TableReader top(doc, doc.root(), "", "");
  cfg.name = top.string("name", default_name);
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos)
    top.fail("/name", "name must be a non-empty file name component");
  const long seed = top.integer("seed", 0L);
  if (seed < 0) top.fail("/seed", "seed must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);

  {
    detail::TableReader t(doc, top.raw("objective"), "/objective", "objective");
    auto& o = cfg.objective;
    o.kind = t.string("kind");
    const auto& kinds = objective_kinds();
    if (std::find(kinds.begin(), kinds.end(), o.kind) == kinds.end())
      t.fail("/objective/kind", "unknown objective kind '" + o.kind + "' (expected " + detail::join(kinds) + ")");
    if (o.kind == "power") o.p = t.number("p", 4.0);
    if (o.kind == "softmax-kl" || o.kind == "softmax-mse")
      if (t.has("target")) o.target = t.numbers("target");
    if (o.kind == "glm") {
      o.samples = t.integer("samples", 10L);
      o.features = t.integer("features", 2L);
      o.unit_features = t.boolean("unit_features", true);
      if (o.samples < 1 || o.features < 1) t.fail("/objective", "glm samples and features must be positive");
    }
    if (o.kind == "bandit" && t.has("rewards")) o.rewards = t.numbers("rewards");
    if (o.kind == "tree-mdp") {
      o.height = static_cast<int>(t.integer("height", 4L));
      o.branching = static_cast<int>(t.integer("branching", 4L));
      o.tree_rewards = t.string("rewards", std::string("uniform"));
      o.gamma = t.number("gamma", 0.99);
    }
    if (o.kind == "random-mdp") {
      o.states = t.integer("states", 5L);
      o.actions = t.integer("actions", 3L);
      o.gamma = t.number("gamma", 0.9);
    }
    t.reject_unknown();
  }

  if (top.has("init")) {
    detail::TableReader t(doc, doc.root().at("init"), "/init", "init");
    auto& i = cfg.init;
    i.kind = t.string("kind", std::string("zeros"));
    if (i.kind == "theta") {
      i.theta = t.numbers("theta");
    } else if (i.kind == "gaussian") {
      i.scale = t.number("scale", 1.0);
    } else if (i.kind != "zeros" && i.kind != "plateau" && i.kind != "log-target") {
      t.fail("/init/kind", "unknown init kind '" + i.kind + "' (expected zeros, theta, plateau, gaussian, log-target)");
    }
    t.reject_unknown();
  }

  {
    const Json& rules = top.raw("rules");
    if (!rules.is_array() || rules.empty()) top.fail("/rules", "rules must be a non-empty array of tables");
    std::set<std::string> labels;
    for (std::size_t k = 0; k < rules.size(); ++k) {
      const std::string ptr = "/rules/" + std::to_string(k);
      detail::TableReader t(doc, rules[k], ptr, "rules[" + std::to_string(k) + "]");
      RuleSpec r;
      r.kind = t.string("kind");
      const bool policy = r.kind == "pg" || r.kind == "gnpg";
      if (!policy) {
        try {
          r.kind = to_string(parse_step_kind(r.kind));
        } catch (const ConfigError&) {
          t.fail(ptr + "/kind", "unknown rule kind '" + r.kind + "' (expected gd, ngd, ngd_sqrt, gngd, pg, gnpg)");
        }
      }
      if (policy != is_policy_kind(cfg.objective.kind))
        t.fail(ptr + "/kind", policy ? "pg and gnpg rules need a bandit or MDP objective"
                                     : "bandit and MDP objectives take pg or gnpg rules");
      const Json& eta = t.raw("eta");
      if (eta.is_string()) {
        r.eta_expr = eta.get<std::string>();
        if (r.eta_expr != "1/beta_uniform" && r.eta_expr != "theory")
          t.fail(ptr + "/eta", "eta must be a number, \"1/beta_uniform\" or \"theory\"");
      } else {
        r.eta = t.number("eta");
        if (!(r.eta > 0.0)) t.fail(ptr + "/eta", "eta must be positive");
      }
      r.label = t.string("label", r.kind);
      if (!labels.insert(r.label).second) t.fail(ptr, "duplicate rule label '" + r.label + "'");
      t.reject_unknown();
      cfg.rules.push_back(std::move(r));
    }
  }

  if (top.has("run")) {
    detail::TableReader t(doc, doc.root().at("run"), "/run", "run");
    auto& r = cfg.run;
    r.max_iters = t.integer("max_iters", r.max_iters);
    r.grad_tol = t.number("grad_tol", r.grad_tol);
    r.delta_tol = t.number("delta_tol", r.delta_tol);
    r.divergence = t.number("divergence", r.divergence);
    r.beta_floor = t.number("beta_floor", r.beta_floor);
    r.keep_all = t.integer("keep_all", r.keep_all);
    r.ns_column = t.string("ns_column", r.ns_column);
    if (r.max_iters < 1) t.fail("/run/max_iters", "max_iters must be at least 1");
    if (r.keep_all < 1) t.fail("/run/keep_all", "keep_all must be at least 1");
    if (r.ns_column != "bound" && r.ns_column != "hessian")
      t.fail("/run/ns_column", "ns_column must be \"bound\" or \"hessian\"");
    t.reject_unknown();
  }

  if (top.has("fit")) {
    detail::TableReader t(doc, doc.root().at("fit"), "/fit", "fit");
    cfg.fit.t_lo = t.optional_number("t_lo");
    cfg.fit.t_hi = t.optional_number("t_hi");
    cfg.fit.model = t.string("model", std::string("auto"));
    if (cfg.fit.model != "auto" && cfg.fit.model != "linear" && cfg.fit.model != "sublinear")
      t.fail("/fit/model", "model must be auto, linear or sublinear");
    t.reject_unknown();
  }

  top.reject_unknown();
  return cfg;
}

}  // namespace nonuniform::cli

#endif  // NONUNIFORM_TOOLS_CONFIG_HPP
