// Copyright 2026 The collapse-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "collapse/config.hpp"

#include <cmath>
#include <fstream>

namespace collapse {

using nlohmann::json;

std::string to_string(Workflow w) {
  switch (w) {
    case Workflow::kPredict:
      return "predict";
    case Workflow::kSolve:
      return "solve";
    case Workflow::kThresholds:
      return "thresholds";
    case Workflow::kSeli:
      return "seli";
    case Workflow::kSweep:
      return "sweep";
  }
  return "unknown";
}

Workflow workflow_from_string(const std::string& name) {
  if (name == "predict") return Workflow::kPredict;
  if (name == "solve") return Workflow::kSolve;
  if (name == "thresholds") return Workflow::kThresholds;
  if (name == "seli") return Workflow::kSeli;
  if (name == "sweep") return Workflow::kSweep;
  throw ConfigError("unknown workflow '" + name + "'");
}

namespace {

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
T require(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ConfigError(std::string("config is missing required key '") + key + "'");
  return get_or<T>(obj, key, T{});
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("config key '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::vector<std::size_t> require_count_list(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ConfigError(std::string("config is missing required key '") + key + "'");
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(std::string("config key '") + key + "' must be a list");
  std::vector<std::size_t> out;
  for (const json& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 0) {
      throw ConfigError(std::string("config key '") + key + "' must hold nonnegative integers");
    }
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

SolverConfig parse_solver(const json& s) {
  if (!s.is_object()) throw ConfigError("config key 'solver' must be an object");
  SolverConfig c;
  c.max_iters = get_count(s, "max_iters", c.max_iters);
  c.step_size = get_or(s, "step_size", c.step_size);
  if (s.contains("method")) {
    try {
      c.method = method_from_string(get_or<std::string>(s, "method", ""));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  c.beta1 = get_or(s, "beta1", c.beta1);
  c.beta2 = get_or(s, "beta2", c.beta2);
  c.epsilon = get_or(s, "epsilon", c.epsilon);
  c.decay_factor = get_or(s, "decay_factor", c.decay_factor);
  c.decay_at = get_or(s, "decay_at", c.decay_at);
  c.stop_residual = get_or(s, "stop_residual", c.stop_residual);
  c.log_interval = get_count(s, "log_interval", c.log_interval);
  c.seed = get_or<std::uint64_t>(s, "seed", c.seed);
  c.init_scale = get_or(s, "init_scale", c.init_scale);
  c.probe_step = get_or(s, "probe_step", c.probe_step);
  c.rank_tol = get_or(s, "rank_tol", c.rank_tol);
  return c;
}

SweepSpec parse_sweep(const json& s) {
  if (!s.is_object()) throw ConfigError("config key 'sweep' must be an object");
  SweepSpec sw;
  sw.ratios = get_or<std::vector<double>>(s, "ratios", {});
  sw.num_major = get_count(s, "K_A", sw.num_major);
  sw.num_minor = get_count(s, "K_B", sw.num_minor);
  sw.n_minor = get_count(s, "n_B", sw.n_minor);
  if (sw.ratios.empty()) throw ConfigError("sweep: 'ratios' must be a nonempty list");
  for (double r : sw.ratios) {
    if (!(r >= 1.0) || !std::isfinite(r)) throw ConfigError("sweep: every ratio must be >= 1");
  }
  if (sw.num_major == 0 || sw.num_minor == 0 || sw.n_minor == 0) {
    throw ConfigError("sweep: K_A, K_B and n_B must be positive");
  }
  return sw;
}

}  // namespace

ProblemSpec sweep_point(const RunConfig& cfg, double ratio) {
  if (!cfg.sweep) throw ConfigError("sweep_point: config has no sweep");
  const SweepSpec& sw = *cfg.sweep;
  const double n_major = ratio * static_cast<double>(sw.n_minor);
  const double rounded = std::round(n_major);
  if (std::abs(n_major - rounded) > 1e-9 * std::max(1.0, n_major)) {
    throw ConfigError("sweep: R * n_B must be an integer sample count");
  }
  ProblemSpec spec;
  spec.num_classes = sw.num_major + sw.num_minor;
  spec.dim = cfg.spec.dim == 0 ? spec.num_classes : cfg.spec.dim;
  spec.counts.assign(sw.num_major, static_cast<std::size_t>(rounded));
  spec.counts.insert(spec.counts.end(), sw.num_minor, sw.n_minor);
  spec.lambda_w = cfg.spec.lambda_w;
  spec.lambda_h = cfg.spec.lambda_h;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

RunConfig parse_config(const json& doc, Workflow workflow) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  cfg.workflow = workflow;
  cfg.spec.lambda_w = require<double>(doc, "lambda_w");
  cfg.spec.lambda_h = require<double>(doc, "lambda_h");
  if (doc.contains("solver")) cfg.solver = parse_solver(doc.at("solver"));
  cfg.lambda_ladder = get_or(doc, "lambda_ladder", cfg.lambda_ladder);
  cfg.seeds = get_count(doc, "seeds", cfg.seeds);
  if (cfg.seeds == 0) throw ConfigError("config key 'seeds' must be >= 1");

  try {
    cfg.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (workflow == Workflow::kSweep) {
    if (!doc.contains("sweep")) throw ConfigError("the sweep workflow needs a 'sweep' object with a nonempty 'ratios' list");
    cfg.sweep = parse_sweep(doc.at("sweep"));
    cfg.spec.dim = get_count(doc, "d", 0);
    cfg.spec = sweep_point(cfg, cfg.sweep->ratios.front());
    return cfg;
  }

  cfg.spec.counts = require_count_list(doc, "counts");
  cfg.spec.num_classes = get_count(doc, "K", cfg.spec.counts.size());
  cfg.spec.dim = get_count(doc, "d", cfg.spec.num_classes);
  try {
    cfg.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, Workflow workflow) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, workflow);
}

json to_json(const ProblemSpec& spec) {
  return {{"K", spec.num_classes},
          {"d", spec.dim},
          {"counts", spec.counts},
          {"N", spec.total()},
          {"lambda_w", spec.lambda_w},
          {"lambda_h", spec.lambda_h}};
}

json to_json(const SolverConfig& c) {
  return {{"method", to_string(c.method)},  {"max_iters", c.max_iters},
          {"step_size", c.step_size},       {"beta1", c.beta1},
          {"beta2", c.beta2},               {"epsilon", c.epsilon},
          {"decay_factor", c.decay_factor}, {"decay_at", c.decay_at},
          {"stop_residual", c.stop_residual}, {"log_interval", c.log_interval},
          {"seed", c.seed},                 {"init_scale", c.init_scale},
          {"probe_step", c.probe_step},     {"rank_tol", c.rank_tol}};
}

}  // namespace collapse
