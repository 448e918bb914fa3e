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

#include "collapse/workflows.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <system_error>

#include <CLI11.hpp>

#include "collapse/analysis.hpp"
#include "collapse/report.hpp"

namespace collapse {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("output directory " + dir.string() + " is not writable");
}

json collapse_json(const ProblemSpec& spec) {
  const CollapseReport r = collapse_report(spec);
  json j = report::to_json(r);
  if (auto g = TwoGroupSpec::from_problem_spec(spec)) j["imbalance_ratio"] = g->imbalance_ratio();
  return j;
}

json final_state_json(const RunConfig& cfg, const SolveSummary& s) {
  json j = {{"spec", to_json(cfg.spec)}, {"solver", to_json(cfg.solver)}, {"seeds", cfg.seeds},
            {"closed_form_loss", s.closed_form_loss}};
  if (s.diverged) {
    j["status"] = "diverged";
    j["message"] = s.message;
    return j;
  }
  const RunResult& r = s.result;
  j["status"] = r.converged ? "converged" : "max_iters";
  j["seed"] = r.seed;
  j["iterations"] = r.state.iter;
  j["loss"] = r.state.loss;
  j["residual"] = r.state.residual;
  j["loss_gap"] = r.state.loss - s.closed_form_loss;
  j["metrics"] = report::to_json(r.trajectory.snapshots.back().metrics);
  j["classifier"] = report::to_json(r.state.w);
  j["class_means"] = report::to_json(class_means_of(r.state.h, cfg.spec.counts));
  return j;
}

// Solve without writing anything.
SolveSummary solve(const RunConfig& cfg) {
  SolveSummary s;
  s.closed_form_loss = closed_form_loss(cfg.spec);
  try {
    s.result = run_best_of(cfg.spec, cfg.solver, cfg.seeds);
  } catch (const DivergenceError& e) {
    s.diverged = true;
    s.message = e.what();
  }
  return s;
}

void write_solve(const RunConfig& cfg, const fs::path& dir, const SolveSummary& s) {
  if (!s.diverged) report::write_file(dir / "trajectory.csv", report::trajectory_csv(s.result.trajectory));
  report::write_file(dir / "final_state.json", dump(final_state_json(cfg, s)));
}

std::string flag(bool b) { return b ? "1" : "0"; }

std::string ratio_label(double r) {
  std::string s = report::format_real(r);
  std::replace(s.begin(), s.end(), '.', 'p');
  return "R_" + s;
}

TwoGroupSpec seli_groups(const ProblemSpec& spec) {
  if (auto g = TwoGroupSpec::from_problem_spec(spec)) {
    if (g->num_major != g->num_minor) {
      throw ConfigError("seli: majority and minority groups must have the same number of classes");
    }
    return *g;
  }
  const bool equal = std::all_of(spec.counts.begin(), spec.counts.end(),
                                 [&](std::size_t n) { return n == spec.counts.front(); });
  if (equal && spec.num_classes % 2 == 0) {
    TwoGroupSpec g;
    g.num_major = g.num_minor = spec.num_classes / 2;
    g.n_major = g.n_minor = spec.counts.front();
    g.lambda_w = spec.lambda_w;
    g.lambda_h = spec.lambda_h;
    return g;
  }
  throw ConfigError("seli: counts must form two equally sized groups, majority classes first");
}

}  // namespace

void cmd_predict(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const ClosedFormGeometry g = closed_form_geometry(cfg.spec);
  json j = report::to_json(g);
  j["spec"] = to_json(cfg.spec);
  j["collapse"] = collapse_json(cfg.spec);
  report::write_file(cfg.output_dir / "geometry.json", dump(j));
  report::write_file(cfg.output_dir / "grams.csv", report::grams_csv(g));
}

SolveSummary cmd_solve(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  SolveSummary s = solve(cfg);
  write_solve(cfg, cfg.output_dir, s);
  if (s.diverged) throw DivergenceError(s.message, 0, 0.0);
  return s;
}

void cmd_thresholds(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  json j = collapse_json(cfg.spec);
  j["spec"] = to_json(cfg.spec);
  report::write_file(cfg.output_dir / "collapse.json", dump(j));
}

void cmd_seli(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const TwoGroupSpec groups = seli_groups(cfg.spec);
  json j = report::to_json(seli_compare(groups));
  j["spec"] = to_json(cfg.spec);
  j["imbalance_ratio"] = groups.imbalance_ratio();
  json ladder = json::array();
  for (double lambda : cfg.lambda_ladder) {
    TwoGroupSpec at = groups;
    at.lambda_w = at.lambda_h = lambda;
    const SeliComparison c = seli_compare(at);
    json row = {{"lambda", lambda},
                {"frobenius_gap_w", c.frobenius_gap_w},
                {"frobenius_gap_h", c.frobenius_gap_h}};
    try {
      row["m_ratio"] = m_ratio_limit(groups.n_major, groups.n_minor, groups.num_classes(), groups.total(), lambda,
                                     lambda);
    } catch (const std::domain_error&) {
      row["m_ratio"] = nullptr;
    }
    ladder.push_back(row);
  }
  j["lambda_ladder"] = ladder;
  report::write_file(cfg.output_dir / "seli.json", dump(j));
}

void cmd_sweep(const RunConfig& cfg, std::size_t max_threads) {
  if (!cfg.sweep || cfg.sweep->ratios.empty()) throw ConfigError("sweep: 'ratios' must be a nonempty list");
  ensure_dir(cfg.output_dir);
  const std::vector<double>& ratios = cfg.sweep->ratios;
  const long n = static_cast<long>(ratios.size());

  // Specs are built up front so config errors surface before any solve.
  std::vector<RunConfig> points(ratios.size(), cfg);
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    points[i].spec = sweep_point(cfg, ratios[i]);
    points[i].output_dir = cfg.output_dir / ratio_label(ratios[i]);
  }

  std::vector<SolveSummary> summaries(ratios.size());
  std::vector<std::string> io_errors(ratios.size());
  const int threads = max_threads > 0 ? static_cast<int>(max_threads) : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long i = 0; i < n; ++i) {
    summaries[i] = solve(points[i]);
    try {
      ensure_dir(points[i].output_dir);
      write_solve(points[i], points[i].output_dir, summaries[i]);
    } catch (const IoError& e) {
      io_errors[i] = e.what();
    }
  }

  std::string csv = std::string(kSweepHeader) + "\r\n";
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const ProblemSpec& spec = points[i].spec;
    const SolveSummary& s = summaries[i];
    const CollapseReport cr = collapse_report(spec);
    const std::size_t ka = cfg.sweep->num_major;
    std::vector<std::string> row = {report::format_real(ratios[i]), std::to_string(spec.counts.front()),
                                    std::to_string(spec.counts.back())};
    if (s.diverged) {
      row.insert(row.end(), {"diverged", "", report::format_real(s.closed_form_loss), ""});
      row.insert(row.end(), 5, std::string(report::kUndefined));
    } else {
      const MetricsReport& m = s.result.trajectory.snapshots.back().metrics;
      row.insert(row.end(), {io_errors[i].empty() ? (s.result.converged ? "converged" : "max_iters") : "io_error",
                             report::format_real(s.result.state.loss), report::format_real(s.closed_form_loss),
                             report::format_real(s.result.state.loss - s.closed_form_loss),
                             report::format_metric(m.nc1), report::format_metric(m.nc2_w_vs_h),
                             report::format_metric(m.nc2_wwt), report::format_metric(m.nc2_hth),
                             report::format_metric(m.nc3_wh)});
    }
    row.insert(row.end(), {flag(cr.collapsed.front()), flag(cr.collapsed[ka]), flag(cr.minority_collapse),
                           flag(cr.complete_collapse)});
    csv += report::csv_record(row);
  }
  report::write_file(cfg.output_dir / "sweep.csv", csv);
}

void run_workflow(const RunConfig& cfg) {
  switch (cfg.workflow) {
    case Workflow::kPredict:
      cmd_predict(cfg);
      return;
    case Workflow::kSolve:
      cmd_solve(cfg);
      return;
    case Workflow::kThresholds:
      cmd_thresholds(cfg);
      return;
    case Workflow::kSeli:
      cmd_seli(cfg);
      return;
    case Workflow::kSweep:
      cmd_sweep(cfg, sweep_thread_cap(std::getenv("COLLAPSE_LAB_THREADS")));
      return;
  }
}

std::size_t sweep_thread_cap(const char* env_value) {
  if (env_value == nullptr || *env_value == '\0') return 0;
  const std::string s(env_value);
  if (s.find_first_not_of("0123456789") != std::string::npos || s.size() > 6 || std::stoul(s) == 0) {
    throw ConfigError("COLLAPSE_LAB_THREADS must be a positive integer, got '" + s + "'");
  }
  return std::stoul(s);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Closed-form and numerical neural-collapse geometry of the unconstrained feature model"};
  app.name("collapse-lab");
  std::string workflow_name;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::size_t> seeds;
  std::optional<double> rank_tol;
  app.add_option("workflow", workflow_name, "predict | solve | thresholds | seli | sweep")
      ->required()
      ->check(CLI::IsMember({"predict", "solve", "thresholds", "seli", "sweep"}));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (created if missing)");
  app.add_option("--seeds", seeds, "solver restarts, best kept")->check(CLI::PositiveNumber);
  app.add_option("--rank-tol", rank_tol, "relative eigenvalue cutoff for the NC1 pseudo-inverse")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig cfg = load_config(config_path, workflow_from_string(workflow_name));
    cfg.output_dir = out_dir;
    if (seeds) cfg.seeds = *seeds;
    if (rank_tol) cfg.solver.rank_tol = *rank_tol;
    run_workflow(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "collapse-lab: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "collapse-lab: diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const IoError& e) {
    std::cerr << "collapse-lab: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "collapse-lab: invalid input: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace collapse
