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

#include "collapse/report.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include "collapse/config.hpp"

namespace collapse::report {

using nlohmann::json;

namespace {

constexpr std::string_view kEol = "\r\n";

json metric_json(const MetricValue& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_metric(const MetricValue& v) { return v ? format_real(*v) : std::string(kUndefined); }

std::string csv_record(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out += f;
      continue;
    }
    out += '"';
    for (char c : f) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
  }
  out += kEol;
  return out;
}

json to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

Matrix matrix_from_json(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

json to_json(const ClosedFormGeometry& g) {
  return {{"margin_constants", g.margin_constants},
          {"mean_norms_sq", g.mean_norms_sq},
          {"class_means", to_json(g.class_means)},
          {"classifier", to_json(g.classifier)},
          {"logits", to_json(g.logits)},
          {"margins", g.margins},
          {"optimal_loss", g.optimal_loss}};
}

ClosedFormGeometry geometry_from_json(const json& j) {
  ClosedFormGeometry g;
  g.margin_constants = j.at("margin_constants").get<std::vector<double>>();
  g.mean_norms_sq = j.at("mean_norms_sq").get<std::vector<double>>();
  g.class_means = matrix_from_json(j.at("class_means"));
  g.classifier = matrix_from_json(j.at("classifier"));
  g.logits = matrix_from_json(j.at("logits"));
  g.margins = j.at("margins").get<std::vector<double>>();
  g.optimal_loss = j.at("optimal_loss").get<double>();
  return g;
}

json to_json(const CollapseReport& r) {
  json j = {{"threshold", r.threshold},
            {"collapsed", r.collapsed},
            {"minority_collapse", r.minority_collapse},
            {"complete_collapse", r.complete_collapse}};
  j["minority_ratio_bound"] = r.minority_ratio_bound ? json(*r.minority_ratio_bound) : json(nullptr);
  return j;
}

json to_json(const MetricsReport& m) {
  return {{"nc1", metric_json(m.nc1)},
          {"nc2_w_h", metric_json(m.nc2_w_vs_h)},
          {"nc2_wwt", metric_json(m.nc2_wwt)},
          {"nc2_hth", metric_json(m.nc2_hth)},
          {"nc3_wh", metric_json(m.nc3_wh)}};
}

json to_json(const SeliComparison& s) {
  return {{"distance", "frobenius norm of the difference of unit-Frobenius grams"},
          {"gram_w_ours", to_json(s.gram_w_ours)},
          {"gram_h_centered_ours", to_json(s.gram_h_centered_ours)},
          {"gram_w_ours_limit", to_json(s.gram_w_ours_limit)},
          {"gram_h_centered_ours_limit", to_json(s.gram_h_centered_ours_limit)},
          {"gram_w_seli", to_json(s.gram_w_seli)},
          {"gram_h_seli", to_json(s.gram_h_seli)},
          {"frobenius_gap_w", s.frobenius_gap_w},
          {"frobenius_gap_h", s.frobenius_gap_h},
          {"frobenius_gap_w_limit", s.frobenius_gap_w_limit},
          {"frobenius_gap_h_limit", s.frobenius_gap_h_limit},
          {"m_ratio_at_lambda", s.m_ratio_at_lambda}};
}

std::string grams_csv(const ClosedFormGeometry& g) {
  const Matrix wwt = linalg::matmul_nt(g.classifier, g.classifier);
  const Matrix hth = linalg::matmul_tn(g.class_means, g.class_means);
  const std::size_t kk = hth.rows();
  Matrix p = Matrix::identity(kk);
  for (double& v : p.data()) v -= 1.0 / static_cast<double>(kk);
  const Matrix centered = linalg::matmul(linalg::matmul(p, hth), p);

  std::string out = csv_record({"gram", "row", "col", "value"});
  auto emit = [&](const char* name, const Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c)
        out += csv_record({name, std::to_string(r), std::to_string(c), format_real(m(r, c))});
  };
  emit("WWt", wwt);
  emit("HtH", hth);
  emit("HtH_centered", centered);
  emit("Z", g.logits);
  return out;
}

std::string trajectory_csv(const Trajectory& t) {
  std::string out(kTrajectoryHeader);
  out += kEol;
  for (const Snapshot& s : t.snapshots) {
    out += csv_record({std::to_string(s.iter), format_real(s.loss), format_real(s.residual),
                       format_metric(s.metrics.nc1), format_metric(s.metrics.nc2_w_vs_h),
                       format_metric(s.metrics.nc2_wwt), format_metric(s.metrics.nc2_hth),
                       format_metric(s.metrics.nc3_wh)});
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace collapse::report
