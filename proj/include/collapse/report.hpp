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

// Serialization of results: JSON documents and RFC 4180 CSV tables (CRLF
// line endings, header first). Reals are written with 17 significant digits.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "collapse/analysis.hpp"
#include "collapse/geometry.hpp"
#include "collapse/metrics.hpp"
#include "collapse/solver.hpp"

namespace collapse::report {

inline constexpr std::string_view kTrajectoryHeader =
    "iter,loss,residual,nc1,nc2_w_h,nc2_wwt,nc2_hth,nc3_wh";
inline constexpr std::string_view kUndefined = "undef";

/// %.17g formatting.
std::string format_real(double v);

/// Metric cell: the value, or "undef".
std::string format_metric(const MetricValue& v);

/// Joins fields into one CSV record, quoting where RFC 4180 requires it.
std::string csv_record(const std::vector<std::string>& fields);

nlohmann::json to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ClosedFormGeometry& g);
ClosedFormGeometry geometry_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CollapseReport& r);
nlohmann::json to_json(const MetricsReport& m);
nlohmann::json to_json(const SeliComparison& s);

/// Long-form gram table: gram,row,col,value for WWt, HtH, HtH_centered and Z.
std::string grams_csv(const ClosedFormGeometry& g);

/// One row per snapshot under kTrajectoryHeader.
std::string trajectory_csv(const Trajectory& t);

/// Writes `contents` to `path`, creating parent directories. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace collapse::report
