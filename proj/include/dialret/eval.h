// Copyright 2026 The Dialret Authors.
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

#ifndef DIALRET_EVAL_H_
#define DIALRET_EVAL_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dialret/corpus.h"
#include "dialret/dialog.h"
#include "dialret/encoder.h"
#include "dialret/retrieval.h"
#include "json.hpp"

namespace dialret {

struct Metrics {
  // Percentages, rounded to 4 decimals.
  double r1 = 0.0;
  double r5 = 0.0;
  double r10 = 0.0;
  std::size_t median_rank = 0;  // lower median
  double mean_rank = 0.0;

  bool operator==(const Metrics&) const = default;
};

// Throws DataError on an empty list or a rank of 0.
Metrics ComputeMetrics(std::span<const std::size_t> ranks);

double RoundTo4(double x);

struct RoundMetrics {
  std::size_t round = 0;
  Metrics metrics;

  bool operator==(const RoundMetrics&) const = default;
};

struct MetricsReport {
  std::vector<RoundMetrics> rows;
  nlohmann::json config;

  bool operator==(const MetricsReport&) const = default;
};

// One row per round. Throws DataError when rank lists differ in length.
MetricsReport PerRoundReport(const ExperimentResult& experiment,
                             nlohmann::json config = nlohmann::json::object());

struct PolicyComparison {
  std::vector<std::string> policies;
  std::vector<ExperimentResult> experiments;
  std::vector<MetricsReport> reports;
};

PolicyComparison ComparePolicies(const Corpus& corpus,
                                 std::span<const Policy> policies,
                                 std::size_t rounds, const Encoder& encoder,
                                 const Index& index, std::size_t jobs = 1);

enum class ReportFormat { kCsv, kJson };

// CSV columns: round,R1,R5,R10,MedianR,MeanR; all reals with 4 decimals.
std::string ReportToCsv(const MetricsReport& report);
nlohmann::ordered_json ReportToJson(const MetricsReport& report);
MetricsReport ReportFromJson(const nlohmann::json& j);
// Per-metric arrays indexed by round, for charts.
nlohmann::ordered_json ReportCurveJson(const MetricsReport& report,
                                       const std::string& label);
// Fixed-width text table with 1-decimal percentages.
std::string FormatReportTable(const MetricsReport& report);

void ExportReport(const MetricsReport& report,
                  const std::filesystem::path& path, ReportFormat format);

}  // namespace dialret

#endif  // DIALRET_EVAL_H_
