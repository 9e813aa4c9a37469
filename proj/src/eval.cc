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

#include "dialret/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dialret/error.h"

namespace dialret {
namespace {

std::string Fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
  return buf;
}

}  // namespace

double RoundTo4(double x) { return std::round(x * 1e4) / 1e4; }

Metrics ComputeMetrics(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw DataError("cannot compute metrics of no ranks");
  std::size_t at1 = 0, at5 = 0, at10 = 0;
  double sum = 0.0;
  for (std::size_t r : ranks) {
    if (r < 1) throw DataError("ranks are 1-based; got 0");
    at1 += r <= 1;
    at5 += r <= 5;
    at10 += r <= 10;
    sum += static_cast<double>(r);
  }
  const double n = static_cast<double>(ranks.size());
  std::vector<std::size_t> sorted(ranks.begin(), ranks.end());
  const std::size_t mid = (sorted.size() - 1) / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid),
                   sorted.end());
  Metrics m;
  m.r1 = RoundTo4(100.0 * static_cast<double>(at1) / n);
  m.r5 = RoundTo4(100.0 * static_cast<double>(at5) / n);
  m.r10 = RoundTo4(100.0 * static_cast<double>(at10) / n);
  m.median_rank = sorted[mid];
  m.mean_rank = sum / n;
  return m;
}

MetricsReport PerRoundReport(const ExperimentResult& experiment,
                             nlohmann::json config) {
  MetricsReport report;
  report.config = std::move(config);
  for (std::size_t t = 0; t < experiment.ranks.size(); ++t) {
    if (experiment.ranks[t].size() != experiment.ranks.front().size()) {
      throw DataError("ragged rank lists: round " + std::to_string(t) +
                      " has " + std::to_string(experiment.ranks[t].size()) +
                      " entries");
    }
    report.rows.push_back({t, ComputeMetrics(experiment.ranks[t])});
  }
  return report;
}

PolicyComparison ComparePolicies(const Corpus& corpus,
                                 std::span<const Policy> policies,
                                 std::size_t rounds, const Encoder& encoder,
                                 const Index& index, std::size_t jobs) {
  PolicyComparison out;
  for (const Policy& policy : policies) {
    ExperimentResult exp =
        RunExperiment(corpus, policy, rounds, encoder, index, jobs);
    nlohmann::json config;
    config["policy"] = policy.ToJson();
    config["rounds"] = rounds;
    out.reports.push_back(PerRoundReport(exp, config));
    out.policies.push_back(policy.Name());
    out.experiments.push_back(std::move(exp));
  }
  return out;
}

std::string ReportToCsv(const MetricsReport& report) {
  std::string out = "round,R1,R5,R10,MedianR,MeanR\n";
  for (const RoundMetrics& row : report.rows) {
    const Metrics& m = row.metrics;
    out += std::to_string(row.round) + "," + Fixed(m.r1, 4) + "," +
           Fixed(m.r5, 4) + "," + Fixed(m.r10, 4) + "," +
           std::to_string(m.median_rank) + "," + Fixed(m.mean_rank, 4) + "\n";
  }
  return out;
}

nlohmann::ordered_json ReportToJson(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["config"] = report.config;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const RoundMetrics& row : report.rows) {
    nlohmann::ordered_json r;
    r["round"] = row.round;
    r["R1"] = row.metrics.r1;
    r["R5"] = row.metrics.r5;
    r["R10"] = row.metrics.r10;
    r["MedianR"] = row.metrics.median_rank;
    r["MeanR"] = row.metrics.mean_rank;
    rows.push_back(std::move(r));
  }
  j["per_round"] = std::move(rows);
  return j;
}

MetricsReport ReportFromJson(const nlohmann::json& j) {
  MetricsReport report;
  try {
    report.config = j.at("config");
    for (const auto& r : j.at("per_round")) {
      RoundMetrics row;
      row.round = r.at("round").get<std::size_t>();
      row.metrics.r1 = r.at("R1").get<double>();
      row.metrics.r5 = r.at("R5").get<double>();
      row.metrics.r10 = r.at("R10").get<double>();
      row.metrics.median_rank = r.at("MedianR").get<std::size_t>();
      row.metrics.mean_rank = r.at("MeanR").get<double>();
      report.rows.push_back(row);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad report JSON: ") + e.what());
  }
  return report;
}

nlohmann::ordered_json ReportCurveJson(const MetricsReport& report,
                                       const std::string& label) {
  nlohmann::ordered_json j;
  j["label"] = label;
  auto column = [&](auto getter) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const RoundMetrics& row : report.rows) a.push_back(getter(row));
    return a;
  };
  j["rounds"] = column([](const RoundMetrics& r) { return r.round; });
  j["R1"] = column([](const RoundMetrics& r) { return r.metrics.r1; });
  j["R5"] = column([](const RoundMetrics& r) { return r.metrics.r5; });
  j["R10"] = column([](const RoundMetrics& r) { return r.metrics.r10; });
  j["MedianR"] =
      column([](const RoundMetrics& r) { return r.metrics.median_rank; });
  j["MeanR"] = column([](const RoundMetrics& r) { return r.metrics.mean_rank; });
  return j;
}

std::string FormatReportTable(const MetricsReport& report) {
  char line[128];
  std::string out;
  std::snprintf(line, sizeof(line), "%5s %7s %7s %7s %8s %8s\n", "round",
                "R@1", "R@5", "R@10", "MedianR", "MeanR");
  out += line;
  for (const RoundMetrics& row : report.rows) {
    const Metrics& m = row.metrics;
    std::snprintf(line, sizeof(line), "%5zu %7.1f %7.1f %7.1f %8zu %8.1f\n",
                  row.round, m.r1, m.r5, m.r10, m.median_rank, m.mean_rank);
    out += line;
  }
  return out;
}

void ExportReport(const MetricsReport& report,
                  const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write report " + path.string());
  if (format == ReportFormat::kCsv) {
    out << ReportToCsv(report);
  } else {
    out << ReportToJson(report).dump(2) << '\n';
  }
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

}  // namespace dialret
