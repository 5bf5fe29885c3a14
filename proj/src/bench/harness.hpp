// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bench/metrics.hpp"
#include "router/router.hpp"

namespace vqar {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kTracesFile = "traces.jsonl";
inline constexpr const char* kReportFile = "report.json";

struct ModeCounts {
    int fi = 0;
    int dt = 0;
};

struct BenchmarkReport {
    PipelineMode mode = PipelineMode::Focus;
    std::string model_tag;
    std::string benchmark_tag;
    std::size_t records = 0;
    std::vector<std::string> failed_records;
    double accuracy = 0.0;  // mean per-record score, failures count as 0
    std::map<std::string, std::pair<int, double>> by_qtype;  // qtype -> (count, accuracy)
    std::optional<MmeScores> mme;
    std::optional<double> unanswerable_proportion;  // gate modes only
    ModeCounts modes;
    CostLedger cost;
    std::optional<double> relative_to_baseline;
    std::optional<std::string> baseline_mode;
};

nlohmann::json to_json(const BenchmarkReport& r);

struct RunOptions {
    std::filesystem::path output_dir;                 // empty: nothing written
    std::optional<std::filesystem::path> baseline_dir;  // holds a traces.jsonl
};

struct RunResult {
    std::vector<Trace> traces;  // manifest order
    BenchmarkReport report;
};

// Answers every record with up to config().parallelism workers, scores the
// answers and writes traces.jsonl and report.json atomically when
// output_dir is set. Per-record failures are scored 0 and listed.
RunResult run_benchmark(const std::vector<QARecord>& records, const Router& router, const RunOptions& opts = {});

// Builds the report from finished traces; preds come from trace answers.
BenchmarkReport summarize(const std::vector<QARecord>& records, const std::vector<Trace>& traces,
                          const PipelineConfig& cfg);

std::vector<Trace> load_traces(const std::filesystem::path& run_dir);

// Offline re-scoring of a predictions map; missing ids score 0.
nlohmann::json score_predictions(const std::vector<QARecord>& records,
                                 const std::map<std::string, std::string>& predictions);

// Strategy comparison over records labeled with the path that answers them.
struct PathLabel {
    bool dt_helps = false;
    bool fi_helps = false;
};

// JSONL of {"id", "dt_helps", "fi_helps"}; exactly one flag must be true.
std::map<std::string, PathLabel> load_labels(const std::filesystem::path& path);

struct StrategyRow {
    std::string label;
    int dt = 0;
    int fi = 0;
    int corrected_dt = 0;  // DT-labeled records sent to DT that the reference sent to FI
    int corrected_fi = 0;
};

struct StrategySpec {
    std::string label;
    PipelineConfig config;  // only gate settings and the mllm backend are used
};

// The first strategy is the reference. Each strategy gets fresh backends.
// Error(LabelMismatch) unless labels cover exactly the record ids.
std::vector<StrategyRow> compare_strategies(const std::vector<QARecord>& records,
                                            const std::vector<StrategySpec>& strategies,
                                            const std::map<std::string, PathLabel>& labels);

std::string strategy_table_csv(const std::vector<StrategyRow>& rows);
std::string strategy_table_markdown(const std::vector<StrategyRow>& rows);

// Average unanswerable proportions per model and per benchmark.
struct ProportionRun {
    std::string model_tag;
    std::string benchmark_tag;
    double proportion = 0.0;
};

struct ProportionTable {
    // Sorted by decreasing proportion, then name.
    std::vector<std::pair<std::string, double>> by_model;
    std::vector<std::pair<std::string, double>> by_benchmark;
};

ProportionTable report_proportions(const std::vector<ProportionRun>& runs);
std::string proportions_csv(const ProportionTable& t);
std::string proportions_markdown(const ProportionTable& t);
std::string format_percent(double fraction);  // 0.3 -> "30.00%"

struct BarSeries {
    std::string name;
    std::vector<double> values;  // one per category
};

// Grouped vertical bar chart as a standalone SVG document.
std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<BarSeries>& series);

}  // namespace vqar
