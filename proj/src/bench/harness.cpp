// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "bench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

#include "bench/manifest.hpp"
#include "common/error.hpp"
#include "common/files.hpp"
#include "common/text.hpp"

namespace vqar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Trace failed_trace(const QARecord& record, PipelineMode mode, const std::string& what) {
    Trace t;
    t.record_id = record.id;
    t.mode = mode;
    t.route = mode == PipelineMode::OnlyFI ? Route::FastIntuition : Route::DeliberateThinking;
    t.error = what;
    return t;
}

Trace answer_or_flag(const Router& router, const QARecord& record) {
    try {
        return router.answer(record);
    } catch (const Error& e) {
        return failed_trace(record, router.config().mode, std::string(to_string(e.code())) + ": " + e.what());
    } catch (const std::exception& e) {
        return failed_trace(record, router.config().mode, std::string("InternalError: ") + e.what());
    }
}

bool gate_flagged_unanswerable(const Trace& t) {
    if (!t.decision) return true;
    return std::any_of(t.decision->verdicts.begin(), t.decision->verdicts.end(),
                       [](const AnswerabilityVerdict& v) { return v.parsed != Verdict::Answerable; });
}

json mme_to_json(const MmeScores& m) {
    json subtasks = json::array();
    for (const auto& s : m.subtasks) {
        subtasks.push_back({{"subtask", s.subtask},
                            {"cognition", s.cognition},
                            {"questions", s.questions},
                            {"pairs", s.pairs},
                            {"acc", s.acc},
                            {"acc_plus", s.acc_plus},
                            {"score", s.score()}});
    }
    return {{"subtasks", subtasks},
            {"perception_total", m.perception_total},
            {"cognition_total", m.cognition_total},
            {"headline", m.perception_total}};
}

struct Scored {
    double accuracy = 0.0;
    std::map<std::string, std::pair<int, double>> by_qtype;
    std::optional<MmeScores> mme;
};

Scored score_all(const std::vector<QARecord>& records, const std::vector<std::string>& preds) {
    Scored out;
    std::map<std::string, double> sums;
    double total = 0.0;
    bool any_mme = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double s = score_record(preds[i], records[i]);
        total += s;
        const std::string q = to_string(records[i].qtype);
        out.by_qtype[q].first += 1;
        sums[q] += s;
        any_mme = any_mme || records[i].subtask.has_value();
    }
    for (auto& [q, entry] : out.by_qtype) entry.second = sums[q] / entry.first;
    out.accuracy = records.empty() ? 0.0 : total / static_cast<double>(records.size());
    if (any_mme) out.mme = score_mme(records, preds);
    return out;
}

json metrics_json(const Scored& s) {
    json by_qtype = json::object();
    for (const auto& [q, entry] : s.by_qtype) by_qtype[q] = {{"count", entry.first}, {"accuracy", entry.second}};
    json m = {{"accuracy", s.accuracy}, {"normalization_version", kNormalizationVersion}, {"by_qtype", by_qtype}};
    if (s.mme) m["mme"] = mme_to_json(*s.mme);
    return m;
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

json to_json(const BenchmarkReport& r) {
    Scored s;
    s.accuracy = r.accuracy;
    s.by_qtype = r.by_qtype;
    s.mme = r.mme;
    json cost = {{"ledger", to_json(r.cost)},
                 {"relative_to_baseline", r.relative_to_baseline ? json(*r.relative_to_baseline) : json(nullptr)},
                 {"baseline_mode", r.baseline_mode ? json(*r.baseline_mode) : json(nullptr)}};
    return {
        {"version", kReportSchemaVersion},
        {"mode", to_string(r.mode)},
        {"tags", {{"model", r.model_tag}, {"benchmark", r.benchmark_tag}}},
        {"records", r.records},
        {"failed_records", r.failed_records},
        {"metrics", metrics_json(s)},
        {"unanswerable_proportion",
         r.unanswerable_proportion ? json(*r.unanswerable_proportion) : json(nullptr)},
        {"mode_counts", {{"FI", r.modes.fi}, {"DT", r.modes.dt}}},
        {"cost", cost},
    };
}

BenchmarkReport summarize(const std::vector<QARecord>& records, const std::vector<Trace>& traces,
                          const PipelineConfig& cfg) {
    if (records.size() != traces.size()) fail(ErrorCode::Internal, "trace count differs from record count");
    BenchmarkReport r;
    r.mode = cfg.mode;
    r.model_tag = cfg.model_tag;
    r.benchmark_tag = cfg.benchmark_tag;
    r.records = records.size();

    std::vector<std::string> preds;
    int unanswerable = 0;
    for (const Trace& t : traces) {
        if (t.error) r.failed_records.push_back(t.record_id);
        preds.push_back(t.error ? std::string() : t.final_answer);
        (t.route == Route::FastIntuition ? r.modes.fi : r.modes.dt) += 1;
        unanswerable += gate_flagged_unanswerable(t) ? 1 : 0;
        r.cost += t.ledger;
    }
    const Scored s = score_all(records, preds);
    r.accuracy = s.accuracy;
    r.by_qtype = s.by_qtype;
    r.mme = s.mme;

    if (cfg.mode == PipelineMode::Focus && !records.empty()) {
        r.unanswerable_proportion = static_cast<double>(unanswerable) / static_cast<double>(records.size());
        if (cfg.gate.strategy == GateStrategy::SelfConsistency && unanswerable != r.modes.dt) {
            fail(ErrorCode::Internal, "unanswerable count " + std::to_string(unanswerable) +
                                          " differs from DT count " + std::to_string(r.modes.dt));
        }
    }
    return r;
}

RunResult run_benchmark(const std::vector<QARecord>& records, const Router& router, const RunOptions& opts) {
    RunResult out;
    out.traces.resize(records.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) out.traces[i] = answer_or_flag(router, records[i]);
    };
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(router.config().parallelism), records.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    out.report = summarize(records, out.traces, router.config());
    if (opts.baseline_dir) {
        const std::vector<Trace> baseline = load_traces(*opts.baseline_dir);
        out.report.relative_to_baseline = relative_cost(out.traces, baseline);
        out.report.baseline_mode = to_string(baseline.front().mode);
    }

    if (!opts.output_dir.empty()) {
        std::string lines;
        for (const Trace& t : out.traces) lines += to_json(t).dump() + "\n";
        files::write_atomic(opts.output_dir / kTracesFile, lines);
        files::write_atomic(opts.output_dir / kReportFile, to_json(out.report).dump(2) + "\n");
    }
    return out;
}

std::vector<Trace> load_traces(const fs::path& run_dir) {
    const fs::path path = run_dir / kTracesFile;
    if (!fs::exists(path)) fail(ErrorCode::Io, "no " + std::string(kTracesFile) + " in " + run_dir.string());
    std::istringstream in(files::read_text(path));
    std::vector<Trace> traces;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            traces.push_back(trace_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Schema, path.string() + ":" + std::to_string(line_no) + ": " + e.what())
                .set_line(line_no);
        }
    }
    if (traces.empty()) fail(ErrorCode::MismatchedRuns, path.string() + " holds no traces");
    return traces;
}

json score_predictions(const std::vector<QARecord>& records, const std::map<std::string, std::string>& predictions) {
    std::set<std::string> ids;
    for (const auto& r : records) ids.insert(r.id);
    for (const auto& [id, _] : predictions) {
        if (!ids.count(id)) fail(ErrorCode::Schema, "prediction for unknown id '" + id + "'");
    }
    std::vector<std::string> preds;
    std::vector<std::string> missing;
    for (const auto& r : records) {
        auto it = predictions.find(r.id);
        if (it == predictions.end()) missing.push_back(r.id);
        preds.push_back(it == predictions.end() ? std::string() : it->second);
    }
    return {{"version", kReportSchemaVersion},
            {"records", records.size()},
            {"missing_predictions", missing},
            {"metrics", metrics_json(score_all(records, preds))}};
}

std::map<std::string, PathLabel> load_labels(const fs::path& path) {
    std::istringstream in(files::read_text(path));
    std::map<std::string, PathLabel> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        try {
            const json j = json::parse(line);
            const std::string id = j.at("id").get<std::string>();
            PathLabel l{j.at("dt_helps").get<bool>(), j.at("fi_helps").get<bool>()};
            if (l.dt_helps == l.fi_helps) {
                throw Error(ErrorCode::LabelMismatch, where + "exactly one of dt_helps/fi_helps must be true")
                    .set_line(line_no);
            }
            if (!out.emplace(id, l).second) {
                throw Error(ErrorCode::LabelMismatch, where + "duplicate label for '" + id + "'").set_line(line_no);
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Schema, where + e.what()).set_line(line_no);
        }
    }
    return out;
}

std::vector<StrategyRow> compare_strategies(const std::vector<QARecord>& records,
                                            const std::vector<StrategySpec>& strategies,
                                            const std::map<std::string, PathLabel>& labels) {
    if (strategies.empty()) fail(ErrorCode::InvalidArgument, "at least one strategy is required");
    if (labels.size() != records.size()) {
        fail(ErrorCode::LabelMismatch, std::to_string(labels.size()) + " labels for " +
                                           std::to_string(records.size()) + " records");
    }
    for (const auto& r : records) {
        if (!labels.count(r.id)) fail(ErrorCode::LabelMismatch, "no label for record '" + r.id + "'");
    }
    std::vector<ImageRef> images;
    for (const auto& r : records) images.push_back(ImageRef::load(r.image_path));

    std::vector<std::vector<Route>> routes;
    for (const auto& s : strategies) {
        s.config.gate.validate();
        auto mllm = make_chat_client(s.config.mllm, s.config.base_dir);
        std::vector<Route> rs;
        for (std::size_t i = 0; i < records.size(); ++i) {
            rs.push_back(gate_question(s.config.gate, *mllm, records[i].question, images[i]).route);
        }
        routes.push_back(std::move(rs));
    }

    std::vector<StrategyRow> rows;
    for (std::size_t k = 0; k < strategies.size(); ++k) {
        StrategyRow row;
        row.label = strategies[k].label;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const PathLabel& l = labels.at(records[i].id);
            const Route mine = routes[k][i];
            const Route ref = routes[0][i];
            (mine == Route::DeliberateThinking ? row.dt : row.fi) += 1;
            if (l.dt_helps && mine == Route::DeliberateThinking && ref == Route::FastIntuition) ++row.corrected_dt;
            if (l.fi_helps && mine == Route::FastIntuition && ref == Route::DeliberateThinking) ++row.corrected_fi;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string strategy_table_csv(const std::vector<StrategyRow>& rows) {
    std::string out = "strategy,dt,fi,corrected_dt,corrected_fi\n";
    for (const auto& r : rows) {
        out += r.label + "," + std::to_string(r.dt) + "," + std::to_string(r.fi) + "," +
               std::to_string(r.corrected_dt) + "," + std::to_string(r.corrected_fi) + "\n";
    }
    return out;
}

std::string strategy_table_markdown(const std::vector<StrategyRow>& rows) {
    std::string out = "| Strategy | DT (Count) | FI (Count) | Corrected (DT/FI) |\n|---|---:|---:|---:|\n";
    for (const auto& r : rows) {
        out += "| " + r.label + " | " + std::to_string(r.dt) + " | " + std::to_string(r.fi) + " | " +
               std::to_string(r.corrected_dt) + "/" + std::to_string(r.corrected_fi) + " |\n";
    }
    return out;
}

ProportionTable report_proportions(const std::vector<ProportionRun>& runs) {
    if (runs.empty()) fail(ErrorCode::InvalidArgument, "no runs with an unanswerable proportion");
    std::map<std::string, std::pair<double, int>> models, benchmarks;
    for (const auto& r : runs) {
        if (!(r.proportion >= 0.0 && r.proportion <= 1.0)) fail(ErrorCode::Domain, "proportion outside [0,1]");
        models[r.model_tag].first += r.proportion;
        models[r.model_tag].second += 1;
        benchmarks[r.benchmark_tag].first += r.proportion;
        benchmarks[r.benchmark_tag].second += 1;
    }
    auto averaged = [](const std::map<std::string, std::pair<double, int>>& m) {
        std::vector<std::pair<std::string, double>> v;
        for (const auto& [name, acc] : m) v.emplace_back(name, acc.first / acc.second);
        std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        return v;
    };
    return {averaged(models), averaged(benchmarks)};
}

std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * fraction);
    return buf;
}

std::string proportions_csv(const ProportionTable& t) {
    std::string out = "group,name,unanswerable_proportion\n";
    for (const auto& [name, v] : t.by_model) out += "model," + name + "," + fixed6(v) + "\n";
    for (const auto& [name, v] : t.by_benchmark) out += "benchmark," + name + "," + fixed6(v) + "\n";
    return out;
}

std::string proportions_markdown(const ProportionTable& t) {
    std::string out = "| Model | Unanswerable |\n|---|---:|\n";
    for (const auto& [name, v] : t.by_model) out += "| " + name + " | " + format_percent(v) + " |\n";
    out += "\n| Benchmark | Unanswerable |\n|---|---:|\n";
    for (const auto& [name, v] : t.by_benchmark) out += "| " + name + " | " + format_percent(v) + " |\n";
    return out;
}

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<BarSeries>& series) {
    static const char* kColors[] = {"#0082c8", "#e6194b", "#3cb44b", "#f58231", "#911eb4"};
    constexpr int kBar = 28, kGap = 24, kLeft = 60, kTop = 40, kPlot = 220, kBottom = 60;
    const int group = kBar * static_cast<int>(std::max<std::size_t>(series.size(), 1)) + kGap;
    const int width = kLeft + group * static_cast<int>(categories.size()) + 140;
    const int height = kTop + kPlot + kBottom;

    double max_v = 0.0;
    for (const auto& s : series) {
        if (s.values.size() != categories.size()) fail(ErrorCode::InvalidArgument, "series length mismatch");
        for (double v : s.values) max_v = std::max(max_v, v);
    }
    if (max_v <= 0.0) max_v = 1.0;

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kLeft << "\" y=\"20\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
    o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + kPlot << "\" x2=\"" << width - 130 << "\" y2=\""
      << kTop + kPlot << "\" stroke=\"black\"/>\n";
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const int gx = kLeft + kGap / 2 + group * static_cast<int>(c);
        for (std::size_t k = 0; k < series.size(); ++k) {
            const double v = series[k].values[c];
            const int h = static_cast<int>(kPlot * v / max_v + 0.5);
            const int x = gx + kBar * static_cast<int>(k);
            char label[32];
            std::snprintf(label, sizeof label, "%.3g", v);
            o << "<rect x=\"" << x << "\" y=\"" << kTop + kPlot - h << "\" width=\"" << kBar - 2 << "\" height=\""
              << h << "\" fill=\"" << kColors[k % 5] << "\"/>\n";
            o << "<text x=\"" << x + kBar / 2 << "\" y=\"" << kTop + kPlot - h - 3
              << "\" text-anchor=\"middle\">" << label << "</text>\n";
        }
        o << "<text x=\"" << gx + (group - kGap) / 2 << "\" y=\"" << kTop + kPlot + 16
          << "\" text-anchor=\"middle\">" << xml_escape(categories[c]) << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const int y = kTop + 16 * static_cast<int>(k);
        o << "<rect x=\"" << width - 120 << "\" y=\"" << y << "\" width=\"10\" height=\"10\" fill=\""
          << kColors[k % 5] << "\"/>\n";
        o << "<text x=\"" << width - 105 << "\" y=\"" << y + 9 << "\">" << xml_escape(series[k].name)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace vqar
