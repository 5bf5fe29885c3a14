// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "vqar/vqar.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "bench/harness.hpp"
#include "bench/manifest.hpp"
#include "common/error.hpp"
#include "common/files.hpp"
#include "gateway/wire.hpp"
#include "router/router.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

struct vqar_pipeline {
    vqar::PipelineConfig cfg;
    std::mutex mu;
    std::shared_ptr<vqar::ChatClient> mllm;
    std::shared_ptr<vqar::ChatClient> lm;
    std::shared_ptr<vqar::SegmentationClient> seg;
    std::unique_ptr<vqar::Router> router;

    vqar::ChatClient& get_mllm() {
        std::lock_guard lock(mu);
        if (!mllm) mllm = vqar::make_chat_client(cfg.mllm, cfg.base_dir);
        return *mllm;
    }
    vqar::ChatClient& get_lm() {
        std::lock_guard lock(mu);
        if (!lm) lm = vqar::make_chat_client(cfg.lm, cfg.base_dir);
        return *lm;
    }
    vqar::SegmentationClient& get_seg() {
        std::lock_guard lock(mu);
        if (!seg) seg = vqar::make_segmentation_client(cfg.seg, cfg.base_dir);
        return *seg;
    }
    const vqar::Router& get_router() {
        if (router) return *router;
        vqar::Backends b;
        get_mllm();
        b.mllm = mllm;
        if (cfg.mode == vqar::PipelineMode::Focus || cfg.mode == vqar::PipelineMode::OnlyDT) {
            get_lm();
            b.lm = lm;
        }
        if (cfg.mode != vqar::PipelineMode::OnlyFI) {
            get_seg();
            b.seg = seg;
        }
        router = std::make_unique<vqar::Router>(cfg, std::move(b));
        return *router;
    }
};

namespace {

thread_local std::string g_last_error;

static_assert(static_cast<int>(vqar::ErrorCode::InvalidArgument) + 1 == VQAR_INVALID_ARGUMENT);
static_assert(static_cast<int>(vqar::ErrorCode::Internal) + 1 == VQAR_INTERNAL);

vqar_status status_of(vqar::ErrorCode code) { return static_cast<vqar_status>(static_cast<int>(code) + 1); }

template <typename Fn>
vqar_status guarded(Fn&& fn) {
    g_last_error.clear();
    try {
        fn();
        return VQAR_OK;
    } catch (const vqar::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const json::exception& e) {
        g_last_error = e.what();
        return VQAR_SCHEMA;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return VQAR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown exception";
        return VQAR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void put(char** out, const std::string& s) {
    if (out) *out = dup_string(s);
}

void require(const void* ptr, const char* what) {
    if (!ptr) vqar::fail(vqar::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

vqar::QARecord open_question(const char* image_path, const char* question) {
    require(image_path, "image_path");
    require(question, "question");
    vqar::QARecord r;
    r.id = "ask";
    r.image_path = image_path;
    r.question = question;
    r.qtype = vqar::QType::Open;
    if (r.question.empty()) vqar::fail(vqar::ErrorCode::InvalidArgument, "question is empty");
    return r;
}

fs::path prepare_dir(const char* dir) {
    require(dir, "output_dir");
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) vqar::fail(vqar::ErrorCode::Io, "cannot create " + p.string() + ": " + ec.message());
    return p;
}

std::string run_label(const json& report, const fs::path& dir) {
    std::string label = report.at("mode").get<std::string>();
    const std::string model = report.at("tags").at("model").get<std::string>();
    const std::string bench = report.at("tags").at("benchmark").get<std::string>();
    if (!model.empty() || !bench.empty()) label = model + "/" + bench + "/" + label;
    if (label.empty()) label = dir.filename().string();
    return label;
}

}  // namespace

extern "C" {

int vqar_abi_version(void) { return VQAR_ABI_VERSION; }

const char* vqar_status_string(vqar_status status) {
    if (status == VQAR_OK) return "Ok";
    if (status < VQAR_OK || status > VQAR_INTERNAL) return "UnknownStatus";
    static std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (int i = 0; i <= static_cast<int>(vqar::ErrorCode::Internal); ++i) {
            v.emplace_back(vqar::to_string(static_cast<vqar::ErrorCode>(i)));
        }
        return v;
    }();
    return names[static_cast<std::size_t>(status) - 1].c_str();
}

const char* vqar_last_error(void) { return g_last_error.c_str(); }

void vqar_string_free(char* s) { std::free(s); }

vqar_status vqar_pipeline_create(const char* config_path, const char* const* overrides, size_t n_overrides,
                                 vqar_pipeline** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        std::vector<std::string> ovr;
        for (size_t i = 0; i < n_overrides; ++i) {
            require(overrides[i], "override");
            ovr.emplace_back(overrides[i]);
        }
        auto p = std::make_unique<vqar_pipeline>();
        p->cfg = vqar::load_config(config_path ? fs::path(config_path) : fs::path(), ovr);
        *out = p.release();
    });
}

vqar_status vqar_pipeline_create_json(const char* config_json, const char* base_dir, vqar_pipeline** out) {
    return guarded([&] {
        require(out, "out");
        require(config_json, "config_json");
        *out = nullptr;
        json doc = json::parse(config_json, nullptr, false);
        if (doc.is_discarded()) vqar::fail(vqar::ErrorCode::Config, "config is not valid JSON");
        auto p = std::make_unique<vqar_pipeline>();
        p->cfg = vqar::config_from_json(doc, base_dir ? fs::path(base_dir) : fs::path());
        *out = p.release();
    });
}

void vqar_pipeline_destroy(vqar_pipeline* p) { delete p; }

vqar_status vqar_pipeline_config(const vqar_pipeline* p, char** config_json) {
    return guarded([&] {
        require(p, "pipeline");
        put(config_json, vqar::config_to_json(p->cfg).dump(2));
    });
}

vqar_status vqar_ask(vqar_pipeline* p, const char* image_path, const char* question, char** trace_json) {
    return guarded([&] {
        require(p, "pipeline");
        const vqar::QARecord r = open_question(image_path, question);
        put(trace_json, vqar::to_json(p->get_router().answer(r)).dump(2));
    });
}

vqar_status vqar_ask_record(vqar_pipeline* p, const char* record_json, char** trace_json) {
    return guarded([&] {
        require(p, "pipeline");
        require(record_json, "record_json");
        const vqar::QARecord r = vqar::record_from_json(json::parse(record_json), fs::path());
        put(trace_json, vqar::to_json(p->get_router().answer(r)).dump(2));
    });
}

vqar_status vqar_gate(vqar_pipeline* p, const char* image_path, const char* question, char** result_json) {
    return guarded([&] {
        require(p, "pipeline");
        const vqar::QARecord r = open_question(image_path, question);
        const vqar::ImageRef image = vqar::ImageRef::load(r.image_path);
        const vqar::GateOutcome g = vqar::gate_question(p->cfg.gate, p->get_mllm(), r.question, image);
        json out = {{"route", vqar::to_string(g.route)},
                    {"calls", g.calls},
                    {"wall_ms", g.wall_ms},
                    {"decision", g.decision ? vqar::to_json(*g.decision) : json(nullptr)},
                    {"failure", g.failure.empty() ? json(nullptr) : json(g.failure)}};
        put(result_json, out.dump(2));
    });
}

vqar_status vqar_annotate(vqar_pipeline* p, const char* image_path, const char* question, const char* output_dir,
                          char** result_json) {
    return guarded([&] {
        require(p, "pipeline");
        const vqar::QARecord r = open_question(image_path, question);
        const fs::path dir = prepare_dir(output_dir);
        const vqar::ImageRef image = vqar::ImageRef::load(r.image_path);
        const vqar::Conceptualization c =
            vqar::conceptualize(image, r.question, p->get_lm(), p->get_seg(), p->cfg.conceptualizer);

        const std::string name = c.image.media_type == "image/jpeg" ? "annotated.jpg" : "annotated.png";
        vqar::files::write_atomic(dir / name, c.image.rendered);
        json dets = json::array();
        for (const auto& d : c.detections) dets.push_back(vqar::wire::detection_to_json(d));
        json out = {{"image", name},
                    {"media_type", c.image.media_type},
                    {"keywords", c.keywords.keywords},
                    {"detections", dets},
                    {"lm_calls", c.lm_calls},
                    {"seg_calls", c.seg_calls},
                    {"notes", c.notes}};
        vqar::files::write_atomic(dir / "detections.json", out.dump(2) + "\n");
        put(result_json, out.dump(2));
    });
}

vqar_status vqar_run_benchmark(vqar_pipeline* p, const char* manifest_path, const char* output_dir,
                               const char* baseline_dir, char** report_json) {
    return guarded([&] {
        require(p, "pipeline");
        require(manifest_path, "manifest_path");
        const auto records = vqar::load_manifest(manifest_path);
        vqar::RunOptions opts;
        opts.output_dir = prepare_dir(output_dir);
        if (baseline_dir) opts.baseline_dir = fs::path(baseline_dir);
        const vqar::RunResult result = vqar::run_benchmark(records, p->get_router(), opts);
        put(report_json, vqar::to_json(result.report).dump(2));
    });
}

vqar_status vqar_score(const char* manifest_path, const char* predictions_path, char** report_json) {
    return guarded([&] {
        require(manifest_path, "manifest_path");
        require(predictions_path, "predictions_path");
        const auto records = vqar::load_manifest(manifest_path);
        const auto preds = vqar::load_predictions(predictions_path);
        put(report_json, vqar::score_predictions(records, preds).dump(2));
    });
}

vqar_status vqar_compare_strategies(vqar_pipeline* p, const char* manifest_path, const char* labels_path,
                                    const char* output_dir, char** table_json) {
    return guarded([&] {
        require(p, "pipeline");
        require(manifest_path, "manifest_path");
        require(labels_path, "labels_path");
        const fs::path dir = prepare_dir(output_dir);
        const auto records = vqar::load_manifest(manifest_path);
        const auto labels = vqar::load_labels(labels_path);

        std::vector<vqar::StrategySpec> specs;
        for (auto s : {vqar::GateStrategy::SelfConsistency, vqar::GateStrategy::SemanticEntropy,
                       vqar::GateStrategy::ConsistencyEntropy}) {
            vqar::StrategySpec spec{vqar::to_string(s), p->cfg};
            spec.config.gate.strategy = s;
            specs.push_back(std::move(spec));
        }
        const auto rows = vqar::compare_strategies(records, specs, labels);

        std::vector<std::string> cats;
        vqar::BarSeries dt{"DT", {}}, fi{"FI", {}};
        json out = json::array();
        for (const auto& r : rows) {
            cats.push_back(r.label);
            dt.values.push_back(r.dt);
            fi.values.push_back(r.fi);
            out.push_back({{"strategy", r.label},
                           {"dt", r.dt},
                           {"fi", r.fi},
                           {"corrected_dt", r.corrected_dt},
                           {"corrected_fi", r.corrected_fi}});
        }
        vqar::files::write_atomic(dir / "strategies.csv", vqar::strategy_table_csv(rows));
        vqar::files::write_atomic(dir / "strategies.md", vqar::strategy_table_markdown(rows));
        vqar::files::write_atomic(dir / "modes.svg", vqar::bar_chart_svg("Routing by gate strategy", cats, {dt, fi}));
        put(table_json, out.dump(2));
    });
}

vqar_status vqar_report(const char* const* run_dirs, size_t n_dirs, const char* output_dir, char** summary_json) {
    return guarded([&] {
        if (n_dirs < 2) vqar::fail(vqar::ErrorCode::InvalidArgument, "report needs at least two run directories");
        require(run_dirs, "run_dirs");
        const fs::path out_dir = prepare_dir(output_dir);

        std::vector<fs::path> dirs;
        std::vector<json> reports;
        std::vector<std::vector<vqar::Trace>> traces;
        for (size_t i = 0; i < n_dirs; ++i) {
            require(run_dirs[i], "run_dirs entry");
            dirs.emplace_back(run_dirs[i]);
            const fs::path report_path = dirs.back() / vqar::kReportFile;
            if (!fs::exists(report_path)) {
                vqar::fail(vqar::ErrorCode::Io, "no " + std::string(vqar::kReportFile) + " in " + dirs.back().string());
            }
            reports.push_back(json::parse(vqar::files::read_text(report_path)));
            traces.push_back(vqar::load_traces(dirs.back()));
        }

        std::vector<vqar::ProportionRun> prop_runs;
        std::vector<std::string> labels;
        vqar::BarSeries rel{"relative time", {}}, fi{"FI", {}}, dt{"DT", {}};
        json runs = json::array();
        for (size_t i = 0; i < n_dirs; ++i) {
            const json& r = reports[i];
            labels.push_back(run_label(r, dirs[i]));
            const double rc = vqar::relative_cost(traces[i], traces[0]);
            rel.values.push_back(rc);
            fi.values.push_back(r.at("mode_counts").at("FI").get<int>());
            dt.values.push_back(r.at("mode_counts").at("DT").get<int>());
            const json& up = r.at("unanswerable_proportion");
            if (!up.is_null()) {
                prop_runs.push_back({r.at("tags").at("model").get<std::string>(),
                                     r.at("tags").at("benchmark").get<std::string>(), up.get<double>()});
            }
            runs.push_back({{"label", labels.back()},
                            {"mode", r.at("mode")},
                            {"tags", r.at("tags")},
                            {"relative_cost", rc},
                            {"mode_counts", r.at("mode_counts")},
                            {"unanswerable_proportion", up},
                            {"accuracy", r.at("metrics").at("accuracy")}});
        }

        vqar::ProportionTable table;
        if (!prop_runs.empty()) table = vqar::report_proportions(prop_runs);
        auto rows_json = [](const std::vector<std::pair<std::string, double>>& v) {
            json a = json::array();
            for (const auto& [name, value] : v) a.push_back({{"name", name}, {"unanswerable_proportion", value}});
            return a;
        };
        json summary = {{"baseline", labels.front()},
                        {"runs", runs},
                        {"proportions", {{"by_model", rows_json(table.by_model)},
                                         {"by_benchmark", rows_json(table.by_benchmark)}}}};

        vqar::files::write_atomic(out_dir / "proportions.csv", vqar::proportions_csv(table));
        vqar::files::write_atomic(out_dir / "proportions.md", vqar::proportions_markdown(table));
        vqar::files::write_atomic(out_dir / "cost.svg",
                                  vqar::bar_chart_svg("Relative inference time vs " + labels.front(), labels, {rel}));
        vqar::files::write_atomic(out_dir / "modes.svg", vqar::bar_chart_svg("Routing counts", labels, {fi, dt}));
        vqar::files::write_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
        put(summary_json, summary.dump(2));
    });
}

double vqar_binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) return std::numeric_limits<double>::quiet_NaN();
    return vqar::binary_entropy(p);
}

vqar_status vqar_score_vqa_soft(const char* pred, const char* const* gold, size_t n_gold, double* out) {
    return guarded([&] {
        require(pred, "pred");
        require(out, "out");
        if (n_gold > 0) require(gold, "gold");
        std::vector<std::string> g;
        for (size_t i = 0; i < n_gold; ++i) {
            require(gold[i], "gold entry");
            g.emplace_back(gold[i]);
        }
        *out = vqar::score_vqa_soft(pred, g);
    });
}

}  // extern "C"
