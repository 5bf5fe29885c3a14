// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

// vqar command line. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "vqar/vqar.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitBackend = 3;

int exit_code_for(vqar_status s) {
    switch (s) {
        case VQAR_OK: return kExitOk;
        case VQAR_INVALID_ARGUMENT:
        case VQAR_CONFIG:
        case VQAR_SCHEMA:
        case VQAR_MISSING_IMAGE:
        case VQAR_IMAGE_DECODE:
        case VQAR_DOMAIN:
        case VQAR_PAIRING:
        case VQAR_MISMATCHED_RUNS:
        case VQAR_LABEL_MISMATCH:
        case VQAR_IO:
            return kExitInput;
        case VQAR_TRANSPORT:
        case VQAR_BACKEND:
        case VQAR_UNSUPPORTED:
        case VQAR_SCRIPT_MISS:
        case VQAR_MISSING_LOGPROBS:
        case VQAR_GATE_FAILURE:
        case VQAR_ANSWER_FAILURE:
            return kExitBackend;
        case VQAR_INTERNAL: return kExitInternal;
    }
    return kExitInternal;
}

int report_failure(vqar_status s) {
    std::cerr << "vqar: " << vqar_status_string(s) << ": " << vqar_last_error() << "\n";
    return exit_code_for(s);
}

struct Owned {
    char* s = nullptr;
    ~Owned() { vqar_string_free(s); }
    std::string str() const { return s ? s : ""; }
};

struct PipelineDeleter {
    void operator()(vqar_pipeline* p) const { vqar_pipeline_destroy(p); }
};
using PipelinePtr = std::unique_ptr<vqar_pipeline, PipelineDeleter>;

struct ConfigOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::string mode;

    void attach(CLI::App* cmd, bool with_mode) {
        cmd->add_option("--config", config, "Pipeline config JSON")->check(CLI::ExistingFile);
        cmd->add_option("--set", overrides, "Config override key=value (repeatable)");
        if (with_mode) {
            cmd->add_option("--mode", mode, "Pipeline mode")
                ->check(CLI::IsMember({"focus", "only-fi", "only-dt", "annotate-all"}));
        }
    }

    vqar_status open(PipelinePtr& out) const {
        std::vector<std::string> all = overrides;
        if (!mode.empty()) all.push_back("mode=" + mode);
        std::vector<const char*> ptrs;
        for (const auto& o : all) ptrs.push_back(o.c_str());
        vqar_pipeline* p = nullptr;
        const vqar_status s =
            vqar_pipeline_create(config.empty() ? nullptr : config.c_str(), ptrs.data(), ptrs.size(), &p);
        out.reset(p);
        return s;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Visual question answering with an answerability gate"};
    app.require_subcommand(1);

    ConfigOptions cfg;
    std::string manifest, output_dir = "vqar_out", baseline, image, question, predictions, labels;
    std::vector<std::string> run_dirs;

    auto* run = app.add_subcommand("run", "Answer every record of a manifest and write traces and a report");
    cfg.attach(run, true);
    run->add_option("--manifest", manifest, "JSONL manifest")->required();
    run->add_option("--output_dir", output_dir, "Directory for traces.jsonl and report.json");
    run->add_option("--baseline", baseline, "Run directory used as the cost baseline");

    auto* ask = app.add_subcommand("ask", "Answer one question and print its trace");
    cfg.attach(ask, true);
    ask->add_option("--image", image)->required();
    ask->add_option("--question", question)->required();

    auto* gate = app.add_subcommand("gate", "Run only the answerability gate");
    cfg.attach(gate, false);
    gate->add_option("--image", image)->required();
    gate->add_option("--question", question)->required();

    auto* annotate = app.add_subcommand("annotate", "Write the annotated image and detections");
    cfg.attach(annotate, false);
    annotate->add_option("--image", image)->required();
    annotate->add_option("--question", question)->required();
    annotate->add_option("--output_dir", output_dir);

    auto* score = app.add_subcommand("score", "Score a predictions file against a manifest");
    score->add_option("--manifest", manifest)->required();
    score->add_option("--predictions", predictions, "JSONL of {id, prediction}")->required();
    score->add_option("--output_dir", output_dir);

    auto* compare = app.add_subcommand("compare-strategies", "Compare gate strategies on a labeled manifest");
    cfg.attach(compare, false);
    compare->add_option("--manifest", manifest)->required();
    compare->add_option("--labels", labels, "JSONL of {id, dt_helps, fi_helps}")->required();
    compare->add_option("--output_dir", output_dir);

    auto* report = app.add_subcommand("report", "Proportion tables and cost charts over run directories");
    report->add_option("runs", run_dirs, "Run directories; the first is the cost baseline")->required();
    report->add_option("--output_dir", output_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    Owned out;
    vqar_status s = VQAR_OK;

    if (*score) {
        s = vqar_score(manifest.c_str(), predictions.c_str(), &out.s);
        if (s != VQAR_OK) return report_failure(s);
        std::cout << out.str() << "\n";
        if (score->count("--output_dir")) {
            std::error_code ec;
            std::filesystem::create_directories(output_dir, ec);
            std::ofstream f(std::filesystem::path(output_dir) / "report.json", std::ios::binary);
            f << out.str() << "\n";
            if (!f) {
                std::cerr << "vqar: cannot write " << output_dir << "/report.json\n";
                return kExitInput;
            }
        }
        return kExitOk;
    }

    if (*report) {
        std::vector<const char*> ptrs;
        for (const auto& d : run_dirs) ptrs.push_back(d.c_str());
        s = vqar_report(ptrs.data(), ptrs.size(), output_dir.c_str(), &out.s);
        if (s != VQAR_OK) return report_failure(s);
        std::cout << out.str() << "\n";
        return kExitOk;
    }

    PipelinePtr p;
    s = cfg.open(p);
    if (s != VQAR_OK) return report_failure(s);

    if (*run) {
        s = vqar_run_benchmark(p.get(), manifest.c_str(), output_dir.c_str(),
                               baseline.empty() ? nullptr : baseline.c_str(), &out.s);
        if (s != VQAR_OK) return report_failure(s);
        const auto j = nlohmann::json::parse(out.str());
        const auto failed = j.at("failed_records").size();
        const auto total = j.at("records").get<std::size_t>();
        std::cout << "records: " << total << "  failed: " << failed << "  accuracy: " << j["metrics"]["accuracy"]
                  << "  FI/DT: " << j["mode_counts"]["FI"] << "/" << j["mode_counts"]["DT"] << "\n"
                  << "wrote " << output_dir << "/traces.jsonl and " << output_dir << "/report.json\n";
        if (total > 0 && failed == total) {
            std::cerr << "vqar: every record failed; backends unreachable or exhausted\n";
            return kExitBackend;
        }
        return kExitOk;
    }
    if (*ask) {
        s = vqar_ask(p.get(), image.c_str(), question.c_str(), &out.s);
        if (s != VQAR_OK) return report_failure(s);
        std::cout << out.str() << "\n";
        return nlohmann::json::parse(out.str()).at("error").is_null() ? kExitOk : kExitBackend;
    }
    if (*gate) {
        s = vqar_gate(p.get(), image.c_str(), question.c_str(), &out.s);
        if (s != VQAR_OK) return report_failure(s);
        std::cout << out.str() << "\n";
        return kExitOk;
    }
    if (*annotate) {
        s = vqar_annotate(p.get(), image.c_str(), question.c_str(), output_dir.c_str(), &out.s);
        if (s != VQAR_OK) return report_failure(s);
        std::cout << out.str() << "\n";
        return kExitOk;
    }
    if (*compare) {
        s = vqar_compare_strategies(p.get(), manifest.c_str(), labels.c_str(), output_dir.c_str(), &out.s);
        if (s != VQAR_OK) return report_failure(s);
        std::cout << out.str() << "\n";
        return kExitOk;
    }
    return kExitInternal;
}
