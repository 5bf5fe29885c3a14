// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

// Pipeline configuration and its JSON form (schema version 1):
//
//   {
//     "version": 1,
//     "mode": "focus" | "only-fi" | "only-dt" | "annotate-all",
//     "parallelism": 1,
//     "answer_temperature": 0.0,
//     "answer_max_tokens": 64,
//     "gate": {"n_samples", "temperature", "strategy", "entropy_threshold",
//              "parallel", "max_tokens"},
//     "conceptualizer": {"k_max", "box_threshold", "parallel_segmentation",
//                        "max_tokens",
//                        "style": {"stroke_width", "tag_padding",
//                                  "max_label_chars", "draw_tags"}},
//     "annotate_all": {"prompt", "box_threshold"},
//     "backends": {"mllm" | "lm" | "seg": {"kind", "endpoint", "auth",
//                  "model_name", "timeout_ms", "retries", "backoff_ms",
//                  "mock_script"}},
//     "tags": {"model", "benchmark"}
//   }
//
// Every key is optional; unknown keys are rejected. Overrides use dotted
// paths ("gate.n_samples=5"); the value is parsed as JSON when it parses,
// as a bare string otherwise.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "conceptualizer/conceptualizer.hpp"
#include "gate/complexity_gate.hpp"

namespace vqar {

enum class PipelineMode { Focus, OnlyFI, OnlyDT, AnnotateAll };

std::string to_string(PipelineMode m);
PipelineMode pipeline_mode_from_string(const std::string& s);

inline constexpr int kConfigSchemaVersion = 1;

inline BackendSpec backend_spec_of(BackendKind kind) {
    BackendSpec spec;
    spec.kind = kind;
    return spec;
}

struct PipelineConfig {
    PipelineMode mode = PipelineMode::Focus;
    int parallelism = 1;
    double answer_temperature = 0.0;
    int answer_max_tokens = 64;
    GateConfig gate;
    ConceptualizerConfig conceptualizer;
    std::string annotate_all_prompt = "all objects";
    double annotate_all_threshold = 0.25;
    BackendSpec mllm = backend_spec_of(BackendKind::MultimodalChat);
    BackendSpec lm = backend_spec_of(BackendKind::TextChat);
    BackendSpec seg = backend_spec_of(BackendKind::Segmentation);
    std::string model_tag;
    std::string benchmark_tag;

    // Relative mock_script paths resolve against this; not serialized.
    std::filesystem::path base_dir;

    void validate() const;  // Error(Config)
};

nlohmann::json config_to_json(const PipelineConfig& cfg);

// Strict: unknown keys and wrong types raise Error(Config).
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

// Applies "a.b.c=value" overrides onto a config document.
void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& overrides);

// Reads the file (if non-empty), applies overrides, parses.
PipelineConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace vqar
