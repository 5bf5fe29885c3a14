// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bench/record.hpp"
#include "router/config.hpp"

namespace vqar {

// Stage names used as ledger keys.
namespace stage {
inline constexpr const char* kGate = "gate";
inline constexpr const char* kKeywords = "keywords";
inline constexpr const char* kSegmentation = "segmentation";
inline constexpr const char* kAnswer = "answer";
}  // namespace stage

/// Model calls and backend milliseconds spent on one question (or summed
/// over a run).
struct CostLedger {
    int gate_chat_calls = 0;
    int answer_chat_calls = 0;
    int lm_calls = 0;
    int seg_calls = 0;
    std::map<std::string, double> wall_ms_by_stage;

    void add_stage(const std::string& name, double ms) { wall_ms_by_stage[name] += ms; }
    double total_wall_ms() const;
    CostLedger& operator+=(const CostLedger& other);
};

struct Trace {
    std::string record_id;
    PipelineMode mode = PipelineMode::Focus;
    Route route = Route::FastIntuition;
    std::optional<GateDecision> decision;
    bool gate_failed = false;
    std::optional<KeywordSet> keywords;
    std::vector<Detection> detections;
    std::string final_answer;
    CostLedger ledger;
    std::optional<std::string> error;  // set when no answer could be produced
    std::vector<std::string> notes;
};

nlohmann::json to_json(const GateDecision& d);
nlohmann::json to_json(const CostLedger& l);
nlohmann::json to_json(const Trace& t);
CostLedger ledger_from_json(const nlohmann::json& j);
Trace trace_from_json(const nlohmann::json& j);

/// Clients for the three remote capabilities. Only the ones the mode needs
/// are built.
struct Backends {
    std::shared_ptr<ChatClient> mllm;
    std::shared_ptr<ChatClient> lm;
    std::shared_ptr<SegmentationClient> seg;

    static Backends from_config(const PipelineConfig& cfg);
};

inline constexpr int kAnswerPromptVersion = 1;
std::string answer_prompt(const QARecord& record);

struct GateOutcome {
    std::optional<GateDecision> decision;  // empty when the gate failed
    Route route = Route::DeliberateThinking;
    int calls = 0;
    double wall_ms = 0.0;
    std::string failure;
};

// Elicits and decides; any failure (including MissingLogprobs) routes to DT.
GateOutcome gate_question(const GateConfig& cfg, ChatClient& mllm, std::string_view question,
                          const ImageRef& image);

struct FastAnswer {
    std::string text;
    double latency_ms = 0.0;
};

struct DeliberateAnswer {
    std::string text;
    KeywordSet keywords;
    std::vector<Detection> detections;
    std::map<std::string, double> latency_by_stage;
    int lm_calls = 0;
    int seg_calls = 0;
    std::vector<std::string> notes;
};

class Router {
public:
    Router(PipelineConfig cfg, Backends backends);

    const PipelineConfig& config() const noexcept { return cfg_; }
    const Backends& backends() const noexcept { return backends_; }

    // End-to-end answer for one record. Image load errors (MissingImage,
    // ImageDecode) propagate; backend failures are recorded in the trace.
    Trace answer(const QARecord& record) const;

    // Gate only. Failures (including MissingLogprobs) route to DT.
    GateOutcome run_gate(const QARecord& record, const ImageRef& image) const;

    // Throws Error(AnswerFailure) carrying the elapsed time.
    FastAnswer answer_fast(const QARecord& record, const ImageRef& image) const;
    DeliberateAnswer answer_deliberate(const QARecord& record, const ImageRef& image) const;

private:
    FastAnswer ask_model(const QARecord& record, const ImageRef& image) const;
    void finish_with(Trace& trace, const QARecord& record, const ImageRef& image) const;

    PipelineConfig cfg_;
    Backends backends_;
};

// Σ wall(a) / Σ wall(b). Error(MismatchedRuns) unless both are non-empty and
// cover the same record ids.
double relative_cost(std::span<const Trace> a, std::span<const Trace> b);

}  // namespace vqar
