// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

// Question-complexity gate: samples answerability verdicts from the
// multimodal model and decides whether the question can be answered
// zero-shot (FastIntuition) or needs the annotated-image path
// (DeliberateThinking).
//
// Three deciders are provided:
//   SelfConsistency     FI iff all N sampled verdicts parse as Answerable.
//   SemanticEntropy     one sample; FI iff the binary entropy of
//                       p(answerable) is below the threshold and the verdict
//                       is Answerable.
//   ConsistencyEntropy  N samples; FI iff the mean binary entropy is below
//                       the threshold and a strict majority is Answerable.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gateway/clients.hpp"

namespace vqar {

enum class GateStrategy { SelfConsistency, SemanticEntropy, ConsistencyEntropy };
enum class Verdict { Answerable, Unanswerable, Unparseable };
enum class Route { FastIntuition, DeliberateThinking };

std::string to_string(GateStrategy s);
std::string to_string(Verdict v);
std::string to_string(Route r);
GateStrategy gate_strategy_from_string(const std::string& s);

struct GateConfig {
    int n_samples = 3;
    double temperature = 1.0;
    GateStrategy strategy = GateStrategy::SelfConsistency;
    double entropy_threshold = 0.35;  // nats
    bool parallel = true;             // issue the samples concurrently
    int max_tokens = 8;

    void validate() const;  // Error(Config)

    // Samples actually drawn: 1 for SemanticEntropy, n_samples otherwise.
    int effective_samples() const noexcept {
        return strategy == GateStrategy::SemanticEntropy ? 1 : n_samples;
    }
    bool wants_logprobs() const noexcept { return strategy != GateStrategy::SelfConsistency; }
};

struct AnswerabilityVerdict {
    std::string raw_text;
    Verdict parsed = Verdict::Unparseable;
    std::optional<double> p_answerable;
};

struct GateDecision {
    Route mode = Route::DeliberateThinking;
    std::vector<AnswerabilityVerdict> verdicts;
    std::optional<double> mean_entropy;
};

// Versioned prompt; {question} is substituted.
inline constexpr int kAnswerabilityPromptVersion = 1;
std::string answerability_prompt(std::string_view question);

// Case-insensitive containment; "unanswerable" wins over "answerable".
Verdict parse_verdict(std::string_view text);

// Nats, with 0 ln 0 = 0. Error(Domain) outside [0,1].
double binary_entropy(double p);

// p(answerable) from the first content token's candidate set, falling back to
// the indicator of `full_text_verdict` when neither class is present.
double p_answerable_from_logprobs(std::span<const TokenLogprob> tokens, Verdict full_text_verdict);

struct Elicitation {
    std::vector<AnswerabilityVerdict> verdicts;
    double wall_ms = 0.0;
    int calls = 0;
};

// Issues effective_samples() independent chat calls. Throws the first
// gateway error if any call failed; Unsupported logprobs are absorbed (the
// verdict keeps its text, p_answerable stays empty). On failure the thrown
// Error carries the stage wall time in elapsed_ms.
Elicitation elicit_answerability(const ImageRef& image, std::string_view question,
                                 const GateConfig& cfg, ChatClient& mllm);

GateDecision decide_self_consistency(std::span<const AnswerabilityVerdict> verdicts);
GateDecision decide_semantic_entropy(std::span<const AnswerabilityVerdict> verdicts, const GateConfig& cfg);
GateDecision decide_consistency_entropy(std::span<const AnswerabilityVerdict> verdicts,
                                        const GateConfig& cfg);
GateDecision decide(std::span<const AnswerabilityVerdict> verdicts, const GateConfig& cfg);

}  // namespace vqar
