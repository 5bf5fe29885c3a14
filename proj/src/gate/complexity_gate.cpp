// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "gate/complexity_gate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "common/error.hpp"
#include "common/text.hpp"

namespace vqar {

std::string to_string(GateStrategy s) {
    switch (s) {
        case GateStrategy::SelfConsistency: return "self_consistency";
        case GateStrategy::SemanticEntropy: return "semantic_entropy";
        case GateStrategy::ConsistencyEntropy: return "consistency_entropy";
    }
    return "unknown";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Answerable: return "Answerable";
        case Verdict::Unanswerable: return "Unanswerable";
        case Verdict::Unparseable: return "Unparseable";
    }
    return "unknown";
}

std::string to_string(Route r) {
    return r == Route::FastIntuition ? "FastIntuition" : "DeliberateThinking";
}

GateStrategy gate_strategy_from_string(const std::string& s) {
    if (s == "self_consistency") return GateStrategy::SelfConsistency;
    if (s == "semantic_entropy") return GateStrategy::SemanticEntropy;
    if (s == "consistency_entropy") return GateStrategy::ConsistencyEntropy;
    fail(ErrorCode::Config, "unknown gate strategy '" + s + "'");
}

void GateConfig::validate() const {
    if (n_samples < 1) fail(ErrorCode::Config, "gate.n_samples must be >= 1");
    if (!std::isfinite(temperature) || temperature < 0.0) {
        fail(ErrorCode::Config, "gate.temperature must be finite and >= 0");
    }
    if (!(entropy_threshold > 0.0 && entropy_threshold <= std::numbers::ln2)) {
        fail(ErrorCode::Config, "gate.entropy_threshold must be within (0, ln 2]");
    }
    if (max_tokens < 1) fail(ErrorCode::Config, "gate.max_tokens must be >= 1");
}

std::string answerability_prompt(std::string_view question) {
    static const std::string kTemplate =
        "You are given an image and a question about it. Do not answer the question. Reply with "
        "exactly one word: 'Answerable' if you are confident you can answer it correctly from the "
        "image, or 'Unanswerable' if not. Question: {question}";
    return text::substitute(kTemplate, "question", question);
}

Verdict parse_verdict(std::string_view text) {
    const std::string lower = text::to_lower(text);
    if (text::contains(lower, "unanswerable")) return Verdict::Unanswerable;
    if (text::contains(lower, "answerable")) return Verdict::Answerable;
    return Verdict::Unparseable;
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::Domain, "binary_entropy: p must be within [0,1]");
    auto term = [](double x) { return x > 0.0 ? -x * std::log(x) : 0.0; };
    return term(p) + term(1.0 - p);
}

namespace {

constexpr std::string_view kAnswerable = "answerable";
constexpr std::string_view kUnanswerable = "unanswerable";

std::string strip_to_word(std::string_view token) {
    std::string s = text::to_lower(token);
    auto alpha = [](unsigned char c) { return std::isalpha(c) != 0; };
    std::size_t b = 0, e = s.size();
    while (b < e && !alpha(s[b])) ++b;
    while (e > b && !alpha(s[e - 1])) --e;
    return s.substr(b, e - b);
}

bool proper_prefix_of_class(std::string_view w) {
    return !w.empty() && ((w.size() < kUnanswerable.size() && kUnanswerable.starts_with(w)) ||
                          (w.size() < kAnswerable.size() && kAnswerable.starts_with(w)));
}

// Class of a (possibly partial) word: containment first, then a prefix of
// one of the two class words.
Verdict classify_word(std::string_view w) {
    const Verdict v = parse_verdict(w);
    if (v != Verdict::Unparseable) return v;
    if (w.size() >= 2 && kUnanswerable.starts_with(w)) return Verdict::Unanswerable;
    if (w.size() >= 2 && kAnswerable.starts_with(w)) return Verdict::Answerable;
    return Verdict::Unparseable;
}

}  // namespace

double p_answerable_from_logprobs(std::span<const TokenLogprob> tokens, Verdict full_text_verdict) {
    const double fallback = full_text_verdict == Verdict::Answerable ? 1.0 : 0.0;
    std::size_t first = 0;
    while (first < tokens.size() && text::trim(tokens[first].token).empty()) ++first;
    if (first == tokens.size()) return fallback;

    const TokenLogprob& pos = tokens[first];

    // The sampled token can be completed with the tokens that followed it.
    std::string chosen = strip_to_word(pos.token);
    for (std::size_t j = first + 1; j < tokens.size() && proper_prefix_of_class(chosen); ++j) {
        const std::string& next = tokens[j].token;
        if (next.empty() || std::isspace(static_cast<unsigned char>(next.front()))) break;
        chosen = strip_to_word(chosen + next);
    }

    double a = 0.0, u = 0.0;
    auto add = [&](Verdict v, double logprob) {
        if (v == Verdict::Answerable) a += std::exp(logprob);
        if (v == Verdict::Unanswerable) u += std::exp(logprob);
    };

    bool chosen_in_top = false;
    for (const auto& c : pos.top) {
        if (c.token == pos.token) {
            chosen_in_top = true;
            add(classify_word(chosen), c.logprob);
        } else {
            add(classify_word(strip_to_word(c.token)), c.logprob);
        }
    }
    if (!chosen_in_top) add(classify_word(chosen), pos.logprob);

    if (a + u <= 0.0) return fallback;
    return a / (a + u);
}

Elicitation elicit_answerability(const ImageRef& image, std::string_view question,
                                 const GateConfig& cfg, ChatClient& mllm) {
    cfg.validate();
    ChatRequest req;
    req.messages.push_back(
        {Role::User, {ContentPart::image_part(image), ContentPart::text_part(answerability_prompt(question))}});
    req.temperature = cfg.temperature;
    req.max_tokens = cfg.max_tokens;
    req.want_logprobs = cfg.wants_logprobs();

    const int n = cfg.effective_samples();
    const std::vector<ChatRequest> reqs(static_cast<std::size_t>(n), req);
    auto outcomes = mllm.chat_many(reqs, cfg.parallel);

    Elicitation out;
    out.calls = n;
    std::exception_ptr first_error;
    for (auto& o : outcomes) {
        out.wall_ms = cfg.parallel ? std::max(out.wall_ms, o.latency_ms) : out.wall_ms + o.latency_ms;
        if (o.ok()) {
            AnswerabilityVerdict v;
            v.raw_text = o.value->text;
            v.parsed = parse_verdict(v.raw_text);
            if (cfg.wants_logprobs() && o.value->token_logprobs) {
                v.p_answerable = p_answerable_from_logprobs(*o.value->token_logprobs, v.parsed);
            }
            out.verdicts.push_back(std::move(v));
            continue;
        }
        try {
            std::rethrow_exception(o.error);
        } catch (const UnsupportedLogprobs& e) {
            AnswerabilityVerdict v;
            v.raw_text = e.partial().text;
            v.parsed = parse_verdict(v.raw_text);
            out.verdicts.push_back(std::move(v));
        } catch (...) {
            if (!first_error) first_error = o.error;
        }
    }
    if (first_error) {
        try {
            std::rethrow_exception(first_error);
        } catch (Error& e) {
            e.set_elapsed_ms(out.wall_ms);
            throw;
        }
    }
    return out;
}

GateDecision decide_self_consistency(std::span<const AnswerabilityVerdict> verdicts) {
    if (verdicts.empty()) fail(ErrorCode::InvalidArgument, "gate decision needs at least one verdict");
    GateDecision d;
    d.verdicts.assign(verdicts.begin(), verdicts.end());
    const bool all_answerable = std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) {
        return v.parsed == Verdict::Answerable;
    });
    d.mode = all_answerable ? Route::FastIntuition : Route::DeliberateThinking;
    return d;
}

GateDecision decide_semantic_entropy(std::span<const AnswerabilityVerdict> verdicts,
                                     const GateConfig& cfg) {
    if (verdicts.empty()) fail(ErrorCode::InvalidArgument, "gate decision needs at least one verdict");
    const auto& first = verdicts.front();
    if (!first.p_answerable) fail(ErrorCode::MissingLogprobs, "semantic entropy needs p_answerable");
    const double h = binary_entropy(*first.p_answerable);
    GateDecision d;
    d.verdicts.assign(verdicts.begin(), verdicts.end());
    d.mean_entropy = h;
    d.mode = (h < cfg.entropy_threshold && first.parsed == Verdict::Answerable) ? Route::FastIntuition
                                                                                 : Route::DeliberateThinking;
    return d;
}

GateDecision decide_consistency_entropy(std::span<const AnswerabilityVerdict> verdicts,
                                        const GateConfig& cfg) {
    if (verdicts.empty()) fail(ErrorCode::InvalidArgument, "gate decision needs at least one verdict");
    double sum = 0.0;
    std::size_t answerable = 0;
    for (const auto& v : verdicts) {
        if (!v.p_answerable) fail(ErrorCode::MissingLogprobs, "consistency entropy needs p_answerable on every sample");
        sum += binary_entropy(*v.p_answerable);
        if (v.parsed == Verdict::Answerable) ++answerable;
    }
    GateDecision d;
    d.verdicts.assign(verdicts.begin(), verdicts.end());
    d.mean_entropy = sum / static_cast<double>(verdicts.size());
    const bool majority = 2 * answerable > verdicts.size();
    d.mode = (*d.mean_entropy < cfg.entropy_threshold && majority) ? Route::FastIntuition
                                                                   : Route::DeliberateThinking;
    return d;
}

GateDecision decide(std::span<const AnswerabilityVerdict> verdicts, const GateConfig& cfg) {
    switch (cfg.strategy) {
        case GateStrategy::SelfConsistency: return decide_self_consistency(verdicts);
        case GateStrategy::SemanticEntropy: return decide_semantic_entropy(verdicts, cfg);
        case GateStrategy::ConsistencyEntropy: return decide_consistency_entropy(verdicts, cfg);
    }
    fail(ErrorCode::Internal, "unhandled gate strategy");
}

}  // namespace vqar
