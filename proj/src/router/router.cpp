// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "router/router.hpp"

#include <numeric>
#include <set>

#include "common/error.hpp"
#include "gateway/wire.hpp"

namespace vqar {

using nlohmann::json;

double CostLedger::total_wall_ms() const {
    double total = 0.0;
    for (const auto& [_, ms] : wall_ms_by_stage) total += ms;
    return total;
}

CostLedger& CostLedger::operator+=(const CostLedger& o) {
    gate_chat_calls += o.gate_chat_calls;
    answer_chat_calls += o.answer_chat_calls;
    lm_calls += o.lm_calls;
    seg_calls += o.seg_calls;
    for (const auto& [k, v] : o.wall_ms_by_stage) wall_ms_by_stage[k] += v;
    return *this;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

Verdict verdict_from_string(const std::string& s) {
    if (s == "Answerable") return Verdict::Answerable;
    if (s == "Unanswerable") return Verdict::Unanswerable;
    return Verdict::Unparseable;
}

Route route_from_string(const std::string& s) {
    return s == "FastIntuition" ? Route::FastIntuition : Route::DeliberateThinking;
}

}  // namespace

json to_json(const GateDecision& d) {
    json verdicts = json::array();
    for (const auto& v : d.verdicts) {
        verdicts.push_back(
            {{"raw_text", v.raw_text}, {"parsed", to_string(v.parsed)}, {"p_answerable", optional_number(v.p_answerable)}});
    }
    return {{"mode", to_string(d.mode)}, {"verdicts", verdicts}, {"mean_entropy", optional_number(d.mean_entropy)}};
}

json to_json(const CostLedger& l) {
    return {
        {"gate_chat_calls", l.gate_chat_calls},
        {"answer_chat_calls", l.answer_chat_calls},
        {"lm_calls", l.lm_calls},
        {"seg_calls", l.seg_calls},
        {"wall_ms_by_stage", l.wall_ms_by_stage},
        {"total_wall_ms", l.total_wall_ms()},
    };
}

json to_json(const Trace& t) {
    json dets = json::array();
    for (const auto& d : t.detections) dets.push_back(wire::detection_to_json(d));
    return {
        {"record_id", t.record_id},
        {"mode", to_string(t.mode)},
        {"route", to_string(t.route)},
        {"decision", t.decision ? to_json(*t.decision) : json(nullptr)},
        {"gate_failed", t.gate_failed},
        {"keywords", t.keywords ? json(t.keywords->keywords) : json(nullptr)},
        {"detections", dets},
        {"final_answer", t.final_answer},
        {"ledger", to_json(t.ledger)},
        {"error", t.error ? json(*t.error) : json(nullptr)},
        {"notes", t.notes},
    };
}

CostLedger ledger_from_json(const json& j) {
    CostLedger l;
    l.gate_chat_calls = j.at("gate_chat_calls").get<int>();
    l.answer_chat_calls = j.at("answer_chat_calls").get<int>();
    l.lm_calls = j.at("lm_calls").get<int>();
    l.seg_calls = j.at("seg_calls").get<int>();
    l.wall_ms_by_stage = j.at("wall_ms_by_stage").get<std::map<std::string, double>>();
    return l;
}

Trace trace_from_json(const json& j) {
    Trace t;
    try {
        t.record_id = j.at("record_id").get<std::string>();
        t.mode = pipeline_mode_from_string(j.at("mode").get<std::string>());
        t.route = route_from_string(j.at("route").get<std::string>());
        if (!j.at("decision").is_null()) {
            const json& d = j["decision"];
            GateDecision dec;
            dec.mode = route_from_string(d.at("mode").get<std::string>());
            for (const auto& v : d.at("verdicts")) {
                AnswerabilityVerdict av;
                av.raw_text = v.at("raw_text").get<std::string>();
                av.parsed = verdict_from_string(v.at("parsed").get<std::string>());
                if (!v.at("p_answerable").is_null()) av.p_answerable = v["p_answerable"].get<double>();
                dec.verdicts.push_back(std::move(av));
            }
            if (!d.at("mean_entropy").is_null()) dec.mean_entropy = d["mean_entropy"].get<double>();
            t.decision = std::move(dec);
        }
        t.gate_failed = j.value("gate_failed", false);
        if (j.contains("keywords") && !j["keywords"].is_null()) {
            t.keywords = KeywordSet{j["keywords"].get<std::vector<std::string>>(), {}};
        }
        for (const auto& d : j.value("detections", json::array())) t.detections.push_back(wire::detection_from_json(d));
        t.final_answer = j.value("final_answer", "");
        t.ledger = ledger_from_json(j.at("ledger"));
        if (j.contains("error") && !j["error"].is_null()) t.error = j["error"].get<std::string>();
        t.notes = j.value("notes", std::vector<std::string>{});
    } catch (const json::exception& e) {
        fail(ErrorCode::Schema, std::string("malformed trace: ") + e.what());
    }
    return t;
}

Backends Backends::from_config(const PipelineConfig& cfg) {
    Backends b;
    b.mllm = make_chat_client(cfg.mllm, cfg.base_dir);
    if (cfg.mode == PipelineMode::Focus || cfg.mode == PipelineMode::OnlyDT) {
        b.lm = make_chat_client(cfg.lm, cfg.base_dir);
    }
    if (cfg.mode != PipelineMode::OnlyFI) b.seg = make_segmentation_client(cfg.seg, cfg.base_dir);
    return b;
}

std::string answer_prompt(const QARecord& record) {
    std::string prompt = record.question;
    switch (record.qtype) {
        case QType::Mcq:
            prompt += "\nOptions:";
            for (std::size_t i = 0; i < record.choices.size(); ++i) {
                prompt += "\n" + choice_letter(i) + ". " + record.choices[i];
            }
            prompt += "\nAnswer with the option's letter from the given choices directly.";
            break;
        case QType::Open:
            prompt += "\nAnswer the question using a single word or phrase.";
            break;
        case QType::Binary:
            prompt += "\nAnswer the question with yes or no.";
            break;
    }
    return prompt;
}

Router::Router(PipelineConfig cfg, Backends backends) : cfg_(std::move(cfg)), backends_(std::move(backends)) {
    cfg_.validate();
    if (!backends_.mllm) fail(ErrorCode::Config, "router needs a multimodal chat backend");
    const bool needs_dt = cfg_.mode == PipelineMode::Focus || cfg_.mode == PipelineMode::OnlyDT;
    if (needs_dt && (!backends_.lm || !backends_.seg)) {
        fail(ErrorCode::Config, "mode " + to_string(cfg_.mode) + " needs lm and seg backends");
    }
    if (cfg_.mode == PipelineMode::AnnotateAll && !backends_.seg) {
        fail(ErrorCode::Config, "annotate-all mode needs a seg backend");
    }
}

FastAnswer Router::ask_model(const QARecord& record, const ImageRef& image) const {
    ChatRequest req;
    req.messages.push_back({Role::User, {ContentPart::image_part(image), ContentPart::text_part(answer_prompt(record))}});
    req.temperature = cfg_.answer_temperature;
    req.max_tokens = cfg_.answer_max_tokens;
    try {
        const ChatResponse resp = backends_.mllm->chat(req);
        return {resp.text, resp.latency_ms};
    } catch (const Error& e) {
        Error wrapped(ErrorCode::AnswerFailure, std::string(to_string(e.code())) + ": " + e.what());
        wrapped.set_elapsed_ms(e.elapsed_ms());
        throw wrapped;
    }
}

GateOutcome gate_question(const GateConfig& cfg, ChatClient& mllm, std::string_view question,
                          const ImageRef& image) {
    GateOutcome out;
    out.calls = cfg.effective_samples();
    try {
        const Elicitation e = elicit_answerability(image, question, cfg, mllm);
        out.wall_ms = e.wall_ms;
        out.decision = decide(e.verdicts, cfg);
        out.route = out.decision->mode;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::MissingLogprobs) out.wall_ms = e.elapsed_ms();
        out.route = Route::DeliberateThinking;
        out.failure = "GateFailure: " + std::string(to_string(e.code())) + ": " + e.what();
    }
    return out;
}

GateOutcome Router::run_gate(const QARecord& record, const ImageRef& image) const {
    return gate_question(cfg_.gate, *backends_.mllm, record.question, image);
}

FastAnswer Router::answer_fast(const QARecord& record, const ImageRef& image) const {
    return ask_model(record, image);
}

DeliberateAnswer Router::answer_deliberate(const QARecord& record, const ImageRef& image) const {
    Conceptualization c =
        conceptualize(image, record.question, *backends_.lm, *backends_.seg, cfg_.conceptualizer);
    DeliberateAnswer out;
    out.keywords = std::move(c.keywords);
    out.detections = std::move(c.detections);
    out.lm_calls = c.lm_calls;
    out.seg_calls = c.seg_calls;
    out.notes = std::move(c.notes);
    out.latency_by_stage[stage::kKeywords] = c.keywords_ms;
    if (c.seg_calls > 0) out.latency_by_stage[stage::kSegmentation] = c.segmentation_ms;
    const FastAnswer a = ask_model(record, c.image.as_image_ref());
    out.text = a.text;
    out.latency_by_stage[stage::kAnswer] = a.latency_ms;
    return out;
}

void Router::finish_with(Trace& t, const QARecord& record, const ImageRef& image) const {
    t.ledger.answer_chat_calls += 1;
    try {
        const FastAnswer a = ask_model(record, image);
        t.final_answer = a.text;
        t.ledger.add_stage(stage::kAnswer, a.latency_ms);
    } catch (const Error& e) {
        t.ledger.add_stage(stage::kAnswer, e.elapsed_ms());
        t.error = std::string("AnswerFailure: ") + e.what();
    }
}

Trace Router::answer(const QARecord& record) const {
    const ImageRef image = ImageRef::load(record.image_path);
    Trace t;
    t.record_id = record.id;
    t.mode = cfg_.mode;

    auto fast = [&] {
        t.route = Route::FastIntuition;
        finish_with(t, record, image);
    };
    auto deliberate = [&] {
        t.route = Route::DeliberateThinking;
        Conceptualization c =
            conceptualize(image, record.question, *backends_.lm, *backends_.seg, cfg_.conceptualizer);
        t.ledger.lm_calls += c.lm_calls;
        t.ledger.seg_calls += c.seg_calls;
        t.ledger.add_stage(stage::kKeywords, c.keywords_ms);
        if (c.seg_calls > 0) t.ledger.add_stage(stage::kSegmentation, c.segmentation_ms);
        t.keywords = std::move(c.keywords);
        t.detections = std::move(c.detections);
        t.notes.insert(t.notes.end(), c.notes.begin(), c.notes.end());
        finish_with(t, record, c.image.as_image_ref());
    };

    switch (cfg_.mode) {
        case PipelineMode::Focus: {
            GateOutcome g = run_gate(record, image);
            t.ledger.gate_chat_calls += g.calls;
            t.ledger.add_stage(stage::kGate, g.wall_ms);
            t.decision = std::move(g.decision);
            if (!t.decision) {
                t.gate_failed = true;
                t.notes.push_back(g.failure + "; falling back to deliberate path");
            }
            if (g.route == Route::FastIntuition) {
                fast();
            } else {
                deliberate();
            }
            break;
        }
        case PipelineMode::OnlyFI:
            fast();
            break;
        case PipelineMode::OnlyDT:
            deliberate();
            break;
        case PipelineMode::AnnotateAll: {
            t.route = Route::DeliberateThinking;
            t.ledger.seg_calls += 1;
            std::vector<Detection> found;
            try {
                SegmentResponse r = backends_.seg->segment(image, cfg_.annotate_all_prompt, cfg_.annotate_all_threshold);
                t.ledger.add_stage(stage::kSegmentation, r.latency_ms);
                found = std::move(r.detections);
            } catch (const Error& e) {
                t.ledger.add_stage(stage::kSegmentation, e.elapsed_ms());
                t.notes.push_back(std::string("segmentation failed: ") + e.what() + "; image left unchanged");
            }
            AnnotatedImage annotated = composite(image, found, cfg_.conceptualizer.style);
            t.detections = annotated.overlays;
            finish_with(t, record, annotated.as_image_ref());
            break;
        }
    }
    return t;
}

double relative_cost(std::span<const Trace> a, std::span<const Trace> b) {
    if (a.empty() || b.empty()) fail(ErrorCode::MismatchedRuns, "relative_cost needs two non-empty runs");
    std::set<std::string> ids_a, ids_b;
    double wall_a = 0.0, wall_b = 0.0;
    for (const auto& t : a) {
        ids_a.insert(t.record_id);
        wall_a += t.ledger.total_wall_ms();
    }
    for (const auto& t : b) {
        ids_b.insert(t.record_id);
        wall_b += t.ledger.total_wall_ms();
    }
    if (ids_a != ids_b || ids_a.size() != a.size() || ids_b.size() != b.size()) {
        fail(ErrorCode::MismatchedRuns, "runs cover different record ids");
    }
    if (wall_b <= 0.0) fail(ErrorCode::MismatchedRuns, "baseline run has zero wall time");
    return wall_a / wall_b;
}

}  // namespace vqar
