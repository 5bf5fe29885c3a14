// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures: temp dirs, generated images and mock script helpers.

#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bench/record.hpp"
#include "common/files.hpp"
#include "conceptualizer/conceptualizer.hpp"
#include "gate/complexity_gate.hpp"
#include "gateway/mock.hpp"
#include "imaging/image.hpp"
#include "router/router.hpp"

namespace vqar::testing {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "vqar-test-XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline fs::path write_png(const fs::path& path, int w = 64, int h = 64, Rgb fill = {255, 255, 255}) {
    Image img(w, h, fill);
    // A few non-uniform pixels so distinct files differ.
    img.set(0, 0, {static_cast<std::uint8_t>(w), static_cast<std::uint8_t>(h), 7});
    files::write_atomic(path, encode_png(img));
    return path;
}

inline ImageRef white_image(int w = 100, int h = 100) { return ImageRef::from_bytes(encode_png(Image(w, h))); }

inline MockChatReply text_reply(const std::string& text, std::optional<double> latency = std::nullopt) {
    MockChatReply r;
    r.text = text;
    r.latency_ms = latency;
    return r;
}

inline MockChatReply error_reply(const std::string& kind, std::optional<double> latency = std::nullopt) {
    MockChatReply r;
    r.error = kind;
    r.latency_ms = latency;
    return r;
}

// A verdict reply whose first token carries both class candidates with
// probabilities p and 1 - p.
inline MockChatReply verdict_reply(const std::string& text, double p,
                                   std::optional<double> latency = std::nullopt) {
    MockChatReply r = text_reply(text, latency);
    TokenLogprob tok;
    tok.token = text;
    tok.logprob = text == "Answerable" ? std::log(p) : std::log(1.0 - p);
    tok.top = {{"Answerable", std::log(p)}, {"Unanswerable", std::log(1.0 - p)}};
    r.logprobs = std::vector<TokenLogprob>{tok};
    return r;
}

inline Detection det(const std::string& label, double score, Box box = {10, 10, 40, 40}) {
    return Detection{label, box, score};
}

inline MockSegmentationReply seg_reply(std::vector<Detection> dets, std::optional<double> latency = std::nullopt) {
    MockSegmentationReply r;
    r.detections = std::move(dets);
    r.latency_ms = latency;
    return r;
}

inline std::vector<std::string> gate_parts(const std::string& question) { return {answerability_prompt(question)}; }

inline std::vector<std::string> keyword_parts(const std::string& question, int k_max = 5) {
    return {extraction_prompt(question, k_max)};
}

inline QARecord open_record(const std::string& id, const std::string& image, const std::string& question,
                            std::vector<std::string> gold = {"cat"}) {
    QARecord r;
    r.id = id;
    r.image_path = image;
    r.question = question;
    r.qtype = QType::Open;
    r.gold = std::move(gold);
    return r;
}

inline std::vector<std::string> answer_parts(const QARecord& r) { return {answer_prompt(r)}; }

// Script helpers for the common pipeline shapes.
struct ScriptBuilder {
    MockScript script;

    ScriptBuilder& gate(const std::string& q, std::vector<MockChatReply> replies) {
        script.add_chat_text(gate_parts(q), 1.0, std::move(replies));
        return *this;
    }
    ScriptBuilder& gate_texts(const std::string& q, const std::vector<std::string>& texts,
                              std::optional<double> latency = std::nullopt) {
        std::vector<MockChatReply> rs;
        for (const auto& t : texts) rs.push_back(text_reply(t, latency));
        return gate(q, std::move(rs));
    }
    ScriptBuilder& keywords(const std::string& q, const std::string& reply,
                            std::optional<double> latency = std::nullopt) {
        script.add_chat_text(keyword_parts(q), 0.0, {text_reply(reply, latency)});
        return *this;
    }
    ScriptBuilder& answer(const QARecord& r, const std::string& reply, std::optional<double> latency = std::nullopt) {
        script.add_chat_text(answer_parts(r), 0.0, {text_reply(reply, latency)}, true);
        return *this;
    }
    ScriptBuilder& segment(const std::string& prompt, std::vector<Detection> dets,
                           std::optional<double> latency = std::nullopt) {
        script.add_segmentation(prompt, {seg_reply(std::move(dets), latency)}, true);
        return *this;
    }
    std::shared_ptr<const MockScript> shared() const { return std::make_shared<MockScript>(script); }
};

struct MockBackends {
    std::shared_ptr<MockChatClient> mllm;
    std::shared_ptr<MockChatClient> lm;
    std::shared_ptr<MockSegmentationClient> seg;

    explicit MockBackends(std::shared_ptr<const MockScript> s)
        : mllm(std::make_shared<MockChatClient>(s)),
          lm(std::make_shared<MockChatClient>(s)),
          seg(std::make_shared<MockSegmentationClient>(s)) {}

    Backends backends() const { return Backends{mllm, lm, seg}; }
};

// Writes the script next to a config that points all three backends at it.
inline PipelineConfig mock_config(const fs::path& dir, const MockScript& script, PipelineMode mode) {
    files::write_atomic(dir / "mock.json", script.to_json().dump(2));
    PipelineConfig cfg;
    cfg.mode = mode;
    cfg.base_dir = dir;
    cfg.mllm.mock_script = cfg.lm.mock_script = cfg.seg.mock_script = "mock.json";
    cfg.mllm.retries = cfg.lm.retries = cfg.seg.retries = 0;
    return cfg;
}

}  // namespace vqar::testing
