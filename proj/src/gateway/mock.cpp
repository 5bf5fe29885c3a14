// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "gateway/mock.hpp"

#include <set>

#include "common/codec.hpp"
#include "common/files.hpp"
#include "gateway/wire.hpp"

namespace vqar {

using nlohmann::json;

std::string chat_fingerprint(const std::vector<std::string>& text_parts, double temperature) {
    std::string material = temperature > 0.0 ? "hot" : "cold";
    for (const auto& t : text_parts) {
        material += '\x1e';
        material += t;
    }
    return codec::sha256_hex(material).substr(0, 16);
}

std::string chat_fingerprint(const ChatRequest& req) {
    return chat_fingerprint(req.text_parts(), req.temperature);
}

std::string segmentation_fingerprint(const std::string& text_prompt) {
    return codec::sha256_hex("seg\x1e" + text_prompt).substr(0, 16);
}

json token_logprobs_to_json(const std::vector<TokenLogprob>& tokens) {
    json arr = json::array();
    for (const auto& t : tokens) {
        json top = json::array();
        for (const auto& c : t.top) top.push_back({{"token", c.token}, {"logprob", c.logprob}});
        arr.push_back({{"token", t.token}, {"logprob", t.logprob}, {"top", top}});
    }
    return arr;
}

std::vector<TokenLogprob> token_logprobs_from_json(const json& j) {
    std::vector<TokenLogprob> out;
    for (const auto& t : j) {
        TokenLogprob tl;
        tl.token = t.at("token").get<std::string>();
        tl.logprob = t.at("logprob").get<double>();
        if (t.contains("top")) {
            for (const auto& c : t["top"]) tl.top.push_back({c.at("token"), c.at("logprob")});
        }
        out.push_back(std::move(tl));
    }
    return out;
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) fail(ErrorCode::Config, where + " must be a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, _] : j.items()) {
        if (!ok.count(k)) fail(ErrorCode::Config, "unknown key '" + k + "' in " + where);
    }
}

void check_error_kind(const std::string& e) {
    if (!e.empty() && e != "transport" && e != "backend" && e != "malformed") {
        fail(ErrorCode::Config, "mock error must be transport|backend|malformed, got " + e);
    }
}

MockChatReply chat_reply_from_json(const json& j) {
    check_keys(j, {"text", "latency_ms", "logprobs", "error"}, "mock chat reply");
    MockChatReply r;
    r.text = j.value("text", "");
    if (j.contains("latency_ms")) r.latency_ms = j["latency_ms"].get<double>();
    if (j.contains("logprobs")) r.logprobs = token_logprobs_from_json(j["logprobs"]);
    r.error = j.value("error", "");
    check_error_kind(r.error);
    return r;
}

json chat_reply_to_json(const MockChatReply& r) {
    json j = {{"text", r.text}};
    if (r.latency_ms) j["latency_ms"] = *r.latency_ms;
    if (r.logprobs) j["logprobs"] = token_logprobs_to_json(*r.logprobs);
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

MockSegmentationReply seg_reply_from_json(const json& j) {
    check_keys(j, {"detections", "latency_ms", "error"}, "mock segmentation reply");
    MockSegmentationReply r;
    if (j.contains("detections")) {
        for (const auto& d : j["detections"]) r.detections.push_back(wire::detection_from_json(d));
    }
    if (j.contains("latency_ms")) r.latency_ms = j["latency_ms"].get<double>();
    r.error = j.value("error", "");
    check_error_kind(r.error);
    return r;
}

json seg_reply_to_json(const MockSegmentationReply& r) {
    json dets = json::array();
    for (const auto& d : r.detections) dets.push_back(wire::detection_to_json(d));
    json j = {{"detections", dets}};
    if (r.latency_ms) j["latency_ms"] = *r.latency_ms;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

[[noreturn]] void throw_scripted(const std::string& kind, double elapsed) {
    if (kind == "transport") {
        Error e(ErrorCode::Transport, "scripted transport failure");
        e.set_retryable(true).set_elapsed_ms(elapsed);
        throw e;
    }
    if (kind == "backend") {
        Error e(ErrorCode::Backend, "scripted HTTP 500");
        e.set_retryable(true).set_elapsed_ms(elapsed);
        throw e;
    }
    Error e(ErrorCode::Backend, "scripted malformed payload");
    e.set_elapsed_ms(elapsed);
    throw e;
}

template <class Entry>
const auto& pick(const std::map<std::string, Entry>& entries, const std::string& fingerprint,
                 std::size_t index, const auto& fallback, const char* what) {
    auto it = entries.find(fingerprint);
    if (it != entries.end() && !it->second.replies.empty()) {
        const auto& replies = it->second.replies;
        if (index < replies.size()) return replies[index];
        if (it->second.cycle) return replies[index % replies.size()];
    }
    if (fallback) return *fallback;
    fail(ErrorCode::ScriptMiss, std::string("no scripted ") + what + " reply for fingerprint " +
                                    fingerprint + " (call #" + std::to_string(index) + ")");
}

}  // namespace

MockScript& MockScript::add_chat(const std::string& fingerprint, std::vector<MockChatReply> replies,
                                 bool cycle) {
    auto& e = chat_[fingerprint];
    e.replies = std::move(replies);
    e.cycle = cycle;
    return *this;
}

MockScript& MockScript::add_chat_text(const std::vector<std::string>& text_parts, double temperature,
                                      std::vector<MockChatReply> replies, bool cycle) {
    return add_chat(chat_fingerprint(text_parts, temperature), std::move(replies), cycle);
}

MockScript& MockScript::add_segmentation(const std::string& text_prompt,
                                         std::vector<MockSegmentationReply> replies, bool cycle) {
    auto& e = segmentation_[segmentation_fingerprint(text_prompt)];
    e.replies = std::move(replies);
    e.cycle = cycle;
    e.source = text_prompt;
    return *this;
}

MockScript& MockScript::set_default_chat(MockChatReply reply) {
    default_chat_ = std::move(reply);
    return *this;
}

MockScript& MockScript::set_default_segmentation(MockSegmentationReply reply) {
    default_segmentation_ = std::move(reply);
    return *this;
}

MockScript& MockScript::set_default_latency(double ms) {
    default_latency_ms_ = ms;
    return *this;
}

const MockChatReply& MockScript::chat_reply(const std::string& fingerprint, std::size_t index) const {
    return pick(chat_, fingerprint, index, default_chat_, "chat");
}

const MockSegmentationReply& MockScript::segmentation_reply(const std::string& fingerprint,
                                                            std::size_t index) const {
    return pick(segmentation_, fingerprint, index, default_segmentation_, "segmentation");
}

json MockScript::to_json() const {
    json chat = json::array();
    for (const auto& [fp, e] : chat_) {
        json replies = json::array();
        for (const auto& r : e.replies) replies.push_back(chat_reply_to_json(r));
        chat.push_back({{"fingerprint", fp}, {"replies", replies}, {"cycle", e.cycle}});
    }
    json seg = json::array();
    for (const auto& [fp, e] : segmentation_) {
        json replies = json::array();
        for (const auto& r : e.replies) replies.push_back(seg_reply_to_json(r));
        seg.push_back({{"prompt", e.source}, {"replies", replies}, {"cycle", e.cycle}});
    }
    json j = {{"latency_ms", default_latency_ms_}, {"chat", chat}, {"segmentation", seg}};
    if (default_chat_) j["default_chat"] = chat_reply_to_json(*default_chat_);
    if (default_segmentation_) j["default_segmentation"] = seg_reply_to_json(*default_segmentation_);
    return j;
}

MockScript MockScript::from_json(const json& j) {
    check_keys(j, {"latency_ms", "chat", "segmentation", "default_chat", "default_segmentation"},
               "mock script");
    MockScript s;
    try {
        s.default_latency_ms_ = j.value("latency_ms", 0.0);
        for (const auto& e : j.value("chat", json::array())) {
            check_keys(e, {"text", "hot", "fingerprint", "replies", "cycle"}, "mock chat entry");
            std::vector<MockChatReply> replies;
            for (const auto& r : e.at("replies")) replies.push_back(chat_reply_from_json(r));
            const bool cycle = e.value("cycle", false);
            if (e.contains("fingerprint")) {
                s.add_chat(e["fingerprint"].get<std::string>(), std::move(replies), cycle);
            } else {
                std::vector<std::string> parts;
                const json& t = e.at("text");
                if (t.is_string()) {
                    parts.push_back(t.get<std::string>());
                } else {
                    parts = t.get<std::vector<std::string>>();
                }
                s.add_chat_text(parts, e.value("hot", false) ? 1.0 : 0.0, std::move(replies), cycle);
            }
        }
        for (const auto& e : j.value("segmentation", json::array())) {
            check_keys(e, {"prompt", "replies", "cycle"}, "mock segmentation entry");
            std::vector<MockSegmentationReply> replies;
            for (const auto& r : e.at("replies")) replies.push_back(seg_reply_from_json(r));
            s.add_segmentation(e.at("prompt").get<std::string>(), std::move(replies), e.value("cycle", false));
        }
        if (j.contains("default_chat")) s.default_chat_ = chat_reply_from_json(j["default_chat"]);
        if (j.contains("default_segmentation")) {
            s.default_segmentation_ = seg_reply_from_json(j["default_segmentation"]);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Config, std::string("invalid mock script: ") + e.what());
    }
    return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(files::read_text(path));
    } catch (const json::exception& e) {
        fail(ErrorCode::Config, "mock script " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

MockChatClient::MockChatClient(std::shared_ptr<const MockScript> script, int retries)
    : script_(std::move(script)), retries_(retries) {}

ChatResponse MockChatClient::chat(const ChatRequest& req) {
    req.validate();
    const std::string fp = chat_fingerprint(req);
    std::lock_guard lock(mu_);
    ++calls_;
    double elapsed = 0.0;
    try {
        return call_with_retries(
            {retries_, 0},
            [&](int) {
                ++attempts_;
                const MockChatReply& r = script_->chat_reply(fp, next_[fp]++);
                const double latency = r.latency_ms.value_or(script_->default_latency());
                elapsed += latency;
                if (!r.error.empty()) throw_scripted(r.error, elapsed);
                ChatResponse resp;
                resp.text = r.text;
                resp.latency_ms = elapsed;
                if (req.want_logprobs) {
                    if (!r.logprobs) throw UnsupportedLogprobs(resp);
                    resp.token_logprobs = r.logprobs;
                }
                return resp;
            },
            {});
    } catch (Error& e) {
        e.set_elapsed_ms(elapsed);
        throw;
    }
}

std::vector<CallOutcome<ChatResponse>> MockChatClient::chat_many(const std::vector<ChatRequest>& reqs,
                                                                 bool /*parallel*/) {
    return ChatClient::chat_many(reqs, false);
}

std::size_t MockChatClient::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::size_t MockChatClient::attempts() const {
    std::lock_guard lock(mu_);
    return attempts_;
}

MockSegmentationClient::MockSegmentationClient(std::shared_ptr<const MockScript> script, int retries)
    : script_(std::move(script)), retries_(retries) {}

SegmentResponse MockSegmentationClient::segment(const ImageRef& image, const std::string& text_prompt,
                                                double box_threshold) {
    if (!(box_threshold >= 0.0 && box_threshold <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "box_threshold must be within [0,1]");
    }
    if (!image.bytes || image.width <= 0) fail(ErrorCode::ImageDecode, "segmentation needs a decoded image");
    const std::string fp = segmentation_fingerprint(text_prompt);
    std::lock_guard lock(mu_);
    ++calls_;
    double elapsed = 0.0;
    try {
        return call_with_retries(
            {retries_, 0},
            [&](int) {
                ++attempts_;
                const MockSegmentationReply& r = script_->segmentation_reply(fp, next_[fp]++);
                elapsed += r.latency_ms.value_or(script_->default_latency());
                if (!r.error.empty()) throw_scripted(r.error, elapsed);
                return SegmentResponse{finalize_detections(r.detections, image, box_threshold), elapsed};
            },
            {});
    } catch (Error& e) {
        e.set_elapsed_ms(elapsed);
        throw;
    }
}

std::vector<CallOutcome<SegmentResponse>> MockSegmentationClient::segment_many(
    const ImageRef& image, const std::vector<std::string>& prompts, double box_threshold,
    bool /*parallel*/) {
    return SegmentationClient::segment_many(image, prompts, box_threshold, false);
}

std::size_t MockSegmentationClient::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::size_t MockSegmentationClient::attempts() const {
    std::lock_guard lock(mu_);
    return attempts_;
}

}  // namespace vqar
