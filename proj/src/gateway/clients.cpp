// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "gateway/clients.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <future>
#include <thread>

#include "gateway/mock.hpp"
#include "gateway/wire.hpp"

namespace vqar {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <class T, class F>
CallOutcome<T> capture(F&& f) {
    CallOutcome<T> out;
    try {
        out.value = f();
        out.latency_ms = out.value->latency_ms;
    } catch (const Error& e) {
        out.error = std::current_exception();
        out.latency_ms = e.elapsed_ms();
    } catch (...) {
        out.error = std::current_exception();
    }
    return out;
}

template <class T, class F>
std::vector<CallOutcome<T>> fan_out(std::size_t n, bool parallel, F&& one) {
    std::vector<CallOutcome<T>> out(n);
    if (!parallel || n < 2) {
        for (std::size_t i = 0; i < n; ++i) out[i] = capture<T>([&] { return one(i); });
        return out;
    }
    std::vector<std::future<CallOutcome<T>>> pending;
    pending.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        pending.push_back(std::async(std::launch::async, [&one, i] { return capture<T>([&] { return one(i); }); }));
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = pending[i].get();
    return out;
}

std::string resolve_api_key(const BackendSpec& spec) {
    if (spec.api_key) return *spec.api_key;
    if (spec.auth_env.empty()) return {};
    const char* v = std::getenv(spec.auth_env.c_str());
    return v ? std::string(v) : std::string();
}

Error status_error(int status, const std::string& body) {
    Error err(ErrorCode::Backend,
              "backend returned HTTP " + std::to_string(status) + ": " + body.substr(0, 200));
    err.set_retryable(status == 429 || status >= 500);
    return err;
}

Sleeper default_sleeper(Sleeper s) {
    if (s) return s;
    return [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
}

}  // namespace

std::vector<CallOutcome<ChatResponse>> ChatClient::chat_many(const std::vector<ChatRequest>& reqs,
                                                             bool parallel) {
    return fan_out<ChatResponse>(reqs.size(), parallel, [&](std::size_t i) { return chat(reqs[i]); });
}

std::vector<CallOutcome<SegmentResponse>> SegmentationClient::segment_many(
    const ImageRef& image, const std::vector<std::string>& prompts, double box_threshold,
    bool parallel) {
    return fan_out<SegmentResponse>(prompts.size(), parallel, [&](std::size_t i) {
        return segment(image, prompts[i], box_threshold);
    });
}

std::vector<Detection> finalize_detections(std::vector<Detection> raw, const ImageRef& image,
                                           double box_threshold) {
    std::vector<Detection> out;
    for (auto& d : raw) {
        if (!(d.score >= box_threshold)) continue;
        auto clamped = clamp_box(d.box, image.width, image.height);
        if (!clamped) continue;
        d.box = *clamped;
        out.push_back(std::move(d));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Detection& a, const Detection& b) { return a.score > b.score; });
    return out;
}

HttpChatClient::HttpChatClient(BackendSpec spec, std::shared_ptr<HttpTransport> transport,
                               Sleeper sleep)
    : spec_(std::move(spec)),
      api_key_(resolve_api_key(spec_)),
      transport_(std::move(transport)),
      sleep_(default_sleeper(std::move(sleep))) {
    spec_.validate();
    if (!spec_.is_chat()) fail(ErrorCode::Config, "chat client needs a chat backend kind");
}

ChatResponse HttpChatClient::chat(const ChatRequest& req) {
    req.validate();
    const std::string body = wire::chat_request_body(spec_.model_name, req).dump();
    const auto start = Clock::now();
    try {
        ChatResponse resp = call_with_retries(
            {spec_.retries, spec_.backoff_ms},
            [&](int) {
                const HttpResult r = transport_->post_json(spec_.endpoint, body, api_key_, spec_.timeout_ms);
                if (r.status < 200 || r.status >= 300) throw status_error(r.status, r.body);
                return wire::parse_chat_response(r.body);
            },
            sleep_);
        resp.latency_ms = ms_since(start);
        if (req.want_logprobs && !resp.token_logprobs) throw UnsupportedLogprobs(resp);
        return resp;
    } catch (Error& e) {
        e.set_elapsed_ms(ms_since(start));
        throw;
    }
}

HttpSegmentationClient::HttpSegmentationClient(BackendSpec spec,
                                               std::shared_ptr<HttpTransport> transport,
                                               Sleeper sleep)
    : spec_(std::move(spec)),
      api_key_(resolve_api_key(spec_)),
      transport_(std::move(transport)),
      sleep_(default_sleeper(std::move(sleep))) {
    spec_.validate();
    if (spec_.kind != BackendKind::Segmentation) {
        fail(ErrorCode::Config, "segmentation client needs a segmentation backend");
    }
}

SegmentResponse HttpSegmentationClient::segment(const ImageRef& image, const std::string& text_prompt,
                                                double box_threshold) {
    if (!(box_threshold >= 0.0 && box_threshold <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "box_threshold must be within [0,1]");
    }
    if (!image.bytes || image.width <= 0) fail(ErrorCode::ImageDecode, "segmentation needs a decoded image");
    const std::string body = wire::segmentation_request_body(image, text_prompt, box_threshold).dump();
    const auto start = Clock::now();
    try {
        auto raw = call_with_retries(
            {spec_.retries, spec_.backoff_ms},
            [&](int) {
                const HttpResult r = transport_->post_json(spec_.endpoint, body, api_key_, spec_.timeout_ms);
                if (r.status < 200 || r.status >= 300) throw status_error(r.status, r.body);
                return wire::parse_segmentation_response(r.body);
            },
            sleep_);
        return {finalize_detections(std::move(raw), image, box_threshold), ms_since(start)};
    } catch (Error& e) {
        e.set_elapsed_ms(ms_since(start));
        throw;
    }
}

namespace {

BackendSpec with_endpoint(BackendSpec spec, const char* env_name) {
    if (spec.endpoint.empty()) {
        if (const char* v = std::getenv(env_name)) spec.endpoint = v;
    }
    if (spec.endpoint.empty()) {
        fail(ErrorCode::Config, to_string(spec.kind) + " backend has no endpoint (set " +
                                    env_name + " or backends.*.endpoint)");
    }
    return spec;
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base_dir) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base_dir.empty()) return base_dir / path;
    return path;
}

}  // namespace

std::shared_ptr<ChatClient> make_chat_client(const BackendSpec& spec,
                                             const std::filesystem::path& base_dir) {
    spec.validate();
    if (!spec.is_chat()) fail(ErrorCode::Config, "expected a chat backend, got " + to_string(spec.kind));
    if (!spec.mock_script.empty()) {
        auto script = std::make_shared<const MockScript>(MockScript::load(resolve(spec.mock_script, base_dir)));
        return std::make_shared<MockChatClient>(std::move(script), spec.retries);
    }
    return std::make_shared<HttpChatClient>(with_endpoint(spec, "FOCUS_CHAT_ENDPOINT"),
                                            make_http_transport());
}

std::shared_ptr<SegmentationClient> make_segmentation_client(const BackendSpec& spec,
                                                             const std::filesystem::path& base_dir) {
    spec.validate();
    if (spec.kind != BackendKind::Segmentation) {
        fail(ErrorCode::Config, "expected a segmentation backend, got " + to_string(spec.kind));
    }
    if (!spec.mock_script.empty()) {
        auto script = std::make_shared<const MockScript>(MockScript::load(resolve(spec.mock_script, base_dir)));
        return std::make_shared<MockSegmentationClient>(std::move(script), spec.retries);
    }
    return std::make_shared<HttpSegmentationClient>(with_endpoint(spec, "FOCUS_SEG_ENDPOINT"),
                                                    make_http_transport());
}

}  // namespace vqar
