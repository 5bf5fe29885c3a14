// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <random>
#include <thread>

#include "common/codec.hpp"
#include "common/error.hpp"
#include "gateway/transport.hpp"
#include "gateway/wire.hpp"
#include "support.hpp"

using namespace vqar;
using namespace vqar::testing;
using nlohmann::json;

namespace {

ChatRequest text_request(const std::string& text, double temperature = 0.0) {
    ChatRequest req;
    req.messages.push_back({Role::User, {ContentPart::text_part(text)}});
    req.temperature = temperature;
    return req;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Internal;
}

// Local HTTP server on an ephemeral port, stopped on destruction.
class LocalServer {
public:
    LocalServer() {
        port_ = server.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        thread_.join();
    }
    std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

    httplib::Server server;

private:
    int port_ = 0;
    std::thread thread_;
};

const char* kChatOk = R"({"choices":[{"message":{"role":"assistant","content":"Answerable"}}]})";

BackendSpec http_spec(BackendKind kind, const std::string& endpoint, int retries) {
    BackendSpec spec;
    spec.kind = kind;
    spec.endpoint = endpoint;
    spec.retries = retries;
    spec.backoff_ms = 1;
    spec.timeout_ms = 5000;
    spec.api_key = "secret";
    return spec;
}

}  // namespace

TEST_CASE("chat request body follows the OpenAI shape") {
    ChatRequest req;
    const ImageRef img = white_image(4, 4);
    req.messages.push_back({Role::User, {ContentPart::image_part(img), ContentPart::text_part("what?")}});
    req.temperature = 1.0;
    req.max_tokens = 8;
    req.want_logprobs = true;
    req.seed = 42;
    const json body = wire::chat_request_body("m1", req);
    CHECK(body["model"] == "m1");
    CHECK(body["temperature"] == 1.0);
    CHECK(body["max_tokens"] == 8);
    CHECK(body["logprobs"] == true);
    CHECK(body["seed"] == 42);
    CHECK(body.contains("top_logprobs"));
    const json& content = body["messages"][0]["content"];
    CHECK(body["messages"][0]["role"] == "user");
    CHECK(content[0]["type"] == "image_url");
    const std::string url = content[0]["image_url"]["url"];
    CHECK(url.rfind("data:image/png;base64,", 0) == 0);
    CHECK(codec::base64_decode(url.substr(22)) == *img.bytes);
    CHECK(content[1] == json{{"type", "text"}, {"text", "what?"}});

    req.want_logprobs = false;
    CHECK_FALSE(wire::chat_request_body("m1", req).contains("top_logprobs"));
}

TEST_CASE("chat response parsing") {
    const std::string body = R"({"choices":[{"message":{"content":"Answerable"},
        "logprobs":{"content":[{"token":"Answerable","logprob":-0.105,
            "top_logprobs":[{"token":"Answerable","logprob":-0.105},{"token":"Un","logprob":-2.3}]}]}}]})";
    const ChatResponse r = wire::parse_chat_response(body);
    CHECK(r.text == "Answerable");
    REQUIRE(r.token_logprobs);
    CHECK((*r.token_logprobs)[0].logprob == doctest::Approx(-0.105));
    CHECK((*r.token_logprobs)[0].top.size() == 2);

    CHECK(wire::parse_chat_response(kChatOk).token_logprobs == std::nullopt);
    CHECK(code_of([] { wire::parse_chat_response("{}"); }) == ErrorCode::Backend);
    CHECK(code_of([] { wire::parse_chat_response("not json"); }) == ErrorCode::Backend);
    CHECK(code_of([] {
              wire::parse_chat_response(
                  R"({"choices":[{"message":{"content":"x"},"logprobs":{"content":[{"token":"x","logprob":0.5}]}}]})");
          }) == ErrorCode::Backend);
}

TEST_CASE("segmentation wire format") {
    const ImageRef img = white_image(8, 8);
    const json body = wire::segmentation_request_body(img, "dog", 0.7);
    CHECK(body["text_prompt"] == "dog");
    CHECK(body["box_threshold"] == 0.7);
    CHECK(codec::base64_decode(body["image_b64"].get<std::string>()) == *img.bytes);

    const auto dets = wire::parse_segmentation_response(
        R"({"detections":[{"label":"dog","box":[1,2,3,4],"score":0.9}]})");
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].label == "dog");
    CHECK(dets[0].box.x0 == 1);
    CHECK(dets[0].box.y1 == 4);
    CHECK(code_of([] {
              wire::parse_segmentation_response(R"({"detections":[{"label":"d","box":[1,2,3,4],"score":1.5}]})");
          }) == ErrorCode::Backend);
    CHECK(code_of([] { wire::parse_segmentation_response(R"({"detections":[{"label":"d","box":[1,2],"score":0.5}]})"); }) ==
          ErrorCode::Backend);
}

TEST_CASE("segmentation filters by threshold and sorts by score") {
    const ImageRef img = white_image();
    MockScript s;
    s.add_segmentation("dog", {seg_reply({det("dog", 0.92), det("dog", 0.40)})}, true);
    s.add_segmentation("three", {seg_reply({det("a", 0.2), det("b", 0.9), det("c", 0.5)})}, true);
    s.add_segmentation("none", {seg_reply({})}, true);
    MockSegmentationClient seg(std::make_shared<MockScript>(s));

    const auto one = seg.segment(img, "dog", 0.7).detections;
    REQUIRE(one.size() == 1);
    CHECK(one[0].score == 0.92);

    const auto all = seg.segment(img, "three", 0.0).detections;
    REQUIRE(all.size() == 3);
    CHECK(all[0].score == 0.9);
    CHECK(all[1].score == 0.5);
    CHECK(all[2].score == 0.2);

    CHECK(seg.segment(img, "none", 0.7).detections.empty());
}

TEST_CASE("raising the threshold never adds detections") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ImageRef img = white_image();
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Detection> raw;
        const int n = static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) raw.push_back(det("x", u(rng)));
        double t1 = u(rng), t2 = u(rng);
        if (t1 > t2) std::swap(t1, t2);
        CHECK(finalize_detections(raw, img, t2).size() <= finalize_detections(raw, img, t1).size());
    }
}

TEST_CASE("finalize_detections clamps boxes and drops degenerate ones") {
    const ImageRef img = white_image(50, 50);
    const auto out = finalize_detections({det("in", 0.9, {-5, -5, 20, 80}), det("out", 0.9, {60, 60, 70, 70})},
                                         img, 0.5);
    REQUIRE(out.size() == 1);
    CHECK(out[0].box.x0 == 0);
    CHECK(out[0].box.y1 == 50);
}

TEST_CASE("mock chat plays back its script") {
    MockScript s;
    s.add_chat_text({"q"}, 1.0, {text_reply("Answerable"), text_reply("Unanswerable"), text_reply("Answerable")});
    s.add_chat_text({"slow"}, 0.0, {text_reply("ok", 100.0)});
    MockChatReply lp = text_reply("Answerable");
    lp.logprobs = std::vector<TokenLogprob>{{"Answerable", -0.105, {}}};
    s.add_chat_text({"lp"}, 0.0, {lp});
    MockChatClient chat(std::make_shared<MockScript>(s));

    std::vector<std::string> texts;
    for (int i = 0; i < 3; ++i) texts.push_back(chat.chat(text_request("q", 1.0)).text);
    CHECK(texts == std::vector<std::string>{"Answerable", "Unanswerable", "Answerable"});

    CHECK(chat.chat(text_request("slow")).latency_ms == 100.0);

    ChatRequest req = text_request("lp");
    req.want_logprobs = true;
    const ChatResponse r = chat.chat(req);
    REQUIRE(r.token_logprobs);
    CHECK((*r.token_logprobs)[0].token == "Answerable");
    CHECK((*r.token_logprobs)[0].logprob == -0.105);

    CHECK(code_of([&] { chat.chat(text_request("unscripted")); }) == ErrorCode::ScriptMiss);
    // The fourth call on a non-cycling entry runs off the end of the script.
    CHECK(code_of([&] { chat.chat(text_request("q", 1.0)); }) == ErrorCode::ScriptMiss);
}

TEST_CASE("chat fingerprints bucket temperature but ignore images") {
    CHECK(chat_fingerprint({"a"}, 0.7) == chat_fingerprint({"a"}, 1.3));
    CHECK(chat_fingerprint({"a"}, 0.0) != chat_fingerprint({"a"}, 1.0));
    CHECK(chat_fingerprint({"a", "b"}, 0.0) != chat_fingerprint({"ab"}, 0.0));
    ChatRequest with_image = text_request("a");
    with_image.messages[0].parts.insert(with_image.messages[0].parts.begin(), ContentPart::image_part(white_image()));
    CHECK(chat_fingerprint(with_image) == chat_fingerprint(text_request("a")));
}

TEST_CASE("mock retries consume replies and accumulate latency") {
    MockScript s;
    s.add_chat_text({"flaky"}, 0.0, {error_reply("transport", 10.0), text_reply("ok", 20.0)});
    s.add_chat_text({"bad"}, 0.0, {error_reply("malformed", 5.0), text_reply("never", 5.0)});
    auto script = std::make_shared<MockScript>(s);

    MockChatClient retrying(script, 1);
    const ChatResponse r = retrying.chat(text_request("flaky"));
    CHECK(r.text == "ok");
    CHECK(r.latency_ms == 30.0);
    CHECK(retrying.calls() == 1);
    CHECK(retrying.attempts() == 2);

    MockChatClient strict(script, 0);
    try {
        strict.chat(text_request("flaky"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Transport);
        CHECK(e.elapsed_ms() == 10.0);
    }

    MockChatClient no_retry_on_malformed(script, 3);
    CHECK(code_of([&] { no_retry_on_malformed.chat(text_request("bad")); }) == ErrorCode::Backend);
    CHECK(no_retry_on_malformed.attempts() == 1);
}

TEST_CASE("missing scripted logprobs surface as UnsupportedLogprobs") {
    MockScript s;
    s.add_chat_text({"q"}, 1.0, {text_reply("Answerable")});
    MockChatClient chat(std::make_shared<MockScript>(s));
    ChatRequest req = text_request("q", 1.0);
    req.want_logprobs = true;
    try {
        chat.chat(req);
        FAIL("expected an error");
    } catch (const UnsupportedLogprobs& e) {
        CHECK(e.code() == ErrorCode::Unsupported);
        CHECK(e.partial().text == "Answerable");
    }
}

TEST_CASE("mock scripts survive a JSON round trip") {
    MockScript s;
    s.set_default_latency(7.0);
    s.add_chat_text({"q"}, 1.0, {verdict_reply("Answerable", 0.9, 3.0), error_reply("backend")}, true);
    s.add_segmentation("dog", {seg_reply({det("dog", 0.8)}, 50.0)});
    s.set_default_chat(text_reply("fallback"));
    const json j = s.to_json();
    const MockScript back = MockScript::from_json(j);
    CHECK(back.to_json() == j);

    const auto& r = back.chat_reply(chat_fingerprint({"q"}, 1.0), 2);  // cycles
    CHECK(r.text == "Answerable");
    REQUIRE(r.logprobs);
    CHECK((*r.logprobs)[0].top.size() == 2);
    CHECK(back.chat_reply("unknown", 0).text == "fallback");
    CHECK(back.default_latency() == 7.0);
}

TEST_CASE("mock script text entries and strict keys") {
    const json j = json::parse(R"({
        "latency_ms": 5,
        "chat": [{"text": "hello", "hot": false, "replies": [{"text": "hi"}]},
                 {"text": ["a", "b"], "hot": true, "replies": [{"text": "ab", "latency_ms": 9}]}],
        "segmentation": [{"prompt": "cat", "replies": [{"detections": [{"label": "cat", "box": [0,0,5,5], "score": 0.9}]}]}]
    })");
    const MockScript s = MockScript::from_json(j);
    MockChatClient chat(std::make_shared<MockScript>(s));
    const ChatResponse hi = chat.chat(text_request("hello"));
    CHECK(hi.text == "hi");
    CHECK(hi.latency_ms == 5.0);
    ChatRequest ab;
    ab.messages.push_back({Role::User, {ContentPart::text_part("a"), ContentPart::text_part("b")}});
    ab.temperature = 1.0;
    CHECK(chat.chat(ab).latency_ms == 9.0);

    CHECK(code_of([] { MockScript::from_json(json::parse(R"({"chats": []})")); }) == ErrorCode::Config);
}

TEST_CASE("HTTP chat retries 5xx and gives up after 1 + retries attempts") {
    LocalServer srv;
    std::atomic<int> hits{0};
    srv.server.Post("/fail", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 500;
        res.set_content("boom", "text/plain");
    });
    HttpChatClient client(http_spec(BackendKind::MultimodalChat, srv.url("/fail"), 2), make_http_transport(),
                          [](int) {});
    try {
        client.chat(text_request("hi"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Backend);
    }
    CHECK(hits == 3);
}

TEST_CASE("HTTP chat does not retry client errors") {
    LocalServer srv;
    std::atomic<int> hits{0};
    srv.server.Post("/bad", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 400;
    });
    HttpChatClient client(http_spec(BackendKind::MultimodalChat, srv.url("/bad"), 3), make_http_transport(),
                          [](int) {});
    CHECK(code_of([&] { client.chat(text_request("hi")); }) == ErrorCode::Backend);
    CHECK(hits == 1);
}

TEST_CASE("HTTP chat success sends the bearer token and measures latency") {
    LocalServer srv;
    std::string auth, model;
    std::atomic<int> hits{0};
    srv.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (++hits == 1) {
            res.status = 503;
            return;
        }
        auth = req.get_header_value("Authorization");
        model = json::parse(req.body)["model"];
        res.set_content(kChatOk, "application/json");
    });
    BackendSpec spec = http_spec(BackendKind::MultimodalChat, srv.url("/v1/chat/completions"), 1);
    spec.model_name = "vision-1";
    std::vector<int> sleeps;
    HttpChatClient client(spec, make_http_transport(), [&](int ms) { sleeps.push_back(ms); });
    const ChatResponse r = client.chat(text_request("hi"));
    CHECK(r.text == "Answerable");
    CHECK(r.latency_ms >= 0.0);
    CHECK(auth == "Bearer secret");
    CHECK(model == "vision-1");
    CHECK(sleeps == std::vector<int>{1});

    ChatRequest lp = text_request("hi");
    lp.want_logprobs = true;
    CHECK_THROWS_AS(client.chat(lp), UnsupportedLogprobs);
}

TEST_CASE("HTTP transport failures are retryable Transport errors") {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }  // closed again, so connections are refused
    HttpChatClient client(
        http_spec(BackendKind::TextChat, "http://127.0.0.1:" + std::to_string(port) + "/x", 1), make_http_transport(),
        [](int) {});
    CHECK(code_of([&] { client.chat(text_request("hi")); }) == ErrorCode::Transport);
}

TEST_CASE("HTTP segmentation client") {
    LocalServer srv;
    std::string prompt;
    srv.server.Post("/segment", [&](const httplib::Request& req, httplib::Response& res) {
        prompt = json::parse(req.body)["text_prompt"];
        res.set_content(R"({"detections":[{"label":"dog","box":[1,1,9,9],"score":0.4},
                                          {"label":"dog","box":[2,2,8,8],"score":0.95}]})",
                        "application/json");
    });
    HttpSegmentationClient seg(http_spec(BackendKind::Segmentation, srv.url("/segment"), 0), make_http_transport());
    const auto r = seg.segment(white_image(20, 20), "dog", 0.7);
    CHECK(prompt == "dog");
    REQUIRE(r.detections.size() == 1);
    CHECK(r.detections[0].score == 0.95);
}

TEST_CASE("clients need an endpoint or a mock script") {
    ::unsetenv("FOCUS_CHAT_ENDPOINT");
    ::unsetenv("FOCUS_SEG_ENDPOINT");
    BackendSpec chat;
    chat.kind = BackendKind::TextChat;
    CHECK(code_of([&] { make_chat_client(chat); }) == ErrorCode::Config);
    BackendSpec seg;
    seg.kind = BackendKind::Segmentation;
    CHECK(code_of([&] { make_segmentation_client(seg); }) == ErrorCode::Config);

    ::setenv("FOCUS_CHAT_ENDPOINT", "http://127.0.0.1:1/v1/chat/completions", 1);
    CHECK(make_chat_client(chat) != nullptr);
    ::unsetenv("FOCUS_CHAT_ENDPOINT");

    BackendSpec bad = chat;
    bad.retries = 6;
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::Config);
}
