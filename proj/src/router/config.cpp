// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "router/config.hpp"

#include "common/error.hpp"
#include "common/files.hpp"
#include "common/text.hpp"

namespace vqar {

using nlohmann::json;

std::string to_string(PipelineMode m) {
    switch (m) {
        case PipelineMode::Focus: return "focus";
        case PipelineMode::OnlyFI: return "only-fi";
        case PipelineMode::OnlyDT: return "only-dt";
        case PipelineMode::AnnotateAll: return "annotate-all";
    }
    return "unknown";
}

PipelineMode pipeline_mode_from_string(const std::string& s) {
    if (s == "focus") return PipelineMode::Focus;
    if (s == "only-fi") return PipelineMode::OnlyFI;
    if (s == "only-dt") return PipelineMode::OnlyDT;
    if (s == "annotate-all") return PipelineMode::AnnotateAll;
    fail(ErrorCode::Config, "unknown mode '" + s + "' (focus|only-fi|only-dt|annotate-all)");
}

void PipelineConfig::validate() const {
    if (parallelism < 1) fail(ErrorCode::Config, "parallelism must be >= 1");
    if (!(answer_temperature >= 0.0)) fail(ErrorCode::Config, "answer_temperature must be >= 0");
    if (answer_max_tokens < 1) fail(ErrorCode::Config, "answer_max_tokens must be >= 1");
    if (!(annotate_all_threshold >= 0.0 && annotate_all_threshold <= 1.0)) {
        fail(ErrorCode::Config, "annotate_all.box_threshold must be within [0,1]");
    }
    gate.validate();
    conceptualizer.validate();
    mllm.validate();
    lm.validate();
    seg.validate();
    if (!mllm.is_chat() || !lm.is_chat()) fail(ErrorCode::Config, "mllm and lm must be chat backends");
    if (seg.kind != BackendKind::Segmentation) fail(ErrorCode::Config, "seg must be a segmentation backend");
}

namespace {

json backend_to_json(const BackendSpec& b) {
    return {
        {"kind", to_string(b.kind)}, {"endpoint", b.endpoint},     {"auth", b.auth_env},
        {"model_name", b.model_name}, {"timeout_ms", b.timeout_ms}, {"retries", b.retries},
        {"backoff_ms", b.backoff_ms}, {"mock_script", b.mock_script},
    };
}

BackendSpec backend_from_json(const json& j) {
    BackendSpec b;
    b.kind = backend_kind_from_string(j.at("kind").get<std::string>());
    b.endpoint = j.at("endpoint").get<std::string>();
    b.auth_env = j.at("auth").get<std::string>();
    b.model_name = j.at("model_name").get<std::string>();
    b.timeout_ms = j.at("timeout_ms").get<int>();
    b.retries = j.at("retries").get<int>();
    b.backoff_ms = j.at("backoff_ms").get<int>();
    b.mock_script = j.at("mock_script").get<std::string>();
    return b;
}

// Overlay `user` onto `defaults`, rejecting keys the defaults do not have.
void strict_merge(json& defaults, const json& user, const std::string& path) {
    if (!user.is_object()) fail(ErrorCode::Config, (path.empty() ? "config" : path) + " must be an object");
    for (const auto& [k, v] : user.items()) {
        const std::string where = path.empty() ? k : path + "." + k;
        if (!defaults.contains(k)) fail(ErrorCode::Config, "unknown config key '" + where + "'");
        json& slot = defaults[k];
        if (slot.is_object()) {
            strict_merge(slot, v, where);
        } else {
            slot = v;
        }
    }
}

}  // namespace

json config_to_json(const PipelineConfig& cfg) {
    const auto& g = cfg.gate;
    const auto& c = cfg.conceptualizer;
    return {
        {"version", kConfigSchemaVersion},
        {"mode", to_string(cfg.mode)},
        {"parallelism", cfg.parallelism},
        {"answer_temperature", cfg.answer_temperature},
        {"answer_max_tokens", cfg.answer_max_tokens},
        {"gate",
         {{"n_samples", g.n_samples},
          {"temperature", g.temperature},
          {"strategy", to_string(g.strategy)},
          {"entropy_threshold", g.entropy_threshold},
          {"parallel", g.parallel},
          {"max_tokens", g.max_tokens}}},
        {"conceptualizer",
         {{"k_max", c.k_max},
          {"box_threshold", c.box_threshold},
          {"parallel_segmentation", c.parallel_segmentation},
          {"max_tokens", c.max_tokens},
          {"style",
           {{"stroke_width", c.style.stroke_width},
            {"tag_padding", c.style.tag_padding},
            {"max_label_chars", c.style.max_label_chars},
            {"draw_tags", c.style.draw_tags}}}}},
        {"annotate_all", {{"prompt", cfg.annotate_all_prompt}, {"box_threshold", cfg.annotate_all_threshold}}},
        {"backends",
         {{"mllm", backend_to_json(cfg.mllm)}, {"lm", backend_to_json(cfg.lm)}, {"seg", backend_to_json(cfg.seg)}}},
        {"tags", {{"model", cfg.model_tag}, {"benchmark", cfg.benchmark_tag}}},
    };
}

PipelineConfig config_from_json(const json& user, const std::filesystem::path& base_dir) {
    json doc = config_to_json(PipelineConfig{});
    strict_merge(doc, user, "");

    PipelineConfig cfg;
    try {
        if (doc.at("version").get<int>() != kConfigSchemaVersion) {
            fail(ErrorCode::Config, "unsupported config version " + doc["version"].dump());
        }
        cfg.mode = pipeline_mode_from_string(doc.at("mode").get<std::string>());
        cfg.parallelism = doc.at("parallelism").get<int>();
        cfg.answer_temperature = doc.at("answer_temperature").get<double>();
        cfg.answer_max_tokens = doc.at("answer_max_tokens").get<int>();

        const json& g = doc.at("gate");
        cfg.gate.n_samples = g.at("n_samples").get<int>();
        cfg.gate.temperature = g.at("temperature").get<double>();
        cfg.gate.strategy = gate_strategy_from_string(g.at("strategy").get<std::string>());
        cfg.gate.entropy_threshold = g.at("entropy_threshold").get<double>();
        cfg.gate.parallel = g.at("parallel").get<bool>();
        cfg.gate.max_tokens = g.at("max_tokens").get<int>();

        const json& c = doc.at("conceptualizer");
        cfg.conceptualizer.k_max = c.at("k_max").get<int>();
        cfg.conceptualizer.box_threshold = c.at("box_threshold").get<double>();
        cfg.conceptualizer.parallel_segmentation = c.at("parallel_segmentation").get<bool>();
        cfg.conceptualizer.max_tokens = c.at("max_tokens").get<int>();
        const json& s = c.at("style");
        cfg.conceptualizer.style.stroke_width = s.at("stroke_width").get<int>();
        cfg.conceptualizer.style.tag_padding = s.at("tag_padding").get<int>();
        cfg.conceptualizer.style.max_label_chars = s.at("max_label_chars").get<int>();
        cfg.conceptualizer.style.draw_tags = s.at("draw_tags").get<bool>();

        cfg.annotate_all_prompt = doc.at("annotate_all").at("prompt").get<std::string>();
        cfg.annotate_all_threshold = doc.at("annotate_all").at("box_threshold").get<double>();

        const json& b = doc.at("backends");
        cfg.mllm = backend_from_json(b.at("mllm"));
        cfg.lm = backend_from_json(b.at("lm"));
        cfg.seg = backend_from_json(b.at("seg"));

        cfg.model_tag = doc.at("tags").at("model").get<std::string>();
        cfg.benchmark_tag = doc.at("tags").at("benchmark").get<std::string>();
    } catch (const json::exception& e) {
        fail(ErrorCode::Config, std::string("invalid config: ") + e.what());
    }
    cfg.base_dir = base_dir;
    cfg.validate();
    return cfg;
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) fail(ErrorCode::Config, "override must be key=value: " + o);
        const std::string key = o.substr(0, eq);
        const std::string raw = o.substr(eq + 1);
        json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
        if (value.is_discarded()) value = raw;

        const auto parts = text::split(key, '.');
        json* node = &doc;
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            if (!node->is_object()) fail(ErrorCode::Config, "override path '" + key + "' crosses a non-object");
            node = &(*node)[parts[i]];
            if (node->is_null()) *node = json::object();
        }
        if (!node->is_object()) fail(ErrorCode::Config, "override path '" + key + "' crosses a non-object");
        (*node)[parts.back()] = value;
    }
}

PipelineConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    json doc = json::object();
    std::filesystem::path base_dir;
    if (!path.empty()) {
        try {
            doc = json::parse(files::read_text(path));
        } catch (const json::exception& e) {
            fail(ErrorCode::Config, "config " + path.string() + " is not valid JSON: " + e.what());
        } catch (const Error& e) {
            fail(ErrorCode::Config, e.what());
        }
        base_dir = path.parent_path();
    }
    apply_overrides(doc, overrides);
    return config_from_json(doc, base_dir);
}

}  // namespace vqar
