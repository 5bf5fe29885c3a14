// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "bench/manifest.hpp"

#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/files.hpp"
#include "common/text.hpp"

namespace vqar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kRecordKeys = {"id",   "image_path", "question", "qtype",
                                           "choices", "gold",    "subtask",  "pair_id"};

std::vector<std::string> string_list(const json& j, const char* key) {
    if (j.is_string()) return {j.get<std::string>()};
    if (!j.is_array()) fail(ErrorCode::Schema, std::string("'") + key + "' must be a string or a list of strings");
    std::vector<std::string> out;
    for (const auto& item : j) {
        if (!item.is_string()) fail(ErrorCode::Schema, std::string("'") + key + "' entries must be strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::string required_string(const json& j, const char* key) {
    if (!j.contains(key)) fail(ErrorCode::Schema, std::string("missing field '") + key + "'");
    if (!j[key].is_string()) fail(ErrorCode::Schema, std::string("field '") + key + "' must be a string");
    return j[key].get<std::string>();
}

// Calls fn(line_number, parsed_object) for each non-blank line.
template <typename Fn>
void for_each_jsonl(const fs::path& path, Fn&& fn) {
    std::istringstream in(files::read_text(path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            if (!j.is_object()) fail(ErrorCode::Schema, "line is not a JSON object");
            fn(line_no, j);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Schema, path.string() + ":" + std::to_string(line_no) + ": " + e.what())
                .set_line(line_no);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Schema && e.code() != ErrorCode::InvalidArgument) throw;
            throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what()).set_line(line_no);
        }
    }
}

}  // namespace

QARecord record_from_json(const json& j, const fs::path& base_dir) {
    for (const auto& [k, _] : j.items()) {
        if (!kRecordKeys.count(k)) fail(ErrorCode::Schema, "unknown field '" + k + "'");
    }
    QARecord r;
    r.id = required_string(j, "id");
    r.question = required_string(j, "question");
    r.qtype = qtype_from_string(required_string(j, "qtype"));
    const fs::path image = required_string(j, "image_path");
    r.image_path = (image.is_absolute() || base_dir.empty() ? image : base_dir / image).lexically_normal().string();
    if (j.contains("choices")) r.choices = string_list(j["choices"], "choices");
    if (!j.contains("gold")) fail(ErrorCode::Schema, "missing field 'gold'");
    r.gold = string_list(j["gold"], "gold");
    if (j.contains("subtask")) r.subtask = required_string(j, "subtask");
    if (j.contains("pair_id")) r.pair_id = required_string(j, "pair_id");
    if (r.qtype != QType::Mcq && !r.choices.empty()) fail(ErrorCode::Schema, "choices only apply to mcq records");
    r.validate();
    return r;
}

std::vector<QARecord> load_manifest(const fs::path& path) {
    std::vector<QARecord> records;
    std::set<std::string> ids;
    std::vector<int> lines;
    for_each_jsonl(path, [&](int line_no, const json& j) {
        QARecord r = record_from_json(j, path.parent_path());
        if (!ids.insert(r.id).second) fail(ErrorCode::Schema, "duplicate id '" + r.id + "'");
        records.push_back(std::move(r));
        lines.push_back(line_no);
    });
    if (records.empty()) fail(ErrorCode::Schema, "manifest " + path.string() + " has no records");
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!fs::exists(records[i].image_path)) {
            throw Error(ErrorCode::MissingImage, path.string() + ":" + std::to_string(lines[i]) + ": image " +
                                                     records[i].image_path + " not found")
                .set_line(lines[i]);
        }
    }
    return records;
}

std::map<std::string, std::string> load_predictions(const fs::path& path) {
    std::map<std::string, std::string> out;
    for_each_jsonl(path, [&](int, const json& j) {
        const std::string id = required_string(j, "id");
        const std::string pred = required_string(j, "prediction");
        if (!out.emplace(id, pred).second) fail(ErrorCode::Schema, "duplicate prediction for '" + id + "'");
    });
    if (out.empty()) fail(ErrorCode::InvalidArgument, "predictions file " + path.string() + " is empty");
    return out;
}

}  // namespace vqar
