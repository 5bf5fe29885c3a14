// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

// Manifest format: one JSON object per line.
//
//   {"id": "q1", "image_path": "img/1.png", "question": "...",
//    "qtype": "mcq" | "open" | "binary",
//    "choices": ["..", ".."],          // mcq only
//    "gold": "B" | ["a", "b", ...],     // a bare string is a one-entry list
//    "subtask": "color", "pair_id": "p3"}  // MME only, both or neither
//
// Relative image paths resolve against the manifest's directory. Blank lines
// are skipped.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "bench/record.hpp"

namespace vqar {

// Error(Schema) with line() set on malformed lines; Error(MissingImage) when
// an image file does not exist.
std::vector<QARecord> load_manifest(const std::filesystem::path& path);

QARecord record_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

// JSONL of {"id", "prediction"}; Error(InvalidArgument) when empty.
std::map<std::string, std::string> load_predictions(const std::filesystem::path& path);

}  // namespace vqar
