// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace vqar {

enum class QType { Mcq, Open, Binary };

std::string to_string(QType t);
QType qtype_from_string(const std::string& s);  // Error(Schema) if unknown

/// One benchmark item. image_path is absolute or relative to the process cwd
/// once the manifest loader has resolved it.
struct QARecord {
    std::string id;
    std::string image_path;
    std::string question;
    QType qtype = QType::Open;
    std::vector<std::string> choices;  // mcq only
    std::vector<std::string> gold;     // mcq: letter; open: 1-10 answers; binary: yes|no
    std::optional<std::string> subtask;  // MME
    std::optional<std::string> pair_id;  // MME two-questions-per-image grouping

    // Throws Error(Schema) describing the first broken invariant.
    void validate() const;
};

// "A", "B", ... for choice index i.
std::string choice_letter(std::size_t i);

}  // namespace vqar
