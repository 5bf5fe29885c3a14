// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "bench/record.hpp"

#include "common/error.hpp"
#include "common/text.hpp"

namespace vqar {

std::string to_string(QType t) {
    switch (t) {
        case QType::Mcq: return "mcq";
        case QType::Open: return "open";
        case QType::Binary: return "binary";
    }
    return "unknown";
}

QType qtype_from_string(const std::string& s) {
    if (s == "mcq") return QType::Mcq;
    if (s == "open") return QType::Open;
    if (s == "binary") return QType::Binary;
    fail(ErrorCode::Schema, "unknown qtype '" + s + "'");
}

std::string choice_letter(std::size_t i) {
    return std::string(1, static_cast<char>('A' + i));
}

void QARecord::validate() const {
    if (id.empty()) fail(ErrorCode::Schema, "record id is empty");
    if (question.empty()) fail(ErrorCode::Schema, "record " + id + ": question is empty");
    if (image_path.empty()) fail(ErrorCode::Schema, "record " + id + ": image_path is empty");
    switch (qtype) {
        case QType::Mcq: {
            if (choices.empty()) fail(ErrorCode::Schema, "record " + id + ": mcq needs choices");
            if (choices.size() > 26) fail(ErrorCode::Schema, "record " + id + ": more than 26 choices");
            if (gold.size() != 1) fail(ErrorCode::Schema, "record " + id + ": mcq needs exactly one gold letter");
            const std::string g = text::to_upper(text::trim(gold[0]));
            bool found = false;
            for (std::size_t i = 0; i < choices.size(); ++i) found = found || g == choice_letter(i);
            if (!found) {
                fail(ErrorCode::Schema, "record " + id + ": gold '" + gold[0] + "' is not one of the " +
                                            std::to_string(choices.size()) + " choice letters");
            }
            break;
        }
        case QType::Open:
            if (gold.empty() || gold.size() > 10) {
                fail(ErrorCode::Schema, "record " + id + ": open questions need 1-10 gold answers");
            }
            break;
        case QType::Binary: {
            if (gold.size() != 1) fail(ErrorCode::Schema, "record " + id + ": binary needs one gold answer");
            const std::string g = text::to_lower(text::trim(gold[0]));
            if (g != "yes" && g != "no") fail(ErrorCode::Schema, "record " + id + ": binary gold must be yes or no");
            break;
        }
    }
    if (subtask.has_value() != pair_id.has_value()) {
        fail(ErrorCode::Schema, "record " + id + ": subtask and pair_id must appear together");
    }
    if (subtask && qtype != QType::Binary) {
        fail(ErrorCode::Schema, "record " + id + ": MME records must be binary");
    }
}

}  // namespace vqar
