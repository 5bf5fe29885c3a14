// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bench/record.hpp"

namespace vqar {

// Bumped whenever normalize_answer changes behavior.
inline constexpr int kNormalizationVersion = 1;

// Lowercase; drop apostrophes; other punctuation becomes a space except a
// '.' between two digits; drop the articles a/an/the; collapse whitespace.
std::string normalize_answer(std::string_view s);

// 1 when pred names the gold letter: "B", "(b).", or the exact text of
// exactly one choice.
int score_mcq(std::string_view pred, const QARecord& record);

// Leave-one-out min(matches/3, 1) averaged over annotators when there are 10
// gold answers; min(matches/3, 1) over the full list otherwise.
double score_vqa_soft(std::string_view pred, std::span<const std::string> gold);

// 1 when the first word of pred is the gold yes/no.
int score_binary(std::string_view pred, const QARecord& record);

double score_record(std::string_view pred, const QARecord& record);

// Subtasks scored on the cognition side; everything else is perception.
bool is_cognition_subtask(std::string_view subtask);

struct MmeSubtaskScore {
    std::string subtask;
    bool cognition = false;
    int questions = 0;
    int pairs = 0;
    double acc = 0.0;       // percent of correct answers
    double acc_plus = 0.0;  // percent of pairs with both answers correct
    double score() const { return acc + acc_plus; }
};

struct MmeScores {
    std::vector<MmeSubtaskScore> subtasks;  // sorted by name
    double perception_total = 0.0;
    double cognition_total = 0.0;
};

// Scores every record carrying a subtask; preds[i] answers records[i].
// Error(Pairing) unless each (subtask, pair_id) has exactly two members.
MmeScores score_mme(std::span<const QARecord> records, std::span<const std::string> preds);

}  // namespace vqar
