// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "bench/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/text.hpp"

namespace vqar {

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string strip_trailing_punct(std::string s) {
    while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back())) && s.back() != ')') s.pop_back();
    return text::trim(s);
}

std::string first_word(std::string_view s) {
    std::istringstream in{std::string(s)};
    std::string w;
    in >> w;
    return w;
}

}  // namespace

std::string normalize_answer(std::string_view s) {
    const std::string lower = text::to_lower(s);
    std::string spaced;
    spaced.reserve(lower.size());
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const char c = lower[i];
        if (c == '\'') continue;
        if (c == '.' && i > 0 && i + 1 < lower.size() && is_digit(lower[i - 1]) && is_digit(lower[i + 1])) {
            spaced += c;
        } else if (std::ispunct(static_cast<unsigned char>(c))) {
            spaced += ' ';
        } else {
            spaced += c;
        }
    }
    std::istringstream in(spaced);
    std::string word, out;
    while (in >> word) {
        if (word == "a" || word == "an" || word == "the") continue;
        if (!out.empty()) out += ' ';
        out += word;
    }
    return out;
}

int score_mcq(std::string_view pred, const QARecord& record) {
    if (record.qtype != QType::Mcq || record.gold.empty()) return 0;
    const std::string gold = text::to_upper(text::trim(record.gold[0]));
    std::string s = strip_trailing_punct(text::to_upper(text::trim(pred)));
    if (s.size() == 3 && s.front() == '(' && s.back() == ')') s = s.substr(1, 1);
    if (s.size() == 1 && std::isalpha(static_cast<unsigned char>(s[0]))) return s == gold ? 1 : 0;

    int matched = -1;
    for (std::size_t i = 0; i < record.choices.size(); ++i) {
        if (strip_trailing_punct(text::to_upper(text::trim(record.choices[i]))) != s) continue;
        if (matched >= 0) return 0;  // ambiguous
        matched = static_cast<int>(i);
    }
    return matched >= 0 && choice_letter(static_cast<std::size_t>(matched)) == gold ? 1 : 0;
}

double score_vqa_soft(std::string_view pred, std::span<const std::string> gold) {
    if (gold.empty()) return 0.0;
    const std::string p = normalize_answer(pred);
    int matches = 0;
    std::vector<bool> hit(gold.size());
    for (std::size_t k = 0; k < gold.size(); ++k) {
        hit[k] = normalize_answer(gold[k]) == p;
        matches += hit[k] ? 1 : 0;
    }
    if (gold.size() < 10) return std::min(matches / 3.0, 1.0);
    double sum = 0.0;
    for (std::size_t j = 0; j < gold.size(); ++j) {
        sum += std::min((matches - (hit[j] ? 1 : 0)) / 3.0, 1.0);
    }
    return sum / static_cast<double>(gold.size());
}

int score_binary(std::string_view pred, const QARecord& record) {
    if (record.gold.empty()) return 0;
    const std::string w = first_word(normalize_answer(pred));
    return (w == "yes" || w == "no") && w == text::to_lower(text::trim(record.gold[0])) ? 1 : 0;
}

double score_record(std::string_view pred, const QARecord& record) {
    switch (record.qtype) {
        case QType::Mcq: return score_mcq(pred, record);
        case QType::Open: return score_vqa_soft(pred, record.gold);
        case QType::Binary: return score_binary(pred, record);
    }
    return 0.0;
}

bool is_cognition_subtask(std::string_view subtask) {
    static const std::set<std::string, std::less<>> kCognition = {
        "commonsense_reasoning", "numerical_calculation", "text_translation", "code_reasoning"};
    return kCognition.count(text::to_lower(subtask)) > 0;
}

MmeScores score_mme(std::span<const QARecord> records, std::span<const std::string> preds) {
    if (records.size() != preds.size()) fail(ErrorCode::InvalidArgument, "one prediction per record is required");
    struct Tally {
        int questions = 0, correct = 0;
        std::map<std::string, std::vector<int>> pairs;
    };
    std::map<std::string, Tally> by_subtask;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const QARecord& r = records[i];
        if (!r.subtask) continue;
        if (!r.pair_id) fail(ErrorCode::Pairing, "record " + r.id + " has a subtask but no pair_id");
        Tally& t = by_subtask[*r.subtask];
        const int ok = score_binary(preds[i], r);
        t.questions += 1;
        t.correct += ok;
        t.pairs[*r.pair_id].push_back(ok);
    }

    MmeScores out;
    for (const auto& [name, t] : by_subtask) {
        MmeSubtaskScore s;
        s.subtask = name;
        s.cognition = is_cognition_subtask(name);
        s.questions = t.questions;
        int both = 0;
        for (const auto& [pair, oks] : t.pairs) {
            if (oks.size() != 2) {
                fail(ErrorCode::Pairing, "pair '" + pair + "' in subtask '" + name + "' has " +
                                             std::to_string(oks.size()) + " members, expected 2");
            }
            both += oks[0] && oks[1] ? 1 : 0;
        }
        s.pairs = static_cast<int>(t.pairs.size());
        s.acc = 100.0 * t.correct / t.questions;
        s.acc_plus = 100.0 * both / s.pairs;
        (s.cognition ? out.cognition_total : out.perception_total) += s.score();
        out.subtasks.push_back(std::move(s));
    }
    return out;
}

}  // namespace vqar
