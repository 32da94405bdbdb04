#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace enrichbench::datasets {

struct LabeledText {
    std::string doc_id;
    std::string text;
    std::string label;

    bool operator==(const LabeledText&) const = default;
};

struct ClassificationDataset {
    std::string name;
    std::vector<LabeledText> train;
    std::vector<LabeledText> test;
    std::vector<std::string> label_set;  // sorted, distinct, covers both splits

    bool operator==(const ClassificationDataset&) const = default;
};

struct TextPair {
    std::string pair_id;
    std::string text_a;
    std::string text_b;
    int gold = 0;  // 0 or 1

    bool operator==(const TextPair&) const = default;
};

struct PairDataset {
    std::string name;
    std::vector<TextPair> pairs;

    bool operator==(const PairDataset&) const = default;
};

// JSONL, one object per line: {"id", "text", "label", "split"} with split in
// {"train", "test"}. Labels may be strings or integers (kept as their decimal
// text). Blank lines are skipped. The dataset name defaults to the file stem.
//
// Throws ConfigError (missing file), ParseError (bad JSON), SchemaError
// (missing/mistyped field, unknown split, duplicate id within a split) and
// EmptySplit (no train or no test rows). Errors carry 1-based line numbers.
ClassificationDataset load_classification(const std::filesystem::path& path, std::string name = {});

// JSONL: {"id", "text_a", "text_b", "label"} with label 0 or 1.
// Throws ConfigError, ParseError, SchemaError, or DegenerateLabels when every
// label is the same.
PairDataset load_pairs(const std::filesystem::path& path, std::string name = {});

// Inverse of the loaders: reloading the written file yields an equal dataset.
void write_classification(const ClassificationDataset& ds, const std::filesystem::path& path);
void write_pairs(const PairDataset& ds, const std::filesystem::path& path);

// Deterministic desk-scale pair set. Positives share most tokens (a sentence
// and a lightly edited copy); negatives are two independent sentences.
// Positives come first, then negatives; ids are "syn-pos-<k>" / "syn-neg-<k>".
// Throws std::invalid_argument unless n_pos, n_neg >= 1.
PairDataset synthetic_pairset(int n_pos, int n_neg, std::uint64_t seed);

}  // namespace enrichbench::datasets
