#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "enrichbench/chat.hpp"
#include "enrichbench/classifier.hpp"
#include "enrichbench/datasets.hpp"
#include "enrichbench/embed.hpp"
#include "enrichbench/embedder.hpp"
#include "enrichbench/enrich.hpp"
#include "enrichbench/prompts.hpp"
#include "enrichbench/results.hpp"
#include "enrichbench/store.hpp"
#include "enrichbench/textprep.hpp"

namespace enrichbench {

enum class TaskKind { pair, classification };
enum class EnrichSides { both, a, b };

struct SyntheticPairs {
    int n_pos = 50;
    int n_neg = 50;
    std::uint64_t seed = 7;
};

struct DatasetSpec {
    std::string name;
    TaskKind task = TaskKind::pair;
    std::filesystem::path path;              // JSONL file, or empty with `synthetic`
    std::optional<SyntheticPairs> synthetic;  // pair task only
    std::vector<textprep::Step> steps;        // preprocessing, canonical order
    EnrichSides sides = EnrichSides::both;    // which side of each pair is rewritten

    std::string metric() const;  // "cosine_ap" for pairs, "accuracy" otherwise
};

struct OutputPaths {
    std::optional<std::filesystem::path> table_json;
    std::optional<std::filesystem::path> markdown;
    std::optional<std::filesystem::path> csv;
    std::optional<std::filesystem::path> metadata;
};

struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<std::string> variants;  // "baseline" and/or prompt ids, in row order
    std::vector<PromptTemplate> extra_prompts;
    ChatProviderConfig chat;
    EmbedProviderConfig embed;
    bool preprocess_before_enrich = true;
    FallbackPolicy fallback = FallbackPolicy::passthrough;
    std::size_t max_input_chars = 8000;
    ClassifierHyper classifier;
    std::optional<std::filesystem::path> cache_dir;
    OutputPaths output;
    std::vector<ReferenceRow> references;
    int max_parallel_cells = 2;

    PromptRegistry registry() const;  // builtins plus extra_prompts
    // Throws ConfigError: no datasets, duplicate dataset names, unknown or
    // duplicate variants, bad provider settings.
    void validate() const;
};

// JSON config; relative paths resolve against base_dir. Schema in README.
ExperimentConfig experiment_config_from_json(std::string_view json_text, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Embeds both sides of every pair, scores each pair by cosine similarity and
// returns 100 * average precision. texts_a/texts_b are per pair, aligned
// with pairs.pairs.
double pair_task_score(const datasets::PairDataset& pairs, std::span<const std::string> texts_a,
                       std::span<const std::string> texts_b, EmbeddingService& embedder);

// Fits the classifier on train embeddings and returns 100 * test accuracy.
double classification_task_score(std::span<const std::string> train_texts, std::span<const std::string> train_labels,
                                 std::span<const std::string> test_texts, std::span<const std::string> test_labels,
                                 EmbeddingService& embedder, const ClassifierHyper& hyper);

// Test seams: replace the providers built from the config.
struct ExperimentOverrides {
    std::shared_ptr<ChatProvider> chat;
    std::shared_ptr<Embedder> embedder;
    std::optional<Sleeper> sleeper;
};

struct ExperimentResult {
    ResultTable table;
    std::uint64_t chat_calls = 0;
    std::uint64_t embed_calls = 0;
    std::size_t fallback_records = 0;
};

// Runs every (variant, dataset) cell: "baseline" embeds the preprocessed
// original text, a prompt variant embeds the rewritten text. Cells run in
// parallel (at most max_parallel_cells at once); the table is assembled in
// variant-major order regardless of completion order. A failing cell becomes
// a failed row. Dataset loading and config problems throw before any cell runs.
ExperimentResult run_experiment(const ExperimentConfig& cfg, store::Store& cache,
                                const ExperimentOverrides& overrides = {});

}  // namespace enrichbench
