#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "enrichbench/chat.hpp"
#include "enrichbench/prompts.hpp"
#include "enrichbench/retry.hpp"
#include "enrichbench/store.hpp"
#include "enrichbench/textprep.hpp"

namespace enrichbench {

// One corpus item as it flows through the pipeline.
struct Document {
    std::string id;
    textprep::CleanText text;
    std::optional<std::string> label;
};

// original -> enriched, with enough provenance to recompute the cache key.
// When fallback_used is set, enriched equals original.value.
struct EnrichmentRecord {
    std::string doc_id;
    textprep::CleanText original;
    std::string enriched;
    std::string prompt_id;
    std::string provider_id;
    std::string model_id;
    std::string created_at;
    int attempt_count = 1;
    bool fallback_used = false;
    bool length_flagged = false;  // input exceeded the character budget

    bool operator==(const EnrichmentRecord&) const = default;
};

// Single-line JSON, fields in a fixed order (see README for the schema).
std::string to_json_line(const EnrichmentRecord& record);
EnrichmentRecord record_from_json(std::string_view line);

enum class FallbackPolicy { fail, passthrough };

std::string_view fallback_name(FallbackPolicy policy) noexcept;
FallbackPolicy parse_fallback(std::string_view name);

struct EnrichOptions {
    FallbackPolicy fallback = FallbackPolicy::passthrough;
    // Longer inputs are sent whole but flagged on the record.
    std::size_t max_input_chars = 8000;
    Sleeper sleeper = real_sleeper();
    std::uint64_t jitter_seed = 0;
};

// Rewrites documents through a chat provider, cache first.
//
// Results are cached under (provider_id, model_id, prompt_id,
// sha256(original text)). Passthrough fallbacks are never cached, so a
// later run retries them.
class Enricher {
public:
    Enricher(ChatProviderConfig cfg, store::Store& cache, EnrichOptions options = {});
    Enricher(ChatProviderConfig cfg, std::shared_ptr<ChatProvider> provider, store::Store& cache,
             EnrichOptions options = {});

    // Throws std::invalid_argument for an empty document, ProviderError when
    // retries run out under FallbackPolicy::fail.
    EnrichmentRecord enrich(const Document& doc, const PromptTemplate& prompt);

    // Order-preserving; at most cfg.max_in_flight provider calls at once.
    // Under FallbackPolicy::fail, throws BatchError listing every failed
    // document after the whole batch has been attempted; successes are
    // already cached by then.
    std::vector<EnrichmentRecord> enrich_batch(std::span<const Document> docs,
                                               const PromptTemplate& prompt);

    std::uint64_t network_calls() const noexcept { return network_calls_.load(); }
    const ChatProviderConfig& config() const noexcept { return cfg_; }
    const EnrichOptions& options() const noexcept { return options_; }

    store::CacheKey cache_key(const textprep::CleanText& original, const PromptTemplate& prompt) const;

private:
    EnrichmentRecord enrich_one(const Document& doc, const PromptTemplate& prompt, std::uint64_t stream);

    ChatProviderConfig cfg_;
    std::shared_ptr<ChatProvider> provider_;
    store::Store& cache_;
    EnrichOptions options_;
    RetryPolicy retry_;
    std::atomic<std::uint64_t> network_calls_{0};
};

}  // namespace enrichbench
