#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "enrichbench/embedder.hpp"
#include "enrichbench/retry.hpp"
#include "enrichbench/store.hpp"
#include "enrichbench/vector_math.hpp"

namespace enrichbench {

// Cache-first batch embedding.
//
// Provider output is rounded to float32 before it is returned or stored,
// because float32 is the on-disk precision; a cold run and a warm run
// therefore return bit-identical vectors.
class EmbeddingService {
public:
    EmbeddingService(EmbedProviderConfig cfg, store::Store& cache);
    EmbeddingService(EmbedProviderConfig cfg, std::shared_ptr<Embedder> embedder, store::Store& cache,
                     Sleeper sleeper = real_sleeper());

    // Order-preserving. Duplicate texts are embedded once. Misses are sent
    // in chunks of cfg.batch_size with at most cfg.max_in_flight chunks in
    // flight. Throws std::invalid_argument for an empty list or text,
    // ProviderError when retries run out, DimensionMismatch when vectors
    // disagree on dim (including against the first dim this service saw).
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts);

    std::uint64_t network_calls() const noexcept { return network_calls_.load(); }
    const EmbedProviderConfig& config() const noexcept { return cfg_; }
    const std::string& model_id() const noexcept { return model_id_; }

    store::CacheKey cache_key(const Digest& text_hash) const;

private:
    EmbedProviderConfig cfg_;
    std::string model_id_;
    std::shared_ptr<Embedder> embedder_;
    store::Store& cache_;
    Sleeper sleeper_;
    RetryPolicy retry_;
    std::atomic<std::uint64_t> network_calls_{0};
    std::atomic<std::size_t> run_dim_{0};
};

}  // namespace enrichbench
