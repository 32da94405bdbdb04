#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace enrichbench {

// Turns texts into raw vectors, one per input, in input order.
// Implementations must be thread-safe and report failures as ProviderError.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<std::vector<double>> embed(std::span<const std::string> texts) = 0;
};

enum class EmbedProviderKind { openai_compatible, mock };

struct EmbedProviderConfig {
    std::string provider_id = "mock";
    EmbedProviderKind kind = EmbedProviderKind::mock;
    std::string model_id;  // empty for mock: derived from dim and seed
    std::string endpoint;
    std::string auth_ref;
    int batch_size = 64;
    std::chrono::milliseconds timeout{60'000};
    int max_retries = 3;
    int max_in_flight = 4;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{20'000};

    // Mock-only.
    int mock_dim = 256;
    std::uint64_t mock_seed = 42;

    void validate() const;
    // model_id, or "hash-d<dim>-s<seed>" for a mock without one.
    std::string effective_model_id() const;
};

std::string_view embed_kind_name(EmbedProviderKind kind) noexcept;
EmbedProviderKind parse_embed_kind(std::string_view name);

EmbedProviderConfig embed_config_from_json(std::string_view json_text);
EmbedProviderConfig load_embed_config(const std::filesystem::path& path);

std::shared_ptr<Embedder> make_embedder(const EmbedProviderConfig& cfg);

// Offline feature-hashing embedder. Each whitespace token is hashed together
// with the seed into one of `dim` buckets with a hash-derived sign; the
// signed counts are l2-normalized. Output depends only on (text, dim, seed),
// and texts sharing tokens share buckets, so token overlap raises cosine.
class MockEmbedder final : public Embedder {
public:
    MockEmbedder(int dim, std::uint64_t seed);  // dim >= 2

    std::vector<double> embed_one(std::string_view text) const;
    std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;

    int dim() const noexcept { return dim_; }

private:
    int dim_;
    std::uint64_t seed_;
};

// Embeddings over HTTP(S).
//
// Request body:  {"model": model_id, "input": ["text", ...]}
// Response body: {"data": [{"index": i, "embedding": [float, ...]}, ...]}
// Entries are reordered by "index"; a count mismatch or a non-finite value
// is a ProviderError.
class HttpEmbedder final : public Embedder {
public:
    HttpEmbedder(EmbedProviderConfig cfg, std::string credential);
    std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;

    static std::string build_request_body(std::string_view model_id, std::span<const std::string> texts);
    static std::vector<std::vector<double>> parse_response_body(std::string_view body, std::size_t expected);

private:
    EmbedProviderConfig cfg_;
    std::string credential_;
};

}  // namespace enrichbench
