#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "enrichbench/hash.hpp"

namespace enrichbench::store {

enum class Namespace { chat, embed };

std::string_view namespace_name(Namespace ns) noexcept;

// Identity of a cached provider response. See docs/cache-format.md for the
// frozen serialization.
class CacheKey {
public:
    // prompt_id is required for chat keys and must not be "-".
    static CacheKey chat(std::string provider_id, std::string model_id, std::string prompt_id,
                         Digest content_hash);
    static CacheKey embed(std::string provider_id, std::string model_id, Digest content_hash);

    Namespace ns() const noexcept { return ns_; }
    const std::string& provider_id() const noexcept { return provider_id_; }
    const std::string& model_id() const noexcept { return model_id_; }
    const std::string& prompt_id() const noexcept { return prompt_id_; }  // "-" for embed
    const Digest& content_hash() const noexcept { return content_hash_; }

    // Canonical newline-separated serialization; any field change changes it.
    std::string serialize() const;
    // SHA-256 of serialize(); names the entry on disk.
    Digest digest() const;

    bool operator==(const CacheKey&) const = default;

private:
    CacheKey(Namespace ns, std::string provider_id, std::string model_id, std::string prompt_id,
             Digest content_hash);

    Namespace ns_;
    std::string provider_id_;
    std::string model_id_;
    std::string prompt_id_;
    Digest content_hash_;
};

struct CacheEntry {
    CacheKey key;
    std::string payload;
    std::string created_at;
    Digest payload_digest;
    // Small string metadata kept in the sidecar (e.g. attempt counts).
    std::map<std::string, std::string> attributes;
};

struct Stats {
    std::uint64_t entries = 0;
    std::uint64_t bytes = 0;
    std::uint64_t hit_count = 0;
    std::uint64_t miss_count = 0;

    bool operator==(const Stats&) const = default;
};

// Points in put() where a test hook may abort, simulating a killed process.
enum class PutStage { temp_written, payload_published };

// Content-addressed, crash-safe store rooted at a directory.
//
// Layout: <root>/<namespace>/<first 2 hex of key digest>/<key digest> holds
// the payload and <key digest>.meta.json is the sidecar. The sidecar is
// renamed into place last, so it acts as the commit marker.
//
// Safe for concurrent use from many threads and processes. Entries are
// immutable; an identical key written twice keeps the last writer.
class Store {
public:
    // Creates the root directory if needed; throws IoError on failure.
    explicit Store(std::filesystem::path root);

    // Returns the committed entry for key, or nullopt. Corrupt entries
    // (digest mismatch, unreadable sidecar, key mismatch) are reported via
    // log::warn and treated as absent. Throws IoError if the root itself
    // cannot be read.
    std::optional<CacheEntry> get(const CacheKey& key);

    // payload must be non-empty (std::invalid_argument otherwise).
    CacheEntry put(const CacheKey& key, std::string_view payload,
                   std::map<std::string, std::string> attributes = {});

    Stats stats() const;

    const std::filesystem::path& root() const noexcept { return root_; }

    // Test hook: invoked at each PutStage; throwing from it aborts the put
    // exactly as a process kill at that point would.
    void set_put_hook(std::function<void(PutStage)> hook) { put_hook_ = std::move(hook); }

    std::filesystem::path payload_path(const CacheKey& key) const;
    std::filesystem::path sidecar_path(const CacheKey& key) const;

private:
    std::filesystem::path root_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
    std::function<void(PutStage)> put_hook_;
};

// Embedding payload, little-endian throughout:
//   u32 dim | u32 model_id byte length | model_id bytes | dim x f32
std::string encode_vector_payload(std::string_view model_id, std::span<const float> values);

struct VectorPayload {
    std::string model_id;
    std::vector<float> values;
};

// nullopt when the bytes do not form exactly one well-formed payload.
std::optional<VectorPayload> decode_vector_payload(std::string_view bytes);

// Resolves the cache directory: explicit flag, then ENRICHBENCH_CACHE, then
// "./.enrichbench-cache".
std::filesystem::path resolve_cache_dir(const std::optional<std::string>& flag);

}  // namespace enrichbench::store
