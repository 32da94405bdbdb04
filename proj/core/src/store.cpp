#include "enrichbench/store.hpp"

#include <json.hpp>

#include <bit>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <thread>
#include <unistd.h>

#include "enrichbench/errors.hpp"
#include "enrichbench/log.hpp"
#include "enrichbench/timeutil.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace enrichbench::store {

namespace {

constexpr int kFormatVersion = 1;
constexpr std::string_view kSidecarSuffix = ".meta.json";

std::optional<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) return std::nullopt;
    return std::move(buf).str();
}

void write_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("short write to " + path.string());
}

fs::path unique_temp(const fs::path& target) {
    static std::atomic<std::uint64_t> counter{0};
    std::ostringstream name;
    name << target.filename().string() << ".tmp." << ::getpid() << '.'
         << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.' << counter.fetch_add(1);
    return target.parent_path() / name.str();
}

void publish(const fs::path& temp, const fs::path& target) {
    std::error_code ec;
    fs::rename(temp, target, ec);
    if (ec) {
        fs::remove(temp, ec);
        throw IoError("cannot publish " + target.string());
    }
}

json key_to_json(const CacheKey& key) {
    return json{{"namespace", namespace_name(key.ns())},
                {"provider_id", key.provider_id()},
                {"model_id", key.model_id()},
                {"prompt_id", key.prompt_id()},
                {"content_hash", key.content_hash().hex()}};
}

}  // namespace

std::string_view namespace_name(Namespace ns) noexcept {
    return ns == Namespace::chat ? "chat" : "embed";
}

CacheKey::CacheKey(Namespace ns, std::string provider_id, std::string model_id,
                   std::string prompt_id, Digest content_hash)
    : ns_(ns),
      provider_id_(std::move(provider_id)),
      model_id_(std::move(model_id)),
      prompt_id_(std::move(prompt_id)),
      content_hash_(std::move(content_hash)) {
    const auto bad = [](const std::string& s) { return s.find('\n') != std::string::npos; };
    if (provider_id_.empty() || model_id_.empty()) {
        throw std::invalid_argument("cache key needs provider_id and model_id");
    }
    if (bad(provider_id_) || bad(model_id_) || bad(prompt_id_)) {
        throw std::invalid_argument("cache key fields must not contain newlines");
    }
    if (content_hash_.empty()) throw std::invalid_argument("cache key needs a content hash");
}

CacheKey CacheKey::chat(std::string provider_id, std::string model_id, std::string prompt_id,
                        Digest content_hash) {
    if (prompt_id.empty() || prompt_id == "-") {
        throw std::invalid_argument("chat cache keys need a prompt id other than \"-\"");
    }
    return CacheKey(Namespace::chat, std::move(provider_id), std::move(model_id),
                    std::move(prompt_id), std::move(content_hash));
}

CacheKey CacheKey::embed(std::string provider_id, std::string model_id, Digest content_hash) {
    return CacheKey(Namespace::embed, std::move(provider_id), std::move(model_id), "-",
                    std::move(content_hash));
}

std::string CacheKey::serialize() const {
    std::string out = "enrichbench-cache-key/v1\n";
    for (std::string_view field :
         {namespace_name(ns_), std::string_view(provider_id_), std::string_view(model_id_),
          std::string_view(prompt_id_), std::string_view(content_hash_.hex())}) {
        out.append(field);
        out.push_back('\n');
    }
    return out;
}

Digest CacheKey::digest() const { return Digest::of(serialize()); }

Store::Store(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) {
        throw IoError("cannot create cache root " + root_.string() + ": " + ec.message());
    }
}

fs::path Store::payload_path(const CacheKey& key) const {
    const auto hex = key.digest().hex();
    return root_ / namespace_name(key.ns()) / hex.substr(0, 2) / hex;
}

fs::path Store::sidecar_path(const CacheKey& key) const {
    auto p = payload_path(key);
    p += kSidecarSuffix;
    return p;
}

std::optional<CacheEntry> Store::get(const CacheKey& key) {
    std::error_code ec;
    if (!fs::is_directory(root_, ec)) {
        throw IoError("cache root " + root_.string() + " is not a readable directory");
    }
    const auto miss = [&]() -> std::optional<CacheEntry> {
        misses_.fetch_add(1);
        return std::nullopt;
    };
    const auto corrupt = [&](const std::string& why) {
        log::warn("cache entry " + key.digest().hex() + " ignored: " + why);
        return miss();
    };

    const auto meta_path = sidecar_path(key);
    if (!fs::exists(meta_path, ec)) return miss();

    const auto sidecar_bytes = read_file(meta_path);
    if (!sidecar_bytes) return corrupt("unreadable sidecar");
    const auto payload = read_file(payload_path(key));
    if (!payload) return corrupt("missing payload");

    json meta = json::parse(*sidecar_bytes, nullptr, /*allow_exceptions=*/false);
    if (meta.is_discarded() || !meta.is_object()) return corrupt("malformed sidecar");
    try {
        if (meta.at("version").get<int>() != kFormatVersion) return corrupt("unknown version");
        if (meta.at("key") != key_to_json(key)) return corrupt("sidecar key mismatch");
        auto digest = Digest::from_hex(meta.at("payload_digest").get<std::string>());
        if (Digest::of(*payload) != digest) return corrupt("payload digest mismatch");
        CacheEntry entry{key, *payload, meta.at("created_at").get<std::string>(), std::move(digest),
                         {}};
        if (meta.contains("attributes")) {
            entry.attributes = meta.at("attributes").get<std::map<std::string, std::string>>();
        }
        hits_.fetch_add(1);
        return entry;
    } catch (const std::exception& e) {
        return corrupt(std::string("malformed sidecar: ") + e.what());
    }
}

CacheEntry Store::put(const CacheKey& key, std::string_view payload,
                      std::map<std::string, std::string> attributes) {
    if (payload.empty()) throw std::invalid_argument("cache payload must be non-empty");

    CacheEntry entry{key, std::string(payload), utc_now(), Digest::of(payload),
                     std::move(attributes)};
    json meta = {{"version", kFormatVersion},
                 {"key", key_to_json(key)},
                 {"created_at", entry.created_at},
                 {"payload_digest", entry.payload_digest.hex()},
                 {"payload_bytes", entry.payload.size()},
                 {"attributes", entry.attributes}};

    const auto payload_target = payload_path(key);
    const auto sidecar_target = sidecar_path(key);
    std::error_code ec;
    fs::create_directories(payload_target.parent_path(), ec);
    if (ec) throw IoError("cannot create " + payload_target.parent_path().string());

    const auto payload_temp = unique_temp(payload_target);
    const auto sidecar_temp = unique_temp(sidecar_target);
    write_file(payload_temp, entry.payload);
    write_file(sidecar_temp, meta.dump(2) + "\n");
    if (put_hook_) put_hook_(PutStage::temp_written);

    publish(payload_temp, payload_target);
    if (put_hook_) put_hook_(PutStage::payload_published);
    publish(sidecar_temp, sidecar_target);
    return entry;
}

Stats Store::stats() const {
    Stats s;
    s.hit_count = hits_.load();
    s.miss_count = misses_.load();
    std::error_code ec;
    for (auto it = fs::recursive_directory_iterator(root_, ec);
         !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (!it->is_regular_file(ec)) continue;
        const auto name = it->path().filename().string();
        if (!name.ends_with(kSidecarSuffix)) continue;
        auto payload = it->path();
        payload.replace_filename(name.substr(0, name.size() - kSidecarSuffix.size()));
        const auto size = fs::file_size(payload, ec);
        if (ec) {
            ec.clear();
            continue;
        }
        ++s.entries;
        s.bytes += size;
    }
    return s;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
    }
    return v;
}

}  // namespace

std::string encode_vector_payload(std::string_view model_id, std::span<const float> values) {
    std::string out;
    out.reserve(8 + model_id.size() + 4 * values.size());
    put_u32(out, static_cast<std::uint32_t>(values.size()));
    put_u32(out, static_cast<std::uint32_t>(model_id.size()));
    out.append(model_id);
    for (float f : values) put_u32(out, std::bit_cast<std::uint32_t>(f));
    return out;
}

std::optional<VectorPayload> decode_vector_payload(std::string_view bytes) {
    if (bytes.size() < 8) return std::nullopt;
    const std::uint64_t dim = get_u32(bytes, 0);
    const std::uint64_t name_len = get_u32(bytes, 4);
    if (bytes.size() != 8 + name_len + 4 * dim) return std::nullopt;
    VectorPayload p;
    p.model_id.assign(bytes.substr(8, name_len));
    p.values.reserve(dim);
    for (std::uint64_t i = 0; i < dim; ++i) {
        p.values.push_back(std::bit_cast<float>(get_u32(bytes, 8 + name_len + 4 * i)));
    }
    return p;
}

fs::path resolve_cache_dir(const std::optional<std::string>& flag) {
    if (flag && !flag->empty()) return *flag;
    if (const char* env = std::getenv("ENRICHBENCH_CACHE"); env && *env) return env;
    return ".enrichbench-cache";
}

}  // namespace enrichbench::store
