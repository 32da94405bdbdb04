#include "enrichbench/store.hpp"

#include <doctest.h>
#include <support.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <random>
#include <thread>

#include "enrichbench/errors.hpp"
#include "enrichbench/log.hpp"

using namespace enrichbench;
using namespace enrichbench::store;
using testsupport::TempDir;

namespace {

CacheKey chat_key(const std::string& text, const std::string& prompt = "paper-1") {
    return CacheKey::chat("prov", "model", prompt, Digest::of(text));
}

struct CapturedWarnings {
    std::vector<std::string> lines;
    log::Sink previous;
    CapturedWarnings() {
        previous = log::set_warning_sink([this](std::string_view m) { lines.emplace_back(m); });
    }
    ~CapturedWarnings() { log::set_warning_sink(std::move(previous)); }
};

}  // namespace

TEST_CASE("empty store") {
    TempDir dir;
    Store s(dir.path());
    CHECK(s.stats() == Stats{0, 0, 0, 0});
    CHECK_FALSE(s.get(chat_key("x")).has_value());
    CHECK(s.stats() == Stats{0, 0, 0, 1});
}

TEST_CASE("put then get round-trips payload and attributes") {
    TempDir dir;
    Store s(dir.path());
    const auto key = chat_key("hello");
    const auto put = s.put(key, "rewritten", {{"attempt_count", "2"}});
    CHECK(put.payload_digest == Digest::of("rewritten"));
    const auto got = s.get(key);
    REQUIRE(got.has_value());
    CHECK(got->payload == "rewritten");
    CHECK(got->created_at == put.created_at);
    CHECK(got->attributes.at("attempt_count") == "2");
    const auto st = s.stats();
    CHECK(st.entries == 1);
    CHECK(st.hit_count == 1);
    CHECK(st.miss_count == 0);
    CHECK(st.bytes == 9);
}

TEST_CASE("layout is namespace / two hex chars / key digest with a sidecar") {
    TempDir dir;
    Store s(dir.path());
    const auto key = chat_key("t");
    s.put(key, "p");
    const auto hex = key.digest().hex();
    CHECK(s.payload_path(key) == dir.path() / "chat" / hex.substr(0, 2) / hex);
    CHECK(std::filesystem::exists(s.payload_path(key)));
    CHECK(std::filesystem::exists(s.sidecar_path(key)));
    const auto ek = CacheKey::embed("prov", "model", Digest::of("t"));
    CHECK(s.payload_path(ek).parent_path().parent_path() == dir.path() / "embed");
}

TEST_CASE("key serialization is frozen") {
    const auto key = CacheKey::chat("openai", "gpt-4o", "paper-2", Digest::of("abc"));
    CHECK(key.serialize() ==
          "enrichbench-cache-key/v1\nchat\nopenai\ngpt-4o\npaper-2\n"
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad\n");
    CHECK(key.digest() == Digest::of(key.serialize()));
    const auto ek = CacheKey::embed("p", "m", Digest::of("abc"));
    CHECK(ek.prompt_id() == "-");
    CHECK(ek.serialize().find("\nembed\np\nm\n-\n") != std::string::npos);
    CHECK_THROWS_AS(CacheKey::chat("p", "m", "-", Digest::of("x")), std::invalid_argument);
    CHECK_THROWS_AS(CacheKey::chat("p", "", "x", Digest::of("x")), std::invalid_argument);
}

TEST_CASE("changing any key field changes the key; prompts never share entries") {
    std::mt19937_64 rng(17);
    auto word = [&] {
        std::string w;
        for (int i = std::uniform_int_distribution<int>(1, 6)(rng); i > 0; --i) {
            w += static_cast<char>('a' + std::uniform_int_distribution<int>(0, 3)(rng));
        }
        return w;
    };
    TempDir dir;
    Store s(dir.path());
    for (int i = 0; i < 300; ++i) {
        const auto provider = word(), model = word(), p1 = word(), p2 = word(), text = word();
        const auto a = CacheKey::chat(provider, model, p1, Digest::of(text));
        const auto b = CacheKey::chat(provider, model, p2, Digest::of(text));
        CHECK((p1 == p2) == (a.digest() == b.digest()));
        CHECK(CacheKey::chat(provider + "x", model, p1, Digest::of(text)).digest() != a.digest());
        CHECK(CacheKey::chat(provider, model + "x", p1, Digest::of(text)).digest() != a.digest());
        CHECK(CacheKey::chat(provider, model, p1, Digest::of(text + "x")).digest() != a.digest());
        CHECK(CacheKey::embed(provider, model, Digest::of(text)).digest() != a.digest());
        if (p1 != p2) {
            s.put(a, "A" + p1);
            const auto got = s.get(b);
            if (got) CHECK(got->payload == "A" + p2);
        }
    }
}

TEST_CASE("corrupted payload is treated as absent with a warning") {
    TempDir dir;
    Store s(dir.path());
    const auto key = chat_key("doc");
    s.put(key, "payload bytes");
    auto bytes = testsupport::read_file(s.payload_path(key));
    bytes[3] = static_cast<char>(bytes[3] ^ 0x01);
    testsupport::write_file(s.payload_path(key), bytes);
    CapturedWarnings warnings;
    CHECK_FALSE(s.get(key).has_value());
    REQUIRE(warnings.lines.size() == 1);
    CHECK(warnings.lines[0].find("digest mismatch") != std::string::npos);
    CHECK(s.stats().miss_count == 1);
}

TEST_CASE("malformed sidecar is treated as absent") {
    TempDir dir;
    Store s(dir.path());
    const auto key = chat_key("doc");
    s.put(key, "p");
    testsupport::write_file(s.sidecar_path(key), "{not json");
    CapturedWarnings warnings;
    CHECK_FALSE(s.get(key).has_value());
    CHECK(warnings.lines.size() == 1);
}

TEST_CASE("interrupted put leaves no visible entry") {
    TempDir dir;
    Store s(dir.path());
    const auto key = chat_key("doc");
    for (auto stage : {PutStage::temp_written, PutStage::payload_published}) {
        s.set_put_hook([stage](PutStage at) {
            if (at == stage) throw std::runtime_error("abort");
        });
        CHECK_THROWS(s.put(key, "p"));
        s.set_put_hook({});
        CHECK_FALSE(s.get(key).has_value());
        CHECK(s.stats().entries == 0);
    }
    s.put(key, "p");
    CHECK(s.get(key)->payload == "p");
}

TEST_CASE("process killed mid-put leaves no visible entry") {
    TempDir dir;
    const auto key = chat_key("doc");
    for (auto stage : {PutStage::temp_written, PutStage::payload_published}) {
        const pid_t pid = ::fork();
        REQUIRE(pid >= 0);
        if (pid == 0) {
            Store child(dir.path());
            child.set_put_hook([stage](PutStage at) {
                if (at == stage) ::_exit(7);
            });
            child.put(key, "p");
            ::_exit(0);
        }
        int status = 0;
        ::waitpid(pid, &status, 0);
        REQUIRE(WIFEXITED(status));
        CHECK(WEXITSTATUS(status) == 7);
        Store s(dir.path());
        CHECK_FALSE(s.get(key).has_value());
    }
}

TEST_CASE("concurrent identical puts leave one valid entry") {
    TempDir dir;
    Store s(dir.path());
    const auto key = chat_key("same");
    std::vector<std::jthread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&] {
            for (int i = 0; i < 20; ++i) s.put(key, "identical payload");
        });
    }
    threads.clear();
    CHECK(s.get(key)->payload == "identical payload");
    CHECK(s.stats().entries == 1);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path())) files += e.is_regular_file();
    CHECK(files == 2);
}

TEST_CASE("readers never observe partial entries during concurrent writes") {
    TempDir dir;
    Store s(dir.path());
    std::atomic<bool> stop{false};
    std::atomic<int> bad{0};
    std::jthread reader([&] {
        CapturedWarnings quiet;
        while (!stop) {
            for (int i = 0; i < 50; ++i) {
                auto e = s.get(chat_key(std::to_string(i)));
                if (e && e->payload != "value-" + std::to_string(i)) ++bad;
            }
        }
    });
    for (int round = 0; round < 5; ++round) {
        for (int i = 0; i < 50; ++i) s.put(chat_key(std::to_string(i)), "value-" + std::to_string(i));
    }
    stop = true;
    reader.join();
    CHECK(bad == 0);
}

TEST_CASE("bulk round-trip: 10^4 puts then 10^4 gets all hit") {
    TempDir dir;
    Store s(dir.path());
    constexpr int n = 10'000;
    for (int i = 0; i < n; ++i) s.put(CacheKey::embed("p", "m", Digest::of(std::to_string(i))), "v" + std::to_string(i));
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        const auto e = s.get(CacheKey::embed("p", "m", Digest::of(std::to_string(i))));
        hits += (e && e->payload == "v" + std::to_string(i));
    }
    CHECK(hits == n);
    const auto st = s.stats();
    CHECK(st.entries == n);
    CHECK(st.hit_count == n);
}

TEST_CASE("empty payload and bad root are rejected") {
    TempDir dir;
    Store s(dir.path());
    CHECK_THROWS_AS(s.put(chat_key("x"), ""), std::invalid_argument);
    testsupport::write_file(dir / "file", "x");
    CHECK_THROWS_AS(Store(dir / "file"), IoError);
    std::filesystem::remove_all(dir.path() / "chat");
    std::filesystem::remove_all(dir.path() / "embed");
    std::filesystem::remove_all(dir.path());
    CHECK_THROWS_AS(s.get(chat_key("x")), IoError);
}

TEST_CASE("vector payload is bit-exact") {
    std::vector<float> v{0.0f, -0.0f, 1.5f, -3.25e-8f, 3.4028235e38f, 1e-45f};
    const auto bytes = encode_vector_payload("model-x", v);
    CHECK(bytes.size() == 8 + 7 + 4 * v.size());
    CHECK(bytes.substr(0, 8) == std::string("\x06\x00\x00\x00\x07\x00\x00\x00", 8));
    CHECK(bytes.substr(8, 7) == "model-x");
    CHECK(bytes.substr(15, 4) == std::string("\x00\x00\x00\x00", 4));
    CHECK(bytes.substr(19, 4) == std::string("\x00\x00\x00\x80", 4));
    CHECK(bytes.substr(23, 4) == std::string("\x00\x00\xc0\x3f", 4));
    const auto back = decode_vector_payload(bytes);
    REQUIRE(back.has_value());
    CHECK(back->model_id == "model-x");
    REQUIRE(back->values.size() == v.size());
    CHECK(std::memcmp(back->values.data(), v.data(), 4 * v.size()) == 0);
    CHECK_FALSE(decode_vector_payload(bytes.substr(0, bytes.size() - 1)).has_value());
    CHECK_FALSE(decode_vector_payload("").has_value());
}

TEST_CASE("cache dir resolution: flag, then environment, then default") {
    ::unsetenv("ENRICHBENCH_CACHE");
    CHECK(resolve_cache_dir(std::nullopt) == ".enrichbench-cache");
    ::setenv("ENRICHBENCH_CACHE", "/tmp/from-env", 1);
    CHECK(resolve_cache_dir(std::nullopt) == "/tmp/from-env");
    CHECK(resolve_cache_dir(std::string("/tmp/flag")) == "/tmp/flag");
    ::unsetenv("ENRICHBENCH_CACHE");
}
