#include "cli.hpp"

#include <doctest.h>
#include <json.hpp>
#include <support.hpp>

#include <sstream>

using namespace enrichbench;
using testsupport::data_dir;
using testsupport::read_file;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "enrichbench");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"frobnicate"}).code == cli::kUsage);
    CHECK(run({"preprocess"}).code == cli::kUsage);
    CHECK(run({"enrich", "--in", "x", "--fallback", "sometimes"}).code == cli::kUsage);
    const auto help = run({"--help"});
    CHECK(help.code == cli::kOk);
    CHECK(help.out.find("preprocess") != std::string::npos);
}

TEST_CASE("preprocess") {
    TempDir dir;
    write_file(dir / "in.jsonl",
               "{\"id\": 1, \"text\": \"Loved it https://t.co/abc #happy @support THANKS\", \"label\": \"pos\"}\n"
               "{\"id\": \"b\", \"text\": \"plain\"}\n");
    const auto r = run({"preprocess", "--in", (dir / "in.jsonl").string()});
    CHECK(r.code == cli::kOk);
    CHECK(r.out ==
          "{\"id\":\"1\",\"text\":\"loved it thanks\",\"label\":\"pos\",\"applied_steps\":[\"strip_noise\",\"lowercase\"]}\n"
          "{\"id\":\"b\",\"text\":\"plain\",\"applied_steps\":[\"strip_noise\",\"lowercase\"]}\n");
    CHECK(r.err.find("strip_noise: 1 changed") != std::string::npos);
    CHECK(r.err.find("lowercase: 1 changed") != std::string::npos);

    const auto only_lower = run({"preprocess", "--in", (dir / "in.jsonl").string(), "--steps", "lowercase",
                                 "--out", (dir / "out.jsonl").string()});
    CHECK(only_lower.code == cli::kOk);
    CHECK(only_lower.out.empty());
    CHECK(read_file(dir / "out.jsonl").find("https://t.co/abc #happy @support thanks") != std::string::npos);

    CHECK(run({"preprocess", "--in", (dir / "in.jsonl").string(), "--steps", "stem"}).code == cli::kUsage);
}

TEST_CASE("preprocess edge cases") {
    TempDir dir;
    CHECK(run({"preprocess", "--in", (dir / "missing.jsonl").string()}).code == cli::kUsage);
    write_file(dir / "empty.jsonl", "");
    const auto empty = run({"preprocess", "--in", (dir / "empty.jsonl").string(), "--out", (dir / "o.jsonl").string()});
    CHECK(empty.code == cli::kOk);
    CHECK(read_file(dir / "o.jsonl").empty());
    write_file(dir / "bad.jsonl", "{\"id\": 1, \"text\": \"x\"}\n{nope\n");
    const auto bad = run({"preprocess", "--in", (dir / "bad.jsonl").string()});
    CHECK(bad.code == cli::kUsage);
    CHECK(bad.err.find("line 2") != std::string::npos);
}

TEST_CASE("enrich with the identity provider echoes inputs and is byte-identical when warm") {
    TempDir dir;
    write_file(dir / "docs.jsonl", "{\"id\": 1, \"text\": \"card declined\"}\n{\"id\": 2, \"text\": \"atm pin\"}\n");
    const std::vector<std::string> base{"enrich", "--in", (dir / "docs.jsonl").string(), "--prompt", "paper-1",
                                        "--cache-dir", (dir / "cache").string()};
    auto first = base;
    first.insert(first.end(), {"--out", (dir / "e1.jsonl").string()});
    auto second = base;
    second.insert(second.end(), {"--out", (dir / "e2.jsonl").string()});
    REQUIRE(run(first).code == cli::kOk);
    const auto warm = run(second);
    REQUIRE(warm.code == cli::kOk);
    CHECK(warm.err.find("0 provider calls") != std::string::npos);
    CHECK(read_file(dir / "e1.jsonl") == read_file(dir / "e2.jsonl"));
    std::istringstream lines(read_file(dir / "e1.jsonl"));
    std::string line;
    std::vector<std::string> texts;
    while (std::getline(lines, line)) {
        const auto r = record_from_json(line);
        CHECK(r.enriched == r.original.value);
        CHECK_FALSE(r.fallback_used);
        texts.push_back(r.enriched);
    }
    CHECK(texts == std::vector<std::string>{"card declined", "atm pin"});
}

TEST_CASE("enrich exit codes") {
    TempDir dir;
    write_file(dir / "docs.jsonl", "{\"id\": 1, \"text\": \"x\"}\n");
    const auto in = (dir / "docs.jsonl").string();
    const auto cache = (dir / "cache").string();
    CHECK(run({"enrich", "--in", in, "--prompt", "paper-9", "--cache-dir", cache}).code == cli::kUsage);
    CHECK(run({"enrich", "--in", in, "--cache-dir", cache}).code == cli::kUsage);

    write_file(dir / "fault.json",
               R"({"provider_id": "f", "kind": "fault", "fault_schedule": ["400"], "max_retries": 0})");
    const auto failing = run({"enrich", "--in", in, "--prompt", "paper-2", "--cache-dir", cache, "--provider-config",
                              (dir / "fault.json").string(), "--fallback", "fail"});
    CHECK(failing.code == cli::kProvider);
    const auto passthrough = run({"enrich", "--in", in, "--prompt", "paper-2", "--cache-dir", cache,
                                  "--provider-config", (dir / "fault.json").string()});
    CHECK(passthrough.code == cli::kOk);
    CHECK(passthrough.out.find("\"fallback_used\":true") != std::string::npos);

    write_file(dir / "http.json", R"({"kind": "openai-compatible", "endpoint": "http://127.0.0.1:9/v1/chat/completions",
                                      "auth_ref": "ENRICHBENCH_CLI_TEST_UNSET"})");
    ::unsetenv("ENRICHBENCH_CLI_TEST_UNSET");
    CHECK(run({"enrich", "--in", in, "--prompt", "paper-1", "--cache-dir", cache, "--provider-config",
               (dir / "http.json").string()})
              .code == cli::kUsage);
}

TEST_CASE("enrich with a user prompt file") {
    TempDir dir;
    write_file(dir / "docs.jsonl", "{\"id\": 1, \"text\": \"x\"}\n");
    write_file(dir / "p.json", R"({"id": "custom", "system_text": "Say it better."})");
    const auto r = run({"enrich", "--in", (dir / "docs.jsonl").string(), "--prompt-file", (dir / "p.json").string(),
                        "--cache-dir", (dir / "cache").string()});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("\"prompt_id\":\"custom\"") != std::string::npos);
}

TEST_CASE("embed writes one vector per document") {
    TempDir dir;
    write_file(dir / "docs.jsonl", "{\"id\": 1, \"text\": \"a b c\"}\n{\"id\": 2, \"text\": \"a b d\"}\n");
    write_file(dir / "mock.json", R"({"kind": "mock", "dim": 16})");
    const auto r = run({"embed", "--in", (dir / "docs.jsonl").string(), "--provider-config",
                        (dir / "mock.json").string(), "--cache-dir", (dir / "cache").string(), "--seed", "5"});
    REQUIRE(r.code == cli::kOk);
    std::istringstream lines(r.out);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j["dim"] == 16);
        CHECK(j["values"].size() == 16);
        CHECK(j["model_id"] == "hash-d16-s5");
        ++n;
    }
    CHECK(n == 2);
}

TEST_CASE("eval end to end with mock providers") {
    TempDir dir;
    write_file(dir / "exp.json", R"({
        "datasets": [{"name": "syn", "task": "pair", "synthetic": {"n_pos": 20, "n_neg": 20, "seed": 7}},
                     {"name": "cls", "task": "classification", "path": ")" +
                                     (data_dir() / "classification.jsonl").string() + R"("}],
        "variants": ["baseline", "paper-1", "paper-4"],
        "chat_provider": {"kind": "rulebook"},
        "embed_provider": {"kind": "mock", "dim": 128, "seed": 42},
        "references": [{"label": "TE", "scores": {"syn": 77.13}}]
    })");
    const std::vector<std::string> args{"eval", "--config", (dir / "exp.json").string(), "--cache-dir",
                                        (dir / "cache").string(), "--out", (dir / "out").string()};
    const auto r = run(args);
    CHECK(r.code == cli::kOk);
    const auto table = read_file(dir / "out/results.json");
    const auto md = read_file(dir / "out/report.md");
    const auto csv = read_file(dir / "out/report.csv");
    CHECK(md.starts_with("| Model | syn | cls |\n"));
    CHECK(md.find("| Improvement |") != std::string::npos);
    CHECK(md.find("| TE | 77.13 | n/a |") != std::string::npos);
    CHECK(count_lines(md) == 2 + 3 + 1 + 1);
    CHECK(read_file(dir / "out/run.json").find("\"config_digest\"") != std::string::npos);

    // Warm rerun: byte-identical outputs, no provider calls.
    const auto again = run(args);
    CHECK(again.code == cli::kOk);
    CHECK(again.err.find("0 chat calls, 0 embedding calls") != std::string::npos);
    CHECK(read_file(dir / "out/results.json") == table);
    CHECK(read_file(dir / "out/report.md") == md);
    CHECK(read_file(dir / "out/report.csv") == csv);

    const auto rep = run({"report", "--results", (dir / "out/results.json").string()});
    CHECK(rep.code == cli::kOk);
    CHECK(rep.out == md);
    const auto rep_csv = run({"report", "--results", (dir / "out/report.csv").string(), "--format", "csv"});
    CHECK(rep_csv.out == csv);
}

TEST_CASE("eval prints markdown to stdout without output paths") {
    TempDir dir;
    write_file(dir / "exp.json", R"({"datasets": [{"name": "syn", "synthetic": {"n_pos": 5, "n_neg": 5, "seed": 1}}],
                                     "variants": ["baseline"]})");
    const auto r = run({"eval", "--config", (dir / "exp.json").string(), "--cache-dir", (dir / "c").string()});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.starts_with("| Model | syn |\n| --- | --- |\n| baseline | "));
    CHECK(r.out.find("Improvement") == std::string::npos);
}

TEST_CASE("eval exit codes") {
    TempDir dir;
    write_file(dir / "absent.json", R"({"datasets": [{"name": "x", "path": "nope.jsonl"}]})");
    CHECK(run({"eval", "--config", (dir / "absent.json").string(), "--cache-dir", (dir / "c").string()}).code ==
          cli::kUsage);
    CHECK(run({"eval", "--config", (dir / "missing.json").string()}).code == cli::kUsage);

    write_file(dir / "partial.json", R"({
        "datasets": [{"name": "syn", "synthetic": {"n_pos": 5, "n_neg": 5, "seed": 1}}],
        "variants": ["baseline", "paper-1"],
        "fallback": "fail",
        "chat_provider": {"kind": "fault", "fault_schedule": ["401"], "max_retries": 0, "max_in_flight": 1},
        "output": {"table_json": "out/results.json"}
    })");
    const auto partial = run({"eval", "--config", (dir / "partial.json").string(), "--cache-dir", (dir / "c").string()});
    CHECK(partial.code == cli::kPartial);
    const auto table = nlohmann::json::parse(read_file(dir / "out/results.json"));
    CHECK(table["rows"].size() == 2);
    CHECK(table["rows"][1]["status"] == "failed");
}

TEST_CASE("report and prompts") {
    TempDir dir;
    CHECK(run({"report", "--results", (dir / "none.json").string()}).code == cli::kUsage);
    const auto list = run({"prompts"});
    CHECK(list.code == cli::kOk);
    CHECK(count_lines(list.out) == 4);
    CHECK(list.out.starts_with("paper-1\t"));
    const auto show = run({"prompts", "--show", "paper-3"});
    CHECK(show.out == builtin_prompts()[2].system_text + "\n");
    CHECK(run({"prompts", "--show", "nope"}).code == cli::kUsage);
}
