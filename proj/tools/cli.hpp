#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "enrichbench/enrich.hpp"
#include "enrichbench/textprep.hpp"

namespace enrichbench::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;
inline constexpr int kUsage = 2;
inline constexpr int kProvider = 3;
inline constexpr int kPartial = 4;

struct PreprocessArgs {
    std::filesystem::path in;
    std::optional<std::filesystem::path> out;
    std::vector<textprep::Step> steps = textprep::default_pair_steps();
};

struct EnrichArgs {
    std::filesystem::path in;
    std::string prompt_id;
    std::optional<std::filesystem::path> prompt_file;
    std::optional<std::filesystem::path> provider_config;  // identity provider when absent
    std::optional<std::string> cache_dir;
    std::optional<std::filesystem::path> out;
    std::optional<FallbackPolicy> fallback;
    std::optional<int> max_in_flight;
    std::optional<std::uint64_t> seed;
};

struct EmbedArgs {
    std::filesystem::path in;
    std::optional<std::filesystem::path> provider_config;  // mock embedder when absent
    std::optional<std::string> cache_dir;
    std::optional<std::filesystem::path> out;
    std::optional<int> max_in_flight;
    std::optional<std::uint64_t> seed;
};

struct EvalArgs {
    std::filesystem::path config;
    std::optional<std::string> cache_dir;
    std::optional<std::filesystem::path> out;  // output directory
    std::optional<FallbackPolicy> fallback;
    std::optional<int> max_in_flight;
    std::optional<std::uint64_t> seed;
};

struct ReportArgs {
    std::filesystem::path results;
    std::string format = "markdown";
    std::optional<std::filesystem::path> out;
};

int cmd_preprocess(const PreprocessArgs& args, std::ostream& out, std::ostream& err);
int cmd_enrich(const EnrichArgs& args, std::ostream& out, std::ostream& err);
int cmd_embed(const EmbedArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err);
int cmd_prompts(const std::optional<std::string>& show, std::ostream& out, std::ostream& err);

// Parses argv and dispatches; warnings are routed to `err` for the duration.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace enrichbench::cli
