#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Deterministic corpus cleanup applied before enrichment and embedding.
//
// Canonical step order is [strip_noise, lowercase]. Every function here is
// pure and safe to call concurrently. Input is UTF-8; invalid sequences are
// replaced with U+FFFD.
namespace enrichbench::textprep {

enum class Step { strip_noise, lowercase };

std::string_view step_name(Step step) noexcept;
std::optional<Step> parse_step(std::string_view name) noexcept;

struct CleanText {
    std::string value;
    std::vector<Step> applied_steps;  // subsequence of the canonical order

    bool operator==(const CleanText&) const = default;
};

// Removes URLs (http://, https://, or www. up to the next whitespace),
// hashtags (# + word chars) and mentions (@ + word chars). Each removed token
// becomes a space; whitespace runs are then collapsed to one ASCII space and
// the result is trimmed.
CleanText strip_noise(std::string_view raw);

// Unicode simple lowercase mapping, one code point at a time. Records the
// step once; calling it again is a no-op on both value and steps.
CleanText lowercase(CleanText text);
std::string lowercase(std::string_view text);

// Splits on runs of Unicode whitespace. Never yields empty tokens.
std::vector<std::string> tokenize(std::string_view text);

// Applies the enabled steps in canonical order. An empty step list yields
// the input unchanged with no applied steps.
CleanText preprocess(std::string_view raw, const std::vector<Step>& steps);

// Step list defaults per dataset task shape.
std::vector<Step> default_pair_steps();
std::vector<Step> default_classification_steps();

}  // namespace enrichbench::textprep
