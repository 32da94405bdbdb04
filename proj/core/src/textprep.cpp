#include "enrichbench/textprep.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cstdint>

namespace enrichbench::textprep {

namespace {

std::vector<UChar32> decode(std::string_view text) {
    std::vector<UChar32> out;
    out.reserve(text.size());
    const auto* s = reinterpret_cast<const uint8_t*>(text.data());
    const auto length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < length) {
        UChar32 c;
        U8_NEXT(s, i, length, c);
        out.push_back(c < 0 ? 0xFFFD : c);
    }
    return out;
}

void append_utf8(std::string& out, UChar32 c) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    U8_APPEND_UNSAFE(buf, n, c);
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

bool is_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

bool is_word(UChar32 c) {
    if (c == '_' || u_isalnum(c)) return true;
    const auto type = u_charType(c);
    return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
           type == U_ENCLOSING_MARK;
}

UChar32 ascii_lower(UChar32 c) { return (c >= 'A' && c <= 'Z') ? c + ('a' - 'A') : c; }

bool starts_with_ci(const std::vector<UChar32>& cps, std::size_t at, std::string_view prefix) {
    if (cps.size() - at < prefix.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
        if (ascii_lower(cps[at + k]) != static_cast<UChar32>(prefix[k])) return false;
    }
    return true;
}

// Length in code points of the noise token starting at `at`, or 0.
std::size_t noise_length(const std::vector<UChar32>& cps, std::size_t at) {
    const UChar32 c = cps[at];
    if (starts_with_ci(cps, at, "http://") || starts_with_ci(cps, at, "https://") ||
        starts_with_ci(cps, at, "www.")) {
        std::size_t end = at;
        while (end < cps.size() && !is_space(cps[end])) ++end;
        return end - at;
    }
    if (c == '#' || c == '@') {
        std::size_t end = at + 1;
        while (end < cps.size() && is_word(cps[end])) ++end;
        return end - at > 1 ? end - at : 0;
    }
    return 0;
}

std::string collapse_whitespace(const std::vector<UChar32>& cps) {
    std::string out;
    out.reserve(cps.size());
    bool pending_space = false;
    for (UChar32 c : cps) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        append_utf8(out, c);
    }
    return out;
}

void add_step(std::vector<Step>& steps, Step step) {
    if (std::find(steps.begin(), steps.end(), step) == steps.end()) steps.push_back(step);
}

}  // namespace

std::string_view step_name(Step step) noexcept {
    switch (step) {
        case Step::strip_noise: return "strip_noise";
        case Step::lowercase: return "lowercase";
    }
    return "unknown";
}

std::optional<Step> parse_step(std::string_view name) noexcept {
    if (name == "strip_noise") return Step::strip_noise;
    if (name == "lowercase") return Step::lowercase;
    return std::nullopt;
}

CleanText strip_noise(std::string_view raw) {
    const auto cps = decode(raw);
    std::vector<UChar32> kept;
    kept.reserve(cps.size());
    for (std::size_t i = 0; i < cps.size();) {
        if (const auto n = noise_length(cps, i); n > 0) {
            kept.push_back(' ');
            i += n;
        } else {
            kept.push_back(cps[i++]);
        }
    }
    return CleanText{collapse_whitespace(kept), {Step::strip_noise}};
}

std::string lowercase(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (UChar32 c : decode(text)) append_utf8(out, u_tolower(c));
    return out;
}

CleanText lowercase(CleanText text) {
    text.value = lowercase(std::string_view(text.value));
    add_step(text.applied_steps, Step::lowercase);
    return text;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (UChar32 c : decode(text)) {
        if (is_space(c)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            append_utf8(current, c);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

CleanText preprocess(std::string_view raw, const std::vector<Step>& steps) {
    const auto enabled = [&](Step s) { return std::find(steps.begin(), steps.end(), s) != steps.end(); };
    CleanText text = enabled(Step::strip_noise) ? strip_noise(raw) : CleanText{std::string(raw), {}};
    if (enabled(Step::lowercase)) text = lowercase(std::move(text));
    return text;
}

std::vector<Step> default_pair_steps() { return {Step::strip_noise, Step::lowercase}; }

std::vector<Step> default_classification_steps() { return {Step::lowercase}; }

}  // namespace enrichbench::textprep
