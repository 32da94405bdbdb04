#include "enrichbench/retry.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace enrichbench {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::chrono::milliseconds RetryPolicy::delay_before_retry(int retry, std::uint64_t stream) const {
    const double base = static_cast<double>(initial_backoff.count()) *
                        std::pow(multiplier, std::max(0, retry - 1));
    const double capped = std::min(base, static_cast<double>(max_backoff.count()));
    const std::uint64_t bits =
        splitmix64(jitter_seed ^ splitmix64(stream) ^ static_cast<std::uint64_t>(retry));
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    return std::chrono::milliseconds(static_cast<std::int64_t>(capped * (0.5 + 0.5 * u)));
}

bool is_retryable_status(int status) noexcept {
    return status == 0 || status == 429 || status >= 500;
}

Sleeper real_sleeper() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

}  // namespace enrichbench
