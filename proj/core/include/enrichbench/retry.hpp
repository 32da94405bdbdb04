#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "enrichbench/errors.hpp"

namespace enrichbench {

// Exponential backoff with equal jitter: the k-th retry waits
// d * (0.5 + 0.5 * u) where d = min(max_backoff, initial_backoff * multiplier^(k-1))
// and u in [0,1) is drawn from a stream seeded by jitter_seed.
struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{20'000};
    double multiplier = 2.0;
    std::uint64_t jitter_seed = 0;

    std::chrono::milliseconds delay_before_retry(int retry, std::uint64_t stream) const;
};

// Transport failures (status 0), 429 and 5xx are retryable; other statuses are not.
bool is_retryable_status(int status) noexcept;

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

template <typename T>
struct RetryOutcome {
    std::optional<T> value;
    std::optional<ProviderError> error;  // set iff value is empty
    int attempts = 0;
};

// Calls op() until it returns, throws a non-retryable ProviderError, or the
// retry budget is spent. Errors other than ProviderError propagate.
// `stream` decorrelates jitter between concurrent callers.
template <typename T, typename Op>
RetryOutcome<T> call_with_retries(const RetryPolicy& policy, const Sleeper& sleep,
                                  std::uint64_t stream, Op&& op) {
    RetryOutcome<T> outcome;
    for (int attempt = 1;; ++attempt) {
        outcome.attempts = attempt;
        try {
            outcome.value.emplace(op());
            outcome.error.reset();
            return outcome;
        } catch (const ProviderError& e) {
            outcome.error.emplace(e);
            if (!e.retryable() || attempt > policy.max_retries) return outcome;
        }
        if (sleep) sleep(policy.delay_before_retry(attempt, stream));
    }
}

}  // namespace enrichbench
