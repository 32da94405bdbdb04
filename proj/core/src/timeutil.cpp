#include "enrichbench/timeutil.hpp"

#include <ctime>

namespace enrichbench {

std::string format_utc(SystemTime t) {
    const std::time_t secs = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string utc_now() { return format_utc(std::chrono::system_clock::now()); }

}  // namespace enrichbench
