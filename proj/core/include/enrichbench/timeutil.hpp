#pragma once

#include <chrono>
#include <string>

namespace enrichbench {

using SystemTime = std::chrono::system_clock::time_point;

// RFC 3339 UTC with second precision, e.g. "2026-10-16T14:00:00Z".
std::string format_utc(SystemTime t);
std::string utc_now();

}  // namespace enrichbench
