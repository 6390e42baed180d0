#include "fairsplit/threads.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <thread>

namespace fairsplit {

int worker_count(int task_count) {
    if (task_count < 1) return 1;
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (const char* env = std::getenv("FAIRSPLIT_THREADS")) {
        int cap = 0;
        auto [end, ec] = std::from_chars(env, env + std::strlen(env), cap);
        if (ec == std::errc() && *end == '\0' && cap >= 1 && cap < workers) {
            workers = cap;
        }
    }
    return workers < task_count ? workers : task_count;
}

} // namespace fairsplit
