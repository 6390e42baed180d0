#pragma once

namespace fairsplit {

// Number of workers to use for `task_count` independent tasks: hardware
// concurrency, capped by the FAIRSPLIT_THREADS environment variable (read on
// every call, never cached) and by the task count itself. Always ≥ 1.
int worker_count(int task_count);

} // namespace fairsplit
