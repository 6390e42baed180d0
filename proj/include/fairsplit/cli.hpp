#pragma once

namespace fairsplit {

// Runs the command-line front-end. Returns the process exit code:
// 0 on success, 1 on validation/data errors, 2 on usage errors.
int run(int argc, const char* const* argv);

} // namespace fairsplit
