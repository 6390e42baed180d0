#pragma once

namespace fairsplit {

inline constexpr const char* kVersion = "0.1.0";

} // namespace fairsplit
