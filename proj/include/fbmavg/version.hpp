#pragma once

namespace fbmavg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fbmavg
