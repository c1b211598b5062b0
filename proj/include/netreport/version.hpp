#pragma once

namespace netreport {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace netreport
