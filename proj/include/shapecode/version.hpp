#pragma once

namespace shapecode {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace shapecode
