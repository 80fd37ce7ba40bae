#pragma once

namespace handrig {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace handrig
