#pragma once

namespace scaffold {

inline constexpr const char* kToolName = "scaffold";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace scaffold
