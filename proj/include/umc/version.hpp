#pragma once

namespace umc {

inline constexpr const char* kToolName = "umc";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace umc
