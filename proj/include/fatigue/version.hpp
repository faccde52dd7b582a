#pragma once

namespace fatigue {

inline constexpr const char* kToolName = "fatigue-ann";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace fatigue
