#pragma once

// Library version recorded in run manifests so an artifact can be traced to
// the build that produced it.

namespace probmotion {

inline constexpr const char* library_version = "1.0.0";
inline constexpr int motion_format_version = 1;

}  // namespace probmotion
