#pragma once

namespace rankmed {

inline constexpr const char* kToolName = "rankmed";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace rankmed
