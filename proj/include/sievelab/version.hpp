#pragma once

namespace sievelab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sievelab
