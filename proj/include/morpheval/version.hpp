#pragma once

namespace morpheval {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace morpheval
