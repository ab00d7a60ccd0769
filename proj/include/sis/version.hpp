#pragma once

namespace sis {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sis
