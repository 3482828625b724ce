#pragma once

namespace mgstab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mgstab
