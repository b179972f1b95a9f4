#pragma once

namespace stormnet {

inline constexpr const char* kToolName = "stormnet";
inline constexpr const char* kVersion = "1.0.0";

} // namespace stormnet
