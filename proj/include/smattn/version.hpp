#pragma once

namespace smattn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace smattn
