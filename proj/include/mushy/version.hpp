#pragma once

namespace mushy {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mushy
