#pragma once

namespace scloss {

inline constexpr const char* kVersion = "0.1.0";

} // namespace scloss
