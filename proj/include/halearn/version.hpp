#pragma once

namespace halearn {

inline constexpr const char* kVersion = "0.1.0";

} // namespace halearn
