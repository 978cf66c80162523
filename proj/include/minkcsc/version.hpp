#pragma once

namespace minkcsc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace minkcsc
