#pragma once

namespace relu1d {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace relu1d
