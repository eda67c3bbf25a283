#pragma once

namespace speckle {

inline constexpr const char* kVersion = "1.0.0";

}
