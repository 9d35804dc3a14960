#pragma once

namespace gaugekit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gaugekit
