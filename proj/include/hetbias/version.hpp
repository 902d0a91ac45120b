#pragma once

namespace hetbias {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hetbias
