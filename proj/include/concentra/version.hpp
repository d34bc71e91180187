#pragma once

namespace concentra {

inline constexpr const char* kVersion = "concentra 0.1.0";

}  // namespace concentra
