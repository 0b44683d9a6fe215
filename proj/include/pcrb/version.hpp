#pragma once

namespace pcrb {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pcrb
