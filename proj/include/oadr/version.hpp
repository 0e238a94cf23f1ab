#pragma once

namespace oadr {
inline constexpr const char* kVersion = "0.1.0";
}
