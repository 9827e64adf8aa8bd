#pragma once

namespace raterboot {

constexpr const char* kVersion = "0.1.0";

#ifdef RATERBOOT_BUILD_HASH
constexpr const char* kBuildHash = RATERBOOT_BUILD_HASH;
#else
constexpr const char* kBuildHash = "dev";
#endif

} // namespace raterboot
