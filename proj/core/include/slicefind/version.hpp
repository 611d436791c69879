#ifndef SLICEFIND_VERSION_HPP
#define SLICEFIND_VERSION_HPP

namespace slicefind {

inline constexpr const char* kVersion = "0.1.0";

} // namespace slicefind

#endif
