#pragma once

#include <string_view>

namespace genforge {

/// Library version, "major.minor.patch".
std::string_view version() noexcept;

}  // namespace genforge
