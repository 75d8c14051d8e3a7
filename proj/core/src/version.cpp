#include "genforge/version.hpp"

namespace genforge {

std::string_view version() noexcept { return GENFORGE_VERSION_STRING; }

}  // namespace genforge
