#include "biasscope/version.hpp"

namespace biasscope {

std::string_view library_version() noexcept { return BIASSCOPE_VERSION; }

}  // namespace biasscope
