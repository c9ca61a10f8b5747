#pragma once

#include <string_view>

namespace biasscope {

std::string_view library_version() noexcept;

}  // namespace biasscope
