#pragma once

namespace rspnet {

inline constexpr const char* version = "0.1.0";

}
