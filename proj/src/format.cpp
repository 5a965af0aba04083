#include "speccav/format.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace speccav {

std::string format_shortest(double x)
{
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

std::string format_g17(double x)
{
    std::array<char, 64> buf{};
    int len = std::snprintf(buf.data(), buf.size(), "%.17g", x);
    return std::string(buf.data(), static_cast<std::size_t>(len));
}

}  // namespace speccav
