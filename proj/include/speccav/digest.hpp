#pragma once

#include <string>
#include <string_view>

namespace speccav {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(std::string const& path);

}  // namespace speccav
