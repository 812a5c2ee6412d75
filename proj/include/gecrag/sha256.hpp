#pragma once

#include <string>
#include <string_view>

namespace gecrag {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);

} // namespace gecrag
