#pragma once

#include <string>
#include <string_view>

namespace provpipe {

/// Lowercase hex SHA-256 digest of the bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace provpipe
