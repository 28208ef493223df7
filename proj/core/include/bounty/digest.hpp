#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace bounty {

// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

// Constant-time equality for secrets of possibly different lengths.
bool constant_time_equal(std::string_view a, std::string_view b);

// `bytes` bytes from the OS CSPRNG, hex encoded.
std::string random_hex(std::size_t bytes);

}  // namespace bounty
