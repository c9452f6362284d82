// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace augmincer {

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Lower-case hex SHA-256 of a file's bytes. Throws IoError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

/// First eight bytes of SHA-256(data), big-endian.
std::uint64_t hash64(std::string_view data);

}  // namespace augmincer
