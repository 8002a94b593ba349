#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace opscore {

std::uint32_t crc32_of(std::span<const unsigned char> bytes);
std::uint32_t crc32_of(std::string_view text);

// Hex CRC32 of a file's bytes; throws IoError if unreadable.
std::string file_checksum(const std::filesystem::path& path);

std::string to_hex(std::uint32_t value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace opscore
