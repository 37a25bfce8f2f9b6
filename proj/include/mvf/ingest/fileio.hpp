#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mvf::ingest {

// Whole-file helpers that raise IoError instead of returning stream state.
std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const void* data, std::size_t size);
void write_file_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mvf::ingest
