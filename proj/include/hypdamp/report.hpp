#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace hypdamp {

// FNV-1a, used for the reproducibility stamp.
std::uint64_t fnv1a64(const std::string& data);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

extern const char* kVersion;

}  // namespace hypdamp
