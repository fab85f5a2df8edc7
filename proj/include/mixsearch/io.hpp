#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace mixsearch::io {

// Writes to `path.tmp` and renames over `path`. Throws Error(Io).
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

// Throws Error(Io) naming the path if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::uint64_t file_digest(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

}  // namespace mixsearch::io
