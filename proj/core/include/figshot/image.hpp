#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace figshot {

std::string base64_encode(std::string_view bytes);

/// MIME type guessed from the file extension; falls back to image/png.
std::string image_mime_type(const std::filesystem::path& path);

/// Reads the file and returns its base64 encoding. Throws if unreadable.
std::string read_image_base64(const std::filesystem::path& path);

}  // namespace figshot
