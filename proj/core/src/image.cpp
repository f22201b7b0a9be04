#include "figshot/image.hpp"

#include <algorithm>
#include <cctype>

#include <openssl/evp.h>

#include "figshot/jsonl.hpp"
#include "http_util.hpp"

namespace figshot {

std::string base64_encode(std::string_view bytes) {
  if (bytes.empty()) return {};
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                      reinterpret_cast<const unsigned char*>(bytes.data()),
                                      static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(written));
  return out;
}

std::string image_mime_type(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  return "image/png";
}

std::string read_image_base64(const std::filesystem::path& path) {
  return base64_encode(jsonl::read_text(path));
}

namespace detail {

ParsedUrl parse_url(std::string_view url) {
  ParsedUrl out;
  const auto scheme_end = url.find("://");
  const auto host_start = scheme_end == std::string_view::npos ? 0 : scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  if (path_start == std::string_view::npos) {
    out.origin = std::string(url);
  } else {
    out.origin = std::string(url.substr(0, path_start));
    out.path = std::string(url.substr(path_start));
    while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  }
  return out;
}

}  // namespace detail
}  // namespace figshot
