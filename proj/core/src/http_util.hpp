#pragma once

#include <string>
#include <string_view>

namespace figshot::detail {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // no trailing slash, may be empty
};

ParsedUrl parse_url(std::string_view url);

/// 429 and 5xx are worth retrying.
inline bool is_transient_status(int status) { return status == 429 || status >= 500; }

}  // namespace figshot::detail
