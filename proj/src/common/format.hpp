#pragma once

#include <string>

namespace gfomlb {

// Shortest decimal string that round-trips to the same double; "inf", "-inf", "nan" otherwise.
std::string format_double(double x);

// Parses a double, accepting the "inf" literal. Throws ConfigError on junk.
double parse_double(const std::string& text);

// Git-style blob hash (SHA-1 over "blob <len>\0<content>"), lowercase hex.
std::string content_hash(const std::string& content);

}  // namespace gfomlb
