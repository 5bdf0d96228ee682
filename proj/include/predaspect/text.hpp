#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace predaspect::text {

// Lowercases ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic letters.
// Other code points (and invalid byte sequences) pass through unchanged, so
// the mapping is locale independent.
std::string to_lower(std::string_view s);

bool is_valid_utf8(std::string_view s);

// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string replace_invalid_utf8(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// Splits on runs of ASCII whitespace, dropping empty fields.
std::vector<std::string> split_whitespace(std::string_view s);

std::string_view trim(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Percent-escapes '%', ':', ';', tab, CR and LF so that a field can be
// embedded in the colon/semicolon separated contributor records.
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

}  // namespace predaspect::text
