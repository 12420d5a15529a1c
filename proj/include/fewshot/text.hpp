#pragma once

#include <string>
#include <string_view>

namespace fewshot::text {

/// Unicode NFC normalization of a UTF-8 string. Throws fewshot::Error on
/// invalid UTF-8.
std::string nfc(std::string_view utf8);

/// Strips leading/trailing ASCII and Unicode whitespace.
std::string trim(std::string_view utf8);

/// Canonical label form: NFC, then trimmed. Comparison stays case-sensitive.
std::string canonical_label(std::string_view utf8);

/// Lowercases ASCII letters only.
std::string ascii_lower(std::string_view s);

/// Number of Unicode code points. Mention spans are code-point offsets.
std::size_t codepoint_length(std::string_view utf8);

/// Byte offset of code point `index` (index == length gives the end).
std::size_t byte_offset(std::string_view utf8, std::size_t index);

}  // namespace fewshot::text
