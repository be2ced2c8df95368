#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lfqa::text {

/// Decodes UTF-8 into code points. Ill-formed sequences become U+FFFD.
std::u32string decode_utf8(std::string_view utf8);
std::string encode_utf8(std::u32string_view codepoints);
void append_utf8(std::string& out, char32_t cp);

/// Canonical composition (NFC).
std::string nfc(std::string_view utf8);

bool is_space(char32_t cp);
bool is_control(char32_t cp);
/// Unicode general categories P* and S*.
bool is_punct_or_symbol(char32_t cp);
char32_t to_lower(char32_t cp);

/// Splits on Unicode white space; empty fields are dropped.
std::vector<std::string> split_whitespace(std::string_view utf8);
std::size_t count_whitespace_tokens(std::string_view utf8);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace lfqa::text
