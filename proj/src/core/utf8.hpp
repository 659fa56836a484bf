#pragma once

#include <string>
#include <string_view>

namespace poetopics::utf8 {

// Invalid byte sequences decode to U+FFFD, one per offending byte.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

char32_t to_lower(char32_t cp) noexcept;
bool is_space(char32_t cp) noexcept;
/// Letters and digits. Everything else counts as punctuation or symbol.
bool is_word_char(char32_t cp) noexcept;

std::string to_lower(std::string_view text);

}  // namespace poetopics::utf8
