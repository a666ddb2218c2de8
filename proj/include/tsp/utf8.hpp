#pragma once

#include <string>
#include <string_view>

namespace tsp::utf8 {

/// Decodes UTF-8 into code points. Throws Error(InvalidEncoding) on malformed input,
/// including overlong forms and surrogates.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view cps);

bool is_valid(std::string_view bytes) noexcept;

bool is_space(char32_t c) noexcept;

/// Letters and digits across Latin, Cyrillic and the rest of the non-ASCII plane. Anything
/// non-ASCII that is not a known space or punctuation code point counts as a word character.
bool is_word_char(char32_t c) noexcept;

bool is_upper(char32_t c) noexcept;

char32_t to_lower(char32_t c) noexcept;

} // namespace tsp::utf8
