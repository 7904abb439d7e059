#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 text utilities backed by ICU.
namespace proverb::text {

// NFC-normalizes UTF-8 input. Invalid UTF-8 throws Error(MalformedRecord).
std::string nfc(std::string_view utf8);

std::string_view trim(std::string_view s) noexcept;

// Splits UTF-8 into code points, each returned as its UTF-8 byte sequence.
std::vector<std::string> code_points(std::string_view utf8);

// Full Unicode lowercase mapping (root locale).
std::string lower(std::string_view utf8);

bool is_punctuation(char32_t cp) noexcept;
bool is_whitespace(char32_t cp) noexcept;

std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view s);

bool is_valid_utf8(std::string_view s) noexcept;

}  // namespace proverb::text
