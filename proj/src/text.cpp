#include "proverb/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "proverb/error.hpp"

namespace proverb::text {

namespace {

icu::UnicodeString from_utf8(std::string_view utf8) {
    if (!is_valid_utf8(utf8)) {
        throw Error(ErrorCode::MalformedRecord, "invalid UTF-8 text");
    }
    return icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
}

std::string as_utf8(const icu::UnicodeString& s) {
    std::string out;
    s.toUTF8String(out);
    return out;
}

}  // namespace

bool is_valid_utf8(std::string_view s) noexcept {
    const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
    const auto length = static_cast<int32_t>(s.size());
    int32_t i = 0;
    while (i < length) {
        UChar32 c = 0;
        U8_NEXT(bytes, i, length, c);
        if (c < 0) return false;
    }
    return true;
}

std::string nfc(std::string_view utf8) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) {
        throw Error(ErrorCode::IoError, std::string("ICU NFC unavailable: ") + u_errorName(status));
    }
    const icu::UnicodeString src = from_utf8(utf8);
    icu::UnicodeString dst = normalizer->normalize(src, status);
    if (U_FAILURE(status)) {
        throw Error(ErrorCode::MalformedRecord, std::string("NFC normalization failed: ") + u_errorName(status));
    }
    return as_utf8(dst);
}

std::string_view trim(std::string_view s) noexcept {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::vector<std::string> code_points(std::string_view utf8) {
    if (!is_valid_utf8(utf8)) {
        throw Error(ErrorCode::MalformedRecord, "invalid UTF-8 text");
    }
    std::vector<std::string> out;
    const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
    const auto length = static_cast<int32_t>(utf8.size());
    int32_t i = 0;
    while (i < length) {
        const int32_t start = i;
        UChar32 c = 0;
        U8_NEXT(bytes, i, length, c);
        out.emplace_back(utf8.substr(static_cast<size_t>(start), static_cast<size_t>(i - start)));
    }
    return out;
}

std::string lower(std::string_view utf8) {
    icu::UnicodeString s = from_utf8(utf8);
    s.toLower(icu::Locale::getRoot());
    return as_utf8(s);
}

bool is_punctuation(char32_t cp) noexcept {
    return u_ispunct(static_cast<UChar32>(cp)) != 0;
}

bool is_whitespace(char32_t cp) noexcept {
    return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0;
}

std::u32string to_u32(std::string_view utf8) {
    if (!is_valid_utf8(utf8)) {
        throw Error(ErrorCode::MalformedRecord, "invalid UTF-8 text");
    }
    std::u32string out;
    const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
    const auto length = static_cast<int32_t>(utf8.size());
    int32_t i = 0;
    while (i < length) {
        UChar32 c = 0;
        U8_NEXT(bytes, i, length, c);
        out.push_back(static_cast<char32_t>(c));
    }
    return out;
}

std::string to_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) {
        uint8_t buf[U8_MAX_LENGTH];
        int32_t n = 0;
        UBool error = false;
        U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
        if (error) continue;
        out.append(reinterpret_cast<const char*>(buf), static_cast<size_t>(n));
    }
    return out;
}

}  // namespace proverb::text
