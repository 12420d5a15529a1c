#include "fewshot/text.hpp"

#include "fewshot/error.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace fewshot::text {

namespace {

bool valid_utf8(std::string_view s) {
    std::int32_t i = 0;
    const auto n = static_cast<std::int32_t>(s.size());
    const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
    while (i < n) {
        UChar32 c;
        U8_NEXT(p, i, n, c);
        if (c < 0) return false;
    }
    return true;
}

}  // namespace

std::string nfc(std::string_view utf8) {
    if (!valid_utf8(utf8)) throw Error("invalid_utf8", "string is not valid UTF-8");
    bool ascii = true;
    for (unsigned char c : utf8) {
        if (c >= 0x80) {
            ascii = false;
            break;
        }
    }
    if (ascii) return std::string(utf8);

    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw Error("unicode_error", "ICU NFC normalizer unavailable");
    const auto src = icu::UnicodeString::fromUTF8(
        icu::StringPiece(utf8.data(), static_cast<std::int32_t>(utf8.size())));
    icu::UnicodeString dst = norm->normalize(src, status);
    if (U_FAILURE(status)) throw Error("unicode_error", "NFC normalization failed");
    std::string out;
    dst.toUTF8String(out);
    return out;
}

std::string trim(std::string_view utf8) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(utf8.data());
    const auto n = static_cast<std::int32_t>(utf8.size());
    std::int32_t begin = 0;
    while (begin < n) {
        std::int32_t next = begin;
        UChar32 c;
        U8_NEXT(p, next, n, c);
        if (c < 0 || !u_isUWhiteSpace(c)) break;
        begin = next;
    }
    std::int32_t end = n;
    while (end > begin) {
        std::int32_t prev = end;
        UChar32 c;
        U8_PREV(p, 0, prev, c);
        if (c < 0 || !u_isUWhiteSpace(c)) break;
        end = prev;
    }
    return std::string(utf8.substr(begin, end - begin));
}

std::string canonical_label(std::string_view utf8) { return trim(nfc(utf8)); }

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::size_t codepoint_length(std::string_view utf8) {
    std::size_t count = 0;
    for (unsigned char c : utf8) {
        if ((c & 0xC0) != 0x80) ++count;
    }
    return count;
}

std::size_t byte_offset(std::string_view utf8, std::size_t index) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < utf8.size(); ++i) {
        if ((static_cast<unsigned char>(utf8[i]) & 0xC0) != 0x80) {
            if (seen == index) return i;
            ++seen;
        }
    }
    return utf8.size();
}

}  // namespace fewshot::text
