#include "tsp/utf8.hpp"

#include "tsp/error.hpp"

namespace tsp::utf8 {

namespace {

// Returns false on any malformed sequence; `out` receives the decoded code points.
bool decode_into(std::string_view s, std::u32string* out) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0;
        std::size_t len = 0;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (b & 0x3F);
        }
        static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        if (out) out->push_back(cp);
        i += len;
    }
    return true;
}

} // namespace

std::u32string decode(std::string_view bytes) {
    std::u32string out;
    out.reserve(bytes.size());
    if (!decode_into(bytes, &out)) {
        throw Error(ErrorCode::InvalidEncoding, "input is not valid UTF-8");
    }
    return out;
}

bool is_valid(std::string_view bytes) noexcept { return decode_into(bytes, nullptr); }

std::string encode(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

bool is_space(char32_t c) noexcept {
    switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x00A0: case 0x1680: case 0x2028: case 0x2029: case 0x202F: case 0x205F:
    case 0x3000: case 0xFEFF:
        return true;
    default:
        return c >= 0x2000 && c <= 0x200B;
    }
}

namespace {

bool is_punct_nonascii(char32_t c) noexcept {
    return (c >= 0x2010 && c <= 0x205E) || c == 0x00AB || c == 0x00BB || c == 0x00A7 ||
           c == 0x00B7 || c == 0x00A9 || c == 0x00AE || c == 0x2116 || (c >= 0x3001 && c <= 0x3003);
}

} // namespace

bool is_word_char(char32_t c) noexcept {
    if (c < 0x80) {
        return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
    }
    return !is_space(c) && !is_punct_nonascii(c);
}

bool is_upper(char32_t c) noexcept {
    if (c >= U'A' && c <= U'Z') return true;
    if (c >= 0x0400 && c <= 0x042F) return true;
    if (c >= 0x0460 && c <= 0x04FF) return (c % 2) == 0;
    if (c >= 0x00C0 && c <= 0x00DE) return c != 0x00D7;
    if (c >= 0x0391 && c <= 0x03A9) return true;
    return false;
}

char32_t to_lower(char32_t c) noexcept {
    if (c >= U'A' && c <= U'Z') return c + 32;
    if (c >= 0x0410 && c <= 0x042F) return c + 0x20;
    if (c >= 0x0400 && c <= 0x040F) return c + 0x50;
    if (c >= 0x0460 && c <= 0x04FF && (c % 2) == 0) return c + 1;
    if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return c + 32;
    if (c >= 0x0391 && c <= 0x03A9) return c + 32;
    return c;
}

} // namespace tsp::utf8
