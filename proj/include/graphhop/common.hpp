#pragma once
// Shared low-level utilities: error taxonomy, FNV-1a hashing, SplitMix64,
// string normalization and UTF-8-aware word splitting.

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace graphhop {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad bytes on the way in (malformed JSONL, bad config files).
class ParseError : public Error {
public:
    using Error::Error;
};

// Well-formed input that violates a data contract (duplicate ids, bad spans).
class ValidationError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class GatewayError : public Error {
public:
    GatewayError(const std::string& msg, bool retriable = false)
        : Error(msg), retriable_(retriable) {}
    bool retriable() const { return retriable_; }

private:
    bool retriable_;
};

// FNV-1a, 64-bit, standard offset basis and prime.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

inline std::string digest(std::string_view bytes) {
    return hex64(fnv1a64(bytes));
}

// SplitMix64 (Vigna). The single seeded generator used anywhere this project
// needs reproducible randomness.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Modulo bias is irrelevant at the n used here.
    std::uint64_t next_below(std::uint64_t n) { return next() % n; }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

struct DecodedCodepoint {
    char32_t cp;
    int len;
};

// Permissive UTF-8 decode: invalid sequences fall back to a single byte.
inline DecodedCodepoint utf8_decode(std::string_view s, std::size_t i) {
    unsigned char c0 = static_cast<unsigned char>(s[i]);
    if (c0 < 0x80) return {c0, 1};
    auto cont = [&](std::size_t k) {
        return i + k < s.size() &&
               (static_cast<unsigned char>(s[i + k]) & 0xc0) == 0x80;
    };
    auto cb = [&](std::size_t k) {
        return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3f);
    };
    if ((c0 & 0xe0) == 0xc0 && cont(1))
        return {static_cast<char32_t>((c0 & 0x1f) << 6) | cb(1), 2};
    if ((c0 & 0xf0) == 0xe0 && cont(1) && cont(2))
        return {static_cast<char32_t>((c0 & 0x0f) << 12) | (cb(1) << 6) | cb(2), 3};
    if ((c0 & 0xf8) == 0xf0 && cont(1) && cont(2) && cont(3))
        return {static_cast<char32_t>((c0 & 0x07) << 18) | (cb(1) << 12) | (cb(2) << 6) | cb(3), 4};
    return {c0, 1};
}

inline bool is_unicode_space(char32_t cp) {
    switch (cp) {
    case 0x09: case 0x0a: case 0x0b: case 0x0c: case 0x0d: case 0x20:
    case 0x85: case 0xa0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202f: case 0x205f: case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200a;
    }
}

// Byte ranges [start, end) of whitespace-delimited words.
inline std::vector<std::pair<std::size_t, std::size_t>> word_spans(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t i = 0;
    std::size_t word_start = std::string_view::npos;
    while (i < text.size()) {
        auto [cp, len] = utf8_decode(text, i);
        if (is_unicode_space(cp)) {
            if (word_start != std::string_view::npos) {
                out.emplace_back(word_start, i);
                word_start = std::string_view::npos;
            }
        } else if (word_start == std::string_view::npos) {
            word_start = i;
        }
        i += static_cast<std::size_t>(len);
    }
    if (word_start != std::string_view::npos) out.emplace_back(word_start, text.size());
    return out;
}

inline std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

// Collapse internal whitespace runs to a single space and trim the ends.
inline std::string normalize_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    std::size_t i = 0;
    while (i < s.size()) {
        auto [cp, len] = utf8_decode(s, i);
        if (is_unicode_space(cp)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) {
                out.push_back(' ');
                pending_space = false;
            }
            out.append(s.substr(i, static_cast<std::size_t>(len)));
        }
        i += static_cast<std::size_t>(len);
    }
    return out;
}

// Canonical label form: lowercase, whitespace collapsed, trimmed.
inline std::string normalize_label(std::string_view s) {
    return to_lower_ascii(normalize_ws(s));
}

inline bool is_ascii_alnum(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Percent-encode everything outside [a-z0-9._-]; keeps identifiers
// whitespace-free so they can sit inside <...> in the triple export.
inline std::string percent_encode(std::string_view s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        bool plain = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                     c == '.' || c == '_' || c == '-';
        if (plain) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xf]);
        }
    }
    return out;
}

// ceil(chars / 4): the uniform token estimator used for cost accounting.
inline long long estimate_tokens(std::string_view payload) {
    return static_cast<long long>((payload.size() + 3) / 4);
}

}  // namespace graphhop
