#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace corekg::text {

/// Half-open character span of one token within a source string.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Tokens are maximal runs of non-whitespace characters.
inline std::vector<TokenSpan> tokenize(std::string_view s) {
    std::vector<TokenSpan> out;
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i >= n) break;
        std::size_t start = i;
        while (i < n && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        out.push_back({start, i});
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_ws = true;
        } else {
            if (in_ws && !out.empty()) out.push_back(' ');
            in_ws = false;
            out.push_back(c);
        }
    }
    return out;
}

/// Canonical form used for entity merging and comparison:
/// trim, collapse internal whitespace, uppercase.
inline std::string normalize_name(std::string_view s) {
    return to_upper(collapse_whitespace(trim(s)));
}

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

/// Whole-word (or whole-phrase) containment, case-insensitive.
inline bool contains_whole_word(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return false;
    const std::string h = to_upper(haystack);
    const std::string n = to_upper(needle);
    std::size_t pos = 0;
    while ((pos = h.find(n, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(h[pos - 1]);
        const std::size_t after = pos + n.size();
        const bool right_ok = after == h.size() || !is_word_char(h[after]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

inline std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\n') {
            std::string_view line = s.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.emplace_back(line);
            start = i + 1;
        }
    }
    if (!lines.empty() && lines.back().empty() && (s.empty() || s.back() == '\n')) lines.pop_back();
    return lines;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string digest(std::string_view s) { return hex64(fnv1a64(s)); }

}  // namespace corekg::text
