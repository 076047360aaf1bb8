#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace namegen::text {

/// Splits UTF-8 text into one string per code point. Invalid lead bytes are kept as single bytes.
inline std::vector<std::string> chars(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        auto lead = static_cast<unsigned char>(s[i]);
        std::size_t len = 1;
        if (lead >= 0xF0) len = 4;
        else if (lead >= 0xE0) len = 3;
        else if (lead >= 0xC0) len = 2;
        if (i + len > s.size()) len = s.size() - i;
        out.emplace_back(s.substr(i, len));
        i += len;
    }
    return out;
}

inline std::size_t length(std::string_view s) { return chars(s).size(); }

inline std::string trim(std::string_view s) {
    const char* ws = " \t\r\n\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

inline bool contains(std::string_view hay, std::string_view needle) {
    return hay.find(needle) != std::string_view::npos;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline bool is_punctuation(std::string_view ch) {
    static constexpr std::string_view cjk[] = {"，", "。", "！", "？", "；", "：", "、", "…",
                                               "「", "」", "“", "”", "《", "》", "（", "）",
                                               "·", "—", "　"};
    if (ch.size() == 1) {
        auto c = static_cast<unsigned char>(ch[0]);
        return c < 0x80 && !((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'));
    }
    for (auto p : cjk)
        if (ch == p) return true;
    return false;
}

/// Removes punctuation and whitespace so verse fragments compare by their characters only.
inline std::string strip_punctuation(std::string_view s) {
    std::string out;
    for (const auto& ch : chars(s))
        if (!is_punctuation(ch)) out += ch;
    return out;
}

/// Splits a verse line into clauses at CJK and ASCII clause punctuation.
inline std::vector<std::string> clauses(std::string_view line) {
    static constexpr std::string_view breaks[] = {"，", "。", "！", "？", "；", ",", ".", "!", "?", ";"};
    std::vector<std::string> out;
    std::string cur;
    for (const auto& ch : chars(line)) {
        bool brk = false;
        for (auto b : breaks)
            if (ch == b) brk = true;
        if (brk) {
            auto c = strip_punctuation(cur);
            if (!c.empty()) out.push_back(std::move(c));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    auto c = strip_punctuation(cur);
    if (!c.empty()) out.push_back(std::move(c));
    return out;
}

inline std::string fixed(double value, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, value);
    return buf;
}

}  // namespace namegen::text
