#pragma once

#include <sstream>
#include <string>
#include <vector>

namespace corekg::csv {

/// RFC-4180-style quoting: fields containing the delimiter, a quote, or a
/// newline are wrapped in double quotes with inner quotes doubled.
inline std::string quote_field(const std::string& field, char delim = ',') {
    const bool needs_quotes = field.find(delim) != std::string::npos ||
                              field.find('"') != std::string::npos ||
                              field.find('\n') != std::string::npos ||
                              field.find('\r') != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline std::string make_row(const std::vector<std::string>& fields, char delim = ',') {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(delim);
        out += quote_field(fields[i], delim);
    }
    out.push_back('\n');
    return out;
}

inline std::vector<std::string> parse_row(const std::string& line, char delim = ',') {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == delim) {
            fields.push_back(cur);
            cur.clear();
        } else if (c == '\r') {
            // ignore
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

/// Parses a whole CSV document, honoring quoted newlines.
inline std::vector<std::vector<std::string>> parse(const std::string& content, char delim = ',') {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool in_quotes = false;
    for (char c : content) {
        if (c == '"') in_quotes = !in_quotes;
        if (c == '\n' && !in_quotes) {
            if (!line.empty()) rows.push_back(parse_row(line, delim));
            line.clear();
        } else {
            line.push_back(c);
        }
    }
    if (!line.empty()) rows.push_back(parse_row(line, delim));
    return rows;
}

}  // namespace corekg::csv
