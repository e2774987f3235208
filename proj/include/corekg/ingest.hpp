#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "corekg/errors.hpp"
#include "corekg/text.hpp"

namespace corekg {

struct CaseDocument {
    std::string case_id;
    std::string raw_text;
    std::string opinion_text;
    std::size_t word_count = 0;
    std::vector<std::string> warnings;
};

struct Chunk {
    int chunk_id = 0;
    std::size_t token_begin = 0;  // [token_begin, token_end) into the source token sequence
    std::size_t token_end = 0;
    std::string text;
    std::string case_id;
};

struct SectionMarkers {
    std::vector<std::string> start_headings = {"Opinion", "Memorandum Opinion"};
    std::vector<std::string> end_headings = {"Footnotes", "Dissent", "Concurrence",
                                             "End of Document"};
};

struct CorpusLoadResult {
    std::vector<CaseDocument> documents;
    std::vector<std::string> errors;  // per-file failures, run continues
};

inline std::string read_text_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& p, std::string_view content) {
    std::filesystem::create_directories(p.parent_path().empty() ? "." : p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + p.string());
}

/// Manifest: line-delimited `filename = case_id` pairs; `#` starts a comment.
inline std::map<std::string, std::string> load_manifest(const std::filesystem::path& p) {
    std::map<std::string, std::string> out;
    for (const auto& line : text::split_lines(read_text_file(p))) {
        std::string t = text::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("manifest line missing '=': " + t);
        out[text::trim(t.substr(0, eq))] = text::trim(t.substr(eq + 1));
    }
    return out;
}

inline CorpusLoadResult load_corpus(const std::filesystem::path& directory,
                                    const std::map<std::string, std::string>& manifest = {}) {
    if (!std::filesystem::is_directory(directory))
        throw IoError("corpus directory does not exist: " + directory.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    CorpusLoadResult result;
    for (const auto& f : files) {
        try {
            CaseDocument doc;
            auto it = manifest.find(f.filename().string());
            doc.case_id = it != manifest.end() ? it->second : f.stem().string();
            doc.raw_text = read_text_file(f);
            doc.opinion_text = doc.raw_text;
            doc.word_count = text::tokenize(doc.raw_text).size();
            result.documents.push_back(std::move(doc));
        } catch (const std::exception& e) {
            result.errors.push_back(f.string() + ": " + e.what());
        }
    }
    if (result.documents.empty())
        throw CorpusEmptyError("no readable case files in " + directory.string());
    return result;
}

namespace detail {

inline bool line_matches_heading(std::string_view line, const std::vector<std::string>& headings) {
    const std::string stripped = text::collapse_whitespace(text::trim(line));
    for (const auto& h : headings) {
        if (text::to_upper(stripped) == text::to_upper(h)) return true;
    }
    return false;
}

}  // namespace detail

/// Isolates the Opinion section: the span between the first start-marker
/// heading line and the next end heading (or end of document). Falls back to
/// the full text, with a warning, when no marker is present.
inline CaseDocument extract_opinion(CaseDocument doc, const SectionMarkers& markers = {}) {
    const std::string& raw = doc.raw_text;
    std::vector<std::pair<std::size_t, std::size_t>> line_spans;  // [begin, end) excl. newline
    {
        std::size_t start = 0;
        for (std::size_t i = 0; i <= raw.size(); ++i) {
            if (i == raw.size() || raw[i] == '\n') {
                line_spans.emplace_back(start, i);
                start = i + 1;
            }
        }
    }
    std::size_t heading_idx = line_spans.size();
    for (std::size_t k = 0; k < line_spans.size(); ++k) {
        std::string_view line(raw.data() + line_spans[k].first,
                              line_spans[k].second - line_spans[k].first);
        if (detail::line_matches_heading(line, markers.start_headings)) {
            heading_idx = k;
            break;
        }
    }
    if (heading_idx == line_spans.size()) {
        doc.opinion_text = raw;
        doc.warnings.push_back("no opinion heading found; using full text");
    } else {
        std::size_t body_begin =
            heading_idx + 1 < line_spans.size() ? line_spans[heading_idx + 1].first : raw.size();
        std::size_t body_end = raw.size();
        for (std::size_t k = heading_idx + 1; k < line_spans.size(); ++k) {
            std::string_view line(raw.data() + line_spans[k].first,
                                  line_spans[k].second - line_spans[k].first);
            if (detail::line_matches_heading(line, markers.end_headings)) {
                body_end = line_spans[k].first;
                break;
            }
        }
        if (body_begin > body_end) body_begin = body_end;
        doc.opinion_text = raw.substr(body_begin, body_end - body_begin);
    }
    doc.word_count = text::tokenize(doc.opinion_text).size();
    return doc;
}

/// Splits text into overlapping token chunks with stride = chunk_size - overlap.
/// Chunk text is the original substring spanning its tokens, so spacing is kept.
inline std::vector<Chunk> chunk_text(std::string_view source, std::size_t chunk_size,
                                     std::size_t overlap, const std::string& case_id = "") {
    if (chunk_size == 0) throw ConfigError("chunk_size must be >= 1");
    if (chunk_size <= overlap) throw ConfigError("chunk_size must exceed overlap");
    const auto tokens = text::tokenize(source);
    std::vector<Chunk> chunks;
    if (tokens.empty()) return chunks;
    const std::size_t n = tokens.size();
    const std::size_t stride = chunk_size - overlap;
    int id = 0;
    for (std::size_t start = 0;; start += stride) {
        const std::size_t end = std::min(start + chunk_size, n);
        Chunk c;
        c.chunk_id = id++;
        c.token_begin = start;
        c.token_end = end;
        c.case_id = case_id;
        const std::size_t char_begin = tokens[start].begin;
        const std::size_t char_end = tokens[end - 1].end;
        c.text = std::string(source.substr(char_begin, char_end - char_begin));
        chunks.push_back(std::move(c));
        if (end == n) break;
    }
    return chunks;
}

}  // namespace corekg
