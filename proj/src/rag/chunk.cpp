#include "tsp/rag/chunk.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "tsp/digest.hpp"
#include "tsp/error.hpp"
#include "tsp/json_reader.hpp"
#include "tsp/utf8.hpp"

namespace tsp::rag {

namespace {

bool is_horizontal_space(char32_t c) { return c != U'\n' && utf8::is_space(c); }

std::vector<std::u32string> split_lines(const std::u32string& text) {
    std::vector<std::u32string> lines;
    std::u32string cur;
    for (char32_t c : text) {
        if (c == U'\n') {
            lines.push_back(std::move(cur));
            cur.clear();
        } else if (c != U'\r') {
            cur.push_back(c);
        }
    }
    lines.push_back(std::move(cur));
    return lines;
}

std::u32string normalize_line(const std::u32string& line) {
    std::u32string out;
    bool pending_space = false;
    for (char32_t c : line) {
        if (is_horizontal_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(U' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::string clean_pass(const std::string& in, const std::vector<std::regex>& patterns) {
    auto lines = split_lines(utf8::decode(in));
    std::string out;
    bool pending_blank = false;
    for (auto& raw : lines) {
        std::string line = utf8::encode(normalize_line(raw));
        for (const auto& re : patterns) line = std::regex_replace(line, re, "");
        line = utf8::encode(normalize_line(utf8::decode(line)));
        if (line.empty()) {
            pending_blank = !out.empty();
            continue;
        }
        if (!out.empty()) out += pending_blank ? "\n\n" : "\n";
        pending_blank = false;
        out += line;
    }
    return out;
}

bool is_heading_line(std::u32string_view text, std::size_t pos) {
    if (pos != 0 && text[pos - 1] != U'\n') return false;
    std::size_t i = pos;
    while (i < text.size() && text[i] == U'#' && i - pos < 6) ++i;
    return i > pos && i < text.size() && text[i] == U' ';
}

std::size_t line_end(std::u32string_view text, std::size_t pos) {
    while (pos < text.size() && text[pos] != U'\n') ++pos;
    return pos;
}

std::size_t skip_space(std::u32string_view text, std::size_t pos) {
    while (pos < text.size() && utf8::is_space(text[pos])) ++pos;
    return pos;
}

bool is_abbreviation(std::u32string_view text, std::size_t dot, const std::vector<std::u32string>& abbrevs) {
    std::size_t start = dot;
    while (start > 0 && !utf8::is_space(text[start - 1])) --start;
    const auto word = text.substr(start, dot + 1 - start);
    return std::find(abbrevs.begin(), abbrevs.end(), word) != abbrevs.end();
}

struct Heading {
    std::size_t pos;
    int level;
    std::string title;
};

std::vector<Heading> find_headings(std::u32string_view text) {
    std::vector<Heading> out;
    for (std::size_t pos = 0; pos < text.size(); pos = line_end(text, pos) + 1) {
        if (!is_heading_line(text, pos)) continue;
        std::size_t i = pos;
        while (text[i] == U'#') ++i;
        const auto end = line_end(text, pos);
        out.push_back({pos, static_cast<int>(i - pos), utf8::encode(text.substr(i + 1, end - i - 1))});
    }
    return out;
}

// Heading path in effect at `pos`.
std::vector<std::string> section_path_at(const std::vector<Heading>& headings, std::size_t pos) {
    std::vector<std::pair<int, std::string>> stack;
    for (const auto& h : headings) {
        if (h.pos > pos) break;
        while (!stack.empty() && stack.back().first >= h.level) stack.pop_back();
        stack.emplace_back(h.level, h.title);
    }
    std::vector<std::string> out;
    for (auto& [lvl, t] : stack) out.push_back(std::move(t));
    return out;
}

std::vector<std::string> families_of(const std::vector<std::string>& ids) {
    std::set<std::string> fams;
    for (const auto& id : ids) fams.insert(id.substr(0, 2));
    return {fams.begin(), fams.end()};
}

// Greedy packing of consecutive segments into windows of at most `size` code points.
std::vector<Span> pack(const std::vector<Span>& segments, std::size_t size) {
    std::vector<Span> out;
    Span cur{0, 0};
    bool open = false;
    for (const auto& s : segments) {
        if (open && s.end - cur.start > size) {
            out.push_back(cur);
            open = false;
        }
        if (!open) {
            cur = s;
            open = true;
        } else {
            cur.end = s.end;
        }
    }
    if (open) out.push_back(cur);
    return out;
}

Chunk make_chunk(std::string_view doc_id, std::u32string_view text, Span span, const std::vector<Heading>& headings,
                 std::string_view doc_date, bool prefix_path) {
    Chunk c;
    c.doc_id = doc_id;
    c.span = span;
    const auto body = utf8::encode(text.substr(span.start, span.end - span.start));
    c.metadata.section_path = section_path_at(headings, span.start);
    if (prefix_path && !c.metadata.section_path.empty()) {
        std::string prefix;
        for (const auto& p : c.metadata.section_path) {
            if (!prefix.empty()) prefix += " > ";
            prefix += p;
        }
        c.text = prefix + "\n" + body;
    } else {
        c.text = body;
    }
    c.metadata.control_ids = find_control_ids(body);
    c.metadata.families = families_of(c.metadata.control_ids);
    c.metadata.doc_date = doc_date;
    c.chunk_id = make_chunk_id(doc_id, span, c.text);
    return c;
}

} // namespace

std::string clean(std::string_view raw, const CleanConfig& config) {
    if (!utf8::is_valid(raw)) throw Error(ErrorCode::InvalidEncoding, "document is not valid UTF-8");
    std::vector<std::regex> patterns;
    for (const auto& p : config.strip_patterns) {
        try {
            patterns.emplace_back(p, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw Error(ErrorCode::ConfigError, "invalid strip pattern '" + p + "': " + e.what());
        }
    }
    // Stripping can join fragments into a fresh match, so iterate to a fixpoint.
    std::string cur(raw);
    for (;;) {
        auto next = clean_pass(cur, patterns);
        if (next == cur) return next;
        cur = std::move(next);
    }
}

std::string_view to_string(ChunkStrategy s) noexcept {
    switch (s) {
    case ChunkStrategy::Character: return "character";
    case ChunkStrategy::Sentence: return "sentence";
    case ChunkStrategy::Structure: return "structure";
    }
    return "structure";
}

ChunkStrategy parse_chunk_strategy(std::string_view s) {
    for (auto v : {ChunkStrategy::Character, ChunkStrategy::Sentence, ChunkStrategy::Structure}) {
        if (to_string(v) == s) return v;
    }
    throw Error(ErrorCode::ConfigError, "unknown chunking strategy '" + std::string(s) + "'");
}

void ChunkConfig::validate() const {
    if (size == 0) throw Error(ErrorCode::ConfigError, "chunk size must be positive");
    if (strategy == ChunkStrategy::Character && overlap >= size) {
        throw Error(ErrorCode::ConfigError, "chunk overlap must be smaller than chunk size",
                    {{"size", size}, {"overlap", overlap}});
    }
}

std::string make_chunk_id(std::string_view doc_id, Span span, std::string_view text) {
    std::string material(doc_id);
    material += '\x1f';
    material += std::to_string(span.start) + ":" + std::to_string(span.end);
    material += '\x1f';
    material += text;
    return "c-" + sha256_hex(material).substr(0, 16);
}

std::vector<Span> sentence_segments(std::u32string_view text, const std::vector<std::string>& abbreviations) {
    std::vector<std::u32string> abbrevs;
    for (const auto& a : abbreviations) abbrevs.push_back(utf8::decode(a));

    std::vector<Span> out;
    std::size_t start = 0;
    auto cut = [&](std::size_t at) {
        if (at > start) out.push_back({start, at});
        start = at;
    };
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_heading_line(text, i)) {
            cut(i);
            const auto e = line_end(text, i);
            i = skip_space(text, e);
            cut(i);
            continue;
        }
        const char32_t c = text[i];
        if (c == U'\n') {
            const auto next = skip_space(text, i);
            const auto newlines = std::count(text.begin() + i, text.begin() + next, U'\n');
            if (newlines >= 2 || next == text.size()) {
                i = next;
                cut(i);
                continue;
            }
        }
        if ((c == U'.' || c == U'?' || c == U'!') && i + 1 < text.size() && utf8::is_space(text[i + 1])) {
            const auto next = skip_space(text, i + 1);
            if ((next == text.size() || utf8::is_upper(text[next])) &&
                !(c == U'.' && is_abbreviation(text, i, abbrevs))) {
                i = next;
                cut(i);
                continue;
            }
        }
        ++i;
    }
    cut(text.size());
    return out;
}

std::vector<Chunk> chunk(std::string_view doc_id, std::string_view text_utf8, const ChunkConfig& config,
                         std::string_view doc_date) {
    config.validate();
    const auto text = utf8::decode(text_utf8);
    if (text.empty()) return {};
    const auto headings = find_headings(text);

    std::vector<Span> spans;
    switch (config.strategy) {
    case ChunkStrategy::Character: {
        const std::size_t step = config.size - config.overlap;
        for (std::size_t start = 0;; start += step) {
            const std::size_t end = std::min(start + config.size, text.size());
            spans.push_back({start, end});
            if (end == text.size()) break;
        }
        break;
    }
    case ChunkStrategy::Sentence:
        spans = pack(sentence_segments(text, config.abbreviations), config.size);
        break;
    case ChunkStrategy::Structure: {
        // Sections run from one heading line to the next; packing never crosses them.
        std::vector<std::size_t> bounds{0};
        for (const auto& h : headings) {
            if (h.pos != 0) bounds.push_back(h.pos);
        }
        bounds.push_back(text.size());
        const auto segments = sentence_segments(text, config.abbreviations);
        std::size_t si = 0;
        for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
            std::vector<Span> section;
            while (si < segments.size() && segments[si].end <= bounds[b + 1]) section.push_back(segments[si++]);
            auto packed = pack(section, config.size);
            spans.insert(spans.end(), packed.begin(), packed.end());
        }
        break;
    }
    }

    std::vector<Chunk> out;
    out.reserve(spans.size());
    for (const auto& s : spans) {
        out.push_back(make_chunk(doc_id, text, s, headings, doc_date, config.strategy == ChunkStrategy::Structure));
    }
    return out;
}

std::vector<std::string> find_control_ids(std::string_view text) {
    static const std::regex re(R"(\b[A-Z]{2}-[0-9]+(\([0-9]+\))?)");
    std::set<std::string> ids;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
        ids.insert(it->str());
    }
    return {ids.begin(), ids.end()};
}

nlohmann::ordered_json to_json(const Chunk& c) {
    nlohmann::ordered_json j;
    j["chunk_id"] = c.chunk_id;
    j["doc_id"] = c.doc_id;
    j["text"] = c.text;
    j["span"] = {c.span.start, c.span.end};
    j["metadata"] = {{"section_path", c.metadata.section_path},
                     {"control_ids", c.metadata.control_ids},
                     {"doc_date", c.metadata.doc_date},
                     {"families", c.metadata.families}};
    return j;
}

Chunk chunk_from_json(const nlohmann::json& j) {
    json_io::ObjectReader r(j, "$");
    Chunk c;
    c.chunk_id = r.required_string("chunk_id");
    c.doc_id = r.required_string("doc_id");
    c.text = r.required_string("text");
    const auto& span = r.array("span", true);
    if (span.size() != 2 || !span[0].is_number_unsigned() || !span[1].is_number_unsigned()) {
        r.fail(r.child("span"), "expected [start, end]");
    }
    c.span = {span[0].get<std::size_t>(), span[1].get<std::size_t>()};
    const auto* meta = r.object("metadata", true);
    json_io::ObjectReader m(*meta, r.child("metadata"));
    c.metadata.section_path = m.string_array("section_path", true);
    c.metadata.control_ids = m.string_array("control_ids", true);
    c.metadata.doc_date = m.required_string("doc_date");
    c.metadata.families = m.string_array("families", true);
    m.finish();
    r.finish();
    return c;
}

} // namespace tsp::rag
