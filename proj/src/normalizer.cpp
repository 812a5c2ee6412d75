#include "gecrag/normalizer.hpp"

#include <fstream>
#include <sstream>

#include "gecrag/errors.hpp"
#include "gecrag/text.hpp"

namespace gecrag {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string map_digits(std::string_view s, const std::array<std::string, 10>& digit_map) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        if (c >= '0' && c <= '9' && !digit_map[static_cast<std::size_t>(c - '0')].empty()) {
            out += digit_map[static_cast<std::size_t>(c - '0')];
        } else {
            out.push_back(c);
        }
    }
    return out;
}

} // namespace

bool NormalizationConfig::empty() const {
    if (!unicode_map.empty() || !spacing_rules.empty() || !dictionary.empty()) return false;
    for (const auto& d : digit_map) {
        if (!d.empty()) return false;
    }
    return true;
}

std::string normalize(std::string_view raw, const NormalizationConfig& cfg) {
    std::string s(raw);
    for (const auto& [from, to] : cfg.unicode_map) {
        s = text::replace_all(s, from, to);
    }
    s = map_digits(s, cfg.digit_map);

    s = text::collapse_whitespace(s);
    if (!cfg.spacing_rules.empty()) {
        std::string padded;
        padded.reserve(s.size() + 2);
        padded.push_back(' ');
        padded += s;
        padded.push_back(' ');
        for (const auto& [from, to] : cfg.spacing_rules) {
            padded = text::replace_all(padded, from, to);
        }
        s = text::collapse_whitespace(padded);
    }

    if (!cfg.dictionary.empty()) {
        std::string out;
        out.reserve(s.size());
        std::size_t start = 0;
        while (start <= s.size()) {
            std::size_t end = s.find(' ', start);
            if (end == std::string::npos) end = s.size();
            const std::string_view tok(s.data() + start, end - start);
            if (!tok.empty()) {
                if (!out.empty()) out.push_back(' ');
                auto it = cfg.dictionary.find(std::string(tok));
                out += (it != cfg.dictionary.end()) ? it->second : std::string(tok);
            }
            if (end == s.size()) break;
            start = end + 1;
        }
        s = std::move(out);
    }
    return s;
}

NormalizationConfig parse_normalization_config(std::string_view content, const std::string& origin) {
    NormalizationConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    auto fail = [&](const std::string& what) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + what);
    };
    while (pos < content.size()) {
        const std::size_t eol = content.find('\n', pos);
        std::string_view line;
        if (eol == std::string_view::npos) {
            line = content.substr(pos);
            pos = content.size();
        } else {
            line = content.substr(pos, eol - pos);
            pos = eol + 1;
        }
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;

        const std::size_t t1 = line.find('\t');
        if (t1 == std::string_view::npos) fail("expected <kind>\\t<from>\\t<to>");
        const std::size_t t2 = line.find('\t', t1 + 1);
        if (t2 == std::string_view::npos) fail("expected <kind>\\t<from>\\t<to>");
        if (line.find('\t', t2 + 1) != std::string_view::npos) fail("too many fields");
        const std::string kind(line.substr(0, t1));
        const std::string from(line.substr(t1 + 1, t2 - t1 - 1));
        const std::string to(line.substr(t2 + 1));

        if (from.empty()) fail("empty pattern");
        if (kind == "unicode") {
            cfg.unicode_map.emplace_back(from, to);
        } else if (kind == "digit") {
            if (from.size() != 1 || from[0] < '0' || from[0] > '9') {
                fail("digit rule source must be a single ASCII digit");
            }
            if (to.empty()) fail("digit rule target must be non-empty");
            auto& slot = cfg.digit_map[static_cast<std::size_t>(from[0] - '0')];
            if (!slot.empty()) fail("duplicate digit rule for '" + from + "'");
            slot = to;
        } else if (kind == "space") {
            cfg.spacing_rules.emplace_back(from, to);
        } else if (kind == "dict") {
            if (to.empty()) fail("dictionary value must be non-empty");
            if (from == to) fail("dictionary key maps to itself: '" + from + "'");
            if (text::contains_whitespace(from)) fail("dictionary key must be a single token");
            if (text::contains_whitespace(to)) fail("dictionary value must be a single token");
            if (!cfg.dictionary.emplace(from, to).second) {
                fail("duplicate dictionary key: '" + from + "'");
            }
        } else {
            fail("unknown rule kind: '" + kind + "'");
        }
    }
    return cfg;
}

NormalizationConfig load_normalization_config(const std::string& path) {
    return parse_normalization_config(read_file(path), path);
}

} // namespace gecrag
