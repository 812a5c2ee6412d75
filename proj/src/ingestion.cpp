#include "gecrag/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "gecrag/errors.hpp"
#include "gecrag/text.hpp"

namespace gecrag {

namespace {

std::vector<std::string> split_tsv_row(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

uint32_t parse_votes(const std::string& field, const std::string& column, std::size_t line_no,
                     const std::string& path) {
    uint32_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": non-integer " + column +
                        " value '" + field + "'");
    }
    return value;
}

} // namespace

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        case Split::test: return "test";
        case Split::validated_extra: return "validated_extra";
    }
    return "train";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "dev") return Split::dev;
    if (s == "test") return Split::test;
    if (s == "validated_extra") return Split::validated_extra;
    throw DataError("unknown split value: '" + s + "'");
}

ManifestLoadResult load_manifest(const std::string& path, Split default_split) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty manifest (no header row)");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_tsv_row(line);
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col.emplace(header[i], i);

    for (const char* required : {"path", "sentence", "up_votes", "down_votes"}) {
        if (!col.count(required)) {
            throw DataError(path + ": manifest header is missing required column '" +
                            std::string(required) + "'");
        }
    }
    auto col_of = [&](const char* name) -> std::ptrdiff_t {
        auto it = col.find(name);
        return it == col.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
    };
    const std::size_t c_path = col.at("path");
    const std::size_t c_sentence = col.at("sentence");
    const std::size_t c_up = col.at("up_votes");
    const std::size_t c_down = col.at("down_votes");
    const std::ptrdiff_t c_utt = col_of("utt_id");
    const std::ptrdiff_t c_split = col_of("split");

    ManifestLoadResult result;
    std::unordered_set<std::string> seen_ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_tsv_row(line);
        if (fields.size() < header.size()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " columns, got " +
                            std::to_string(fields.size()));
        }
        if (fields[c_sentence].empty()) {
            ++result.dropped_empty_sentences;
            continue;
        }
        Utterance u;
        u.audio_ref = fields[c_path];
        u.utt_id = (c_utt >= 0 && !fields[static_cast<std::size_t>(c_utt)].empty())
                       ? fields[static_cast<std::size_t>(c_utt)]
                       : fields[c_path];
        u.ground_truth = fields[c_sentence];
        u.up_votes = parse_votes(fields[c_up], "up_votes", line_no, path);
        u.down_votes = parse_votes(fields[c_down], "down_votes", line_no, path);
        u.split = (c_split >= 0 && !fields[static_cast<std::size_t>(c_split)].empty())
                      ? split_from_string(fields[static_cast<std::size_t>(c_split)])
                      : default_split;
        if (!seen_ids.insert(u.utt_id).second) {
            throw DataError(path + ":" + std::to_string(line_no) + ": duplicate utt_id '" +
                            u.utt_id + "'");
        }
        result.utterances.push_back(std::move(u));
    }
    return result;
}

std::vector<HypothesisSet> load_hypotheses(const std::string& path, std::size_t beam_width) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open hypotheses file: " + path);

    std::vector<HypothesisSet> sets;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": malformed JSON line: " +
                            e.what());
        }
        if (!j.is_object() || !j.contains("utt_id") || !j.contains("hypotheses") ||
            !j["utt_id"].is_string() || !j["hypotheses"].is_array()) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected {\"utt_id\": str, \"hypotheses\": [str, ...]}");
        }
        HypothesisSet hs;
        hs.utt_id = j["utt_id"].get<std::string>();
        for (const auto& h : j["hypotheses"]) {
            if (!h.is_string()) {
                throw DataError(path + ":" + std::to_string(line_no) +
                                ": hypotheses must be strings");
            }
            hs.hypotheses.push_back(h.get<std::string>());
        }
        if (hs.hypotheses.empty()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": empty hypothesis list for '" +
                            hs.utt_id + "'");
        }
        if (hs.hypotheses.size() > beam_width) {
            throw DataError(path + ":" + std::to_string(line_no) + ": " +
                            std::to_string(hs.hypotheses.size()) + " hypotheses exceed beam width " +
                            std::to_string(beam_width));
        }
        if (!seen_ids.insert(hs.utt_id).second) {
            throw DataError(path + ":" + std::to_string(line_no) + ": duplicate utt_id '" +
                            hs.utt_id + "'");
        }
        sets.push_back(std::move(hs));
    }
    return sets;
}

std::string hypotheses_to_jsonl(const std::vector<HypothesisSet>& sets) {
    std::string out;
    for (const auto& hs : sets) {
        nlohmann::json j;
        j["utt_id"] = hs.utt_id;
        j["hypotheses"] = hs.hypotheses;
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

void save_hypotheses(const std::string& path, const std::vector<HypothesisSet>& sets) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write hypotheses file: " + path);
    out << hypotheses_to_jsonl(sets);
}

std::vector<Utterance> enlargement_filter(const std::vector<Utterance>& utts) {
    std::vector<Utterance> kept;
    std::copy_if(utts.begin(), utts.end(), std::back_inserter(kept), [](const Utterance& u) {
        return u.down_votes == 0 && u.up_votes >= 2 && u.split == Split::validated_extra;
    });
    return kept;
}

KbBuildResult build_kb_entries(const std::vector<Utterance>& utts,
                               const std::vector<HypothesisSet>& hyps,
                               const NormalizationConfig& cfg) {
    std::unordered_map<std::string, const HypothesisSet*> by_id;
    by_id.reserve(hyps.size());
    for (const auto& hs : hyps) by_id.emplace(hs.utt_id, &hs);

    std::vector<std::string> missing;
    for (const auto& u : utts) {
        if (!by_id.count(u.utt_id)) missing.push_back(u.utt_id);
    }
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << missing.size() << " utterance(s) have no hypothesis set:";
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg << " " << missing[i];
        if (missing.size() > 10) msg << " ...";
        throw DataError(msg.str());
    }

    KbBuildResult result;
    result.entries.reserve(utts.size());
    for (const auto& u : utts) {
        const HypothesisSet& hs = *by_id.at(u.utt_id);
        KbEntry e;
        e.entry_id = u.utt_id;
        e.ground_truth = normalize(u.ground_truth, cfg);
        e.hypotheses.reserve(hs.hypotheses.size());
        for (const auto& h : hs.hypotheses) e.hypotheses.push_back(normalize(h, cfg));
        e.retrieval_text = e.hypotheses.front();
        if (e.ground_truth.empty() || e.retrieval_text.empty()) {
            ++result.dropped_empty;
            continue;
        }
        result.entries.push_back(std::move(e));
    }
    return result;
}

} // namespace gecrag
