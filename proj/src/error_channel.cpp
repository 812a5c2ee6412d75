#include "gecrag/error_channel.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "gecrag/errors.hpp"
#include "gecrag/text.hpp"
#include "gecrag/tfidf_index.hpp"

namespace gecrag {

void validate_channel_config(const ChannelConfig& cfg) {
    if (cfg.p_sub < 0 || cfg.p_del < 0 || cfg.p_ins < 0) {
        throw ConfigError("channel probabilities must be non-negative");
    }
    if (cfg.p_sub + cfg.p_del + cfg.p_ins > 1.0) {
        throw ConfigError("p_sub + p_del + p_ins must not exceed 1");
    }
    if (cfg.n_best < 1) throw ConfigError("n_best must be >= 1");
    for (const auto& [term, confusables] : cfg.confusion_table) {
        if (confusables.empty()) {
            throw ConfigError("confusion entry for '" + term + "' has no confusables");
        }
    }
}

std::unordered_map<std::string, std::vector<std::string>> load_confusion_table(
    const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open confusion table: " + path);
    std::unordered_map<std::string, std::vector<std::string>> table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected term\\tconfusable1,confusable2,...");
        }
        const std::string term = line.substr(0, tab);
        std::vector<std::string> confusables;
        std::size_t start = tab + 1;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) comma = line.size();
            const std::string c = line.substr(start, comma - start);
            if (!c.empty()) confusables.push_back(c);
            start = comma + 1;
        }
        if (confusables.empty()) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": entry for '" + term +
                              "' has no confusables");
        }
        if (!table.emplace(term, std::move(confusables)).second) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": duplicate term '" + term +
                              "'");
        }
    }
    return table;
}

namespace {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Small, portable generator: identical streams on every platform/stdlib.
struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) : state(seed) {}
    uint64_t next() { return splitmix64(state); }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

struct Variant {
    std::string rendered;
    uint64_t corruption_count;
};

} // namespace

uint64_t mix_seed(uint64_t seed, std::string_view utt_id) {
    uint64_t state = seed ^ text::fnv1a64(utt_id);
    return splitmix64(state);
}

HypothesisSet corrupt(std::string_view normalized_truth, const ChannelConfig& cfg,
                      const std::string& utt_id, ChannelStats* stats) {
    validate_channel_config(cfg);
    if (normalized_truth.empty()) throw DataError("corrupt() requires a non-empty truth");

    const std::vector<std::string> truth_tokens = tokenize(normalized_truth);

    // Pool for random substitutions/insertions: table keys and values, in a
    // deterministic order.
    std::set<std::string> pool_set;
    for (const auto& [term, confusables] : cfg.confusion_table) {
        pool_set.insert(term);
        pool_set.insert(confusables.begin(), confusables.end());
    }
    const std::vector<std::string> pool(pool_set.begin(), pool_set.end());

    Rng rng(mix_seed(cfg.seed, utt_id));
    auto generate_variant = [&]() -> Variant {
        std::vector<std::string> out;
        out.reserve(truth_tokens.size() + 2);
        uint64_t corruptions = 0;
        for (const auto& tok : truth_tokens) {
            if (stats) ++stats->token_draws;
            const double r = rng.unit();
            if (r < cfg.p_sub) {
                const auto it = cfg.confusion_table.find(tok);
                if (it != cfg.confusion_table.end()) {
                    out.push_back(it->second[rng.index(it->second.size())]);
                    ++corruptions;
                    if (stats) ++stats->substitutions;
                } else if (!pool.empty()) {
                    out.push_back(pool[rng.index(pool.size())]);
                    ++corruptions;
                    if (stats) ++stats->substitutions;
                } else {
                    out.push_back(tok); // nothing to substitute with
                }
            } else if (r < cfg.p_sub + cfg.p_del) {
                ++corruptions;
                if (stats) ++stats->deletions;
            } else if (r < cfg.p_sub + cfg.p_del + cfg.p_ins) {
                out.push_back(tok);
                if (!pool.empty()) {
                    out.push_back(pool[rng.index(pool.size())]);
                    ++corruptions;
                    if (stats) ++stats->insertions;
                }
            } else {
                out.push_back(tok);
            }
        }
        std::string rendered;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (i) rendered.push_back(' ');
            rendered += out[i];
        }
        return {std::move(rendered), corruptions};
    };

    std::vector<Variant> variants;
    variants.reserve(cfg.n_best);
    std::set<std::string> seen;
    for (uint32_t slot = 0; slot < cfg.n_best; ++slot) {
        Variant v = generate_variant();
        for (int attempt = 0; attempt < 9 && seen.count(v.rendered); ++attempt) {
            v = generate_variant();
        }
        seen.insert(v.rendered);
        variants.push_back(std::move(v));
    }
    std::stable_sort(variants.begin(), variants.end(),
                     [](const Variant& a, const Variant& b) {
                         return a.corruption_count < b.corruption_count;
                     });

    HypothesisSet hs;
    hs.utt_id = utt_id;
    hs.hypotheses.reserve(variants.size());
    for (auto& v : variants) hs.hypotheses.push_back(std::move(v.rendered));
    return hs;
}

} // namespace gecrag
