#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gecrag/ingestion.hpp"

namespace gecrag {

/// Synthetic stand-in for a black-box ASR: corrupts ground-truth text into
/// plausible N-best hypothesis sets so the pipeline is demonstrable with no
/// audio, ASR or LLM.
struct ChannelConfig {
    std::unordered_map<std::string, std::vector<std::string>> confusion_table;
    double p_sub = 0.0;
    double p_del = 0.0;
    double p_ins = 0.0;
    uint32_t n_best = 5;
    uint64_t seed = 0;
};

void validate_channel_config(const ChannelConfig& cfg);

/// TSV: `term\tconfusable1,confusable2,...`; `#` starts a comment line.
std::unordered_map<std::string, std::vector<std::string>> load_confusion_table(
    const std::string& path);

/// Deterministic per-utterance seed split for parallel corpus corruption.
uint64_t mix_seed(uint64_t seed, std::string_view utt_id);

/// Per-sample event tallies, for statistical checks.
struct ChannelStats {
    uint64_t token_draws = 0;
    uint64_t substitutions = 0;
    uint64_t deletions = 0;
    uint64_t insertions = 0;
};

/// Generates n_best distinct-if-possible variants via per-token i.i.d.
/// substitute/delete/insert events, ordered by corruption count ascending
/// (fewest errors first, simulating posterior order). Fully deterministic
/// given (seed, utt_id). Uses its own portable draw functions so results do
/// not depend on the standard library build.
HypothesisSet corrupt(std::string_view normalized_truth, const ChannelConfig& cfg,
                      const std::string& utt_id = "", ChannelStats* stats = nullptr);

} // namespace gecrag
