#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gecrag/normalizer.hpp"

namespace gecrag {

enum class Split { train, dev, test, validated_extra };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

/// One manifest row. `audio_ref` is opaque and never opened.
struct Utterance {
    std::string utt_id;
    std::string audio_ref;
    std::string ground_truth; // raw, not normalized
    uint32_t up_votes = 0;
    uint32_t down_votes = 0;
    Split split = Split::train;
};

/// One utterance's ordered N-best ASR transcriptions; index 0 is the 1-best.
/// Order reflects ASR posterior ranking and is never changed here.
struct HypothesisSet {
    std::string utt_id;
    std::vector<std::string> hypotheses;

    std::size_t n() const { return hypotheses.size(); }
    const std::string& best() const { return hypotheses.front(); }
};

/// Knowledge-base record: normalized hypotheses paired with the normalized
/// ground truth. retrieval_text is always the normalized 1-best.
struct KbEntry {
    std::string entry_id;
    std::vector<std::string> hypotheses;
    std::string ground_truth;
    std::string retrieval_text;
};

struct ManifestLoadResult {
    std::vector<Utterance> utterances;
    std::size_t dropped_empty_sentences = 0;
};

/// Parses a CommonVoice-style UTF-8 TSV. Required columns: path, sentence,
/// up_votes, down_votes; optional: utt_id (preferred id), split, client_id.
/// Rows with an empty sentence are dropped and counted, not errored.
ManifestLoadResult load_manifest(const std::string& path, Split default_split = Split::train);

inline constexpr std::size_t kDefaultBeamWidth = 5;

/// Parses UTF-8 JSON-lines, one {"utt_id": ..., "hypotheses": [...]} per line.
/// Hypothesis order is preserved exactly; 1 <= n <= beam_width is enforced.
std::vector<HypothesisSet> load_hypotheses(const std::string& path,
                                           std::size_t beam_width = kDefaultBeamWidth);

std::string hypotheses_to_jsonl(const std::vector<HypothesisSet>& sets);
void save_hypotheses(const std::string& path, const std::vector<HypothesisSet>& sets);

/// Keeps exactly the rows with down_votes == 0, up_votes >= 2 and
/// split == validated_extra; order preserved.
std::vector<Utterance> enlargement_filter(const std::vector<Utterance>& utts);

struct KbBuildResult {
    std::vector<KbEntry> entries;
    std::size_t dropped_empty = 0;
};

/// Normalizes everything and pairs each utterance with its hypothesis set.
/// Utterances without a hypothesis set are an error; entries whose normalized
/// ground truth or 1-best is empty are dropped and counted.
KbBuildResult build_kb_entries(const std::vector<Utterance>& utts,
                               const std::vector<HypothesisSet>& hyps,
                               const NormalizationConfig& cfg);

} // namespace gecrag
