#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gecrag/normalizer.hpp"

namespace gecrag {

enum class EditOp : uint8_t { match, substitution, deletion, insertion };

struct AlignmentStep {
    EditOp op;
    int ref_index; // -1 for insertions
    int hyp_index; // -1 for deletions
};

struct AlignmentResult {
    uint64_t substitutions = 0;
    uint64_t deletions = 0;
    uint64_t insertions = 0;
    std::vector<AlignmentStep> trace;

    uint64_t total_edits() const { return substitutions + deletions + insertions; }
};

/// Minimum-edit-distance word alignment with unit costs. The edit total
/// S+D+I is the unique minimum; among minimal alignments the one with the
/// fewest substitutions (equivalently, the most matches) is chosen, which
/// makes the (S, D, I) split canonical and symmetric: swapping ref and hyp
/// swaps D and I and preserves S. Trace ties prefer
/// match > substitution > deletion > insertion.
AlignmentResult align(const std::vector<std::string>& ref_tokens,
                      const std::vector<std::string>& hyp_tokens);

struct UttScore {
    std::string utt_id;
    uint64_t substitutions = 0;
    uint64_t deletions = 0;
    uint64_t insertions = 0;
    uint64_t ref_len = 0;
    double wer = 0.0; // (S+D+I)/N; may exceed 1 for insertion-heavy hypotheses
};

struct EvalReport {
    std::string condition;
    double corpus_wer = 0.0; // pooled: sum(S+D+I) / sum(N), never a mean of WERs
    uint64_t total_substitutions = 0;
    uint64_t total_deletions = 0;
    uint64_t total_insertions = 0;
    uint64_t total_ref_len = 0;
    std::vector<UttScore> utterances;
    uint64_t fallback_count = 0; // records that fell back to the baseline
};

struct ScoredPair {
    std::string utt_id;
    std::string ref;
    std::string hyp;
};

/// Normalizes both sides with cfg, tokenizes, aligns and pools. Every
/// reference must be non-empty after normalization.
EvalReport score_corpus(const std::vector<ScoredPair>& pairs, const NormalizationConfig& cfg,
                        const std::string& condition);

struct ComparisonRow {
    std::string condition;
    double corpus_wer;
    /// (baseline - cond) / baseline against the first report; absent for the
    /// baseline row and when only one report is given.
    std::optional<double> relative_reduction;
};

/// All reports must cover the same utterance set; the first is the baseline.
std::vector<ComparisonRow> compare_conditions(const std::vector<EvalReport>& reports);

std::string render_comparison_table(const std::vector<ComparisonRow>& rows);

std::string report_to_json(const EvalReport& report);
std::string comparison_to_json(const std::vector<EvalReport>& reports,
                               const std::vector<ComparisonRow>& rows);

} // namespace gecrag
