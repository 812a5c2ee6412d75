#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gecrag/ingestion.hpp"

namespace gecrag {

/// Text pieces the K-shot N-best prompt is rendered from. All pieces are
/// data, not code, so they can be localized; the shipped defaults are at
/// data/templates/default.tmpl. Recognized placeholders: {example_index},
/// {hyp_index}, {hyp_text}, {truth}.
struct PromptTemplates {
    std::string system_1best;     // system message used when n == 1
    std::string system_nbest;     // system message used when n > 1
    std::string example_header;   // "Example{example_index}:"
    std::string predicted_header; // "Predicted Transcriptions:"
    std::string hypothesis_line;  // "<hypothesis{hyp_index}>{hyp_text}</hypothesis{hyp_index}>"
    std::string truth_line;       // "=>Correct Transcription: {truth}"
    std::string query_header;     // "Query:"
    std::string final_cue;        // "=>Correct Transcription:"
};

PromptTemplates default_templates();

/// Sectioned UTF-8 template file: a line "[name]" starts a section, the
/// section body is everything up to the next header, minus one trailing
/// newline. All eight sections are required.
PromptTemplates load_templates(const std::string& path);
PromptTemplates parse_templates(std::string_view content, const std::string& origin = "<string>");

/// Fully rendered prompt. user_text always ends with the bare final cue.
struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::size_t k = 0; // shots used == retrieved_entry_ids.size()
    std::size_t n = 1; // requested hypotheses per block
    std::vector<std::string> retrieved_entry_ids;
    std::string query_utt_id;
};

/// Renders the K-shot N-best prompt. Exemplars must already be in retrieval
/// rank order (rank 1 first); k == exemplars.size() and k == 0 is the
/// vanilla (no-shot) mode. Each block shows min(n, available) hypotheses.
/// Rendering is byte-deterministic; lines are joined with "\n".
PromptBundle build_prompt(const std::vector<KbEntry>& exemplars, const HypothesisSet& query,
                          std::size_t n, const PromptTemplates& templates);

struct SizeEstimate {
    bool within_limit;
    std::size_t count; // Unicode scalar values in system_text + user_text
};

SizeEstimate estimate_size(const PromptBundle& bundle, std::size_t limit);

} // namespace gecrag
