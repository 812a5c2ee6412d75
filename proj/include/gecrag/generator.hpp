#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gecrag/normalizer.hpp"
#include "gecrag/prompt_builder.hpp"
#include "gecrag/tfidf_index.hpp"

namespace gecrag {

enum class Backend { remote, mock_echo, mock_oracle };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct GeneratorConfig {
    Backend backend = Backend::mock_echo;
    std::string endpoint_url;      // remote only, http://host:port/path
    std::string model_name = "gpt-4o";
    double temperature = 0.0;
    std::size_t max_output_chars = 8192;
    std::chrono::milliseconds request_timeout{30000};
    int max_retries = 3;
    int parallelism_limit = 4;
    double oracle_score_threshold = 0.5; // mock_oracle only
    std::chrono::milliseconds retry_backoff_base{250};
    std::string api_key; // from GECRAG_API_KEY; never logged or serialized
};

/// Validates backend-specific requirements (endpoint + credential for remote).
void validate_generator_config(const GeneratorConfig& cfg);

/// Per-query facts the offline mock backends need: the remote backend uses
/// only the rendered bundle.
struct GenerationContext {
    std::string baseline_1best; // query's raw 1-best
    std::optional<std::string> top_exemplar_truth;
    double top_score = 0.0;
};

/// Raw generator output. remote POSTs a chat-completions request and returns
/// choices[0].message.content verbatim (truncated to max_output_chars
/// scalars); mock_echo returns the query's 1-best unchanged; mock_oracle
/// returns the rank-1 exemplar's ground truth when its retrieval score is at
/// least oracle_score_threshold, else the 1-best. Remote failures retry up to
/// max_retries with exponential backoff, then throw GenerationError.
struct GenerateOutcome {
    std::string raw;
    int attempts = 1;
};
GenerateOutcome generate(const PromptBundle& bundle, const GenerationContext& ctx,
                         const GeneratorConfig& cfg);

/// Canonical request body for the remote wire format: compact JSON with
/// object keys in lexicographic order.
std::string render_chat_request(const PromptBundle& bundle, const GeneratorConfig& cfg);

/// Defends against prompt framing echoed back by the model: strips markdown
/// fences and surrounding quotes, removes an echoed "Correct Transcription:"
/// prefix (taking that line), then normalizes. May return an empty string;
/// the caller applies the baseline fallback.
std::string postprocess_output(std::string_view raw, const NormalizationConfig& cfg);

struct CorrectionRecord {
    std::string utt_id;
    std::string baseline_text;  // normalized 1-best
    std::string corrected_text; // never empty: falls back to baseline_text
    Backend backend_used = Backend::mock_echo;
    std::vector<std::string> retrieved_entry_ids;
    std::chrono::milliseconds latency{0};
    int attempts = 1;
    bool fallback = false;     // baseline substituted (empty output or failure)
    std::string error;         // empty when the request succeeded
};

struct CorrectionTask {
    HypothesisSet query;
    RetrievalResult retrieval;
};

struct BatchOptions {
    std::size_t n = 1; // hypotheses per prompt block
};

/// Runs retrieval-conditioned generation for every task, at most
/// parallelism_limit requests in flight. Records come back in input order
/// regardless of completion order; per-utterance failures fall back to the
/// baseline and are flagged. Throws only if every request failed.
std::vector<CorrectionRecord> correct_batch(const std::vector<CorrectionTask>& tasks,
                                            const KnowledgeBase& kb,
                                            const GeneratorConfig& gen_cfg,
                                            const NormalizationConfig& norm_cfg,
                                            const PromptTemplates& templates,
                                            const BatchOptions& opts);

std::string correction_records_to_jsonl(const std::vector<CorrectionRecord>& records);
void save_correction_records(const std::string& path,
                             const std::vector<CorrectionRecord>& records);
std::vector<CorrectionRecord> load_correction_records(const std::string& path);

} // namespace gecrag
