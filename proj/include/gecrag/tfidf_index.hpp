#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gecrag/ingestion.hpp"

namespace gecrag {

/// Identifies the exact weighting formula. Persisted with every index so a
/// future variant cannot silently mix with old artifacts.
/// tfidf-v1: weight(t,d) = tf(t,d) * (ln((1+D)/(1+df(t))) + 1), tf = raw
/// count, followed by L2 normalization of each document vector.
inline constexpr const char* kTfIdfSchemeId = "tfidf-v1";

/// Splits normalized text into terms on Unicode whitespace.
/// ZWNJ-joined compounds stay one term.
std::vector<std::string> tokenize(std::string_view normalized_text);

struct Vocabulary {
    /// Terms sorted lexicographically (by UTF-8 bytes); index = term_id.
    /// Sorting makes term ids, weights and score summation order canonical
    /// regardless of document insertion order.
    std::vector<std::string> terms;
    std::vector<uint64_t> doc_freq; // per term_id, 1 <= df <= total_docs
    uint64_t total_docs = 0;
    std::unordered_map<std::string, uint32_t> term_to_id;

    std::optional<uint32_t> id_of(std::string_view term) const;
};

struct SparseComponent {
    uint32_t term_id;
    double weight; // > 0 for every stored component
};

using SparseVector = std::vector<SparseComponent>; // sorted by term_id

struct TfIdfIndex {
    Vocabulary vocab;
    std::vector<SparseVector> doc_vectors;   // each non-empty vector has L2 norm 1
    std::vector<std::string> doc_to_entry;   // doc_id (dense 0..D-1) -> entry_id
    std::vector<uint8_t> empty_doc;          // flagged docs can never be retrieved
    std::string scheme_id = kTfIdfSchemeId;

    // term_id -> (doc_id, weight), doc_ids ascending. Derived, not serialized.
    std::vector<std::vector<std::pair<uint32_t, double>>> postings;

    std::size_t num_docs() const { return doc_vectors.size(); }
    void rebuild_postings();
};

struct ScoredEntry {
    std::string entry_id;
    double score;
};

struct RetrievalResult {
    std::vector<ScoredEntry> items; // scores non-increasing, no duplicate ids
    std::string query_text;
};

TfIdfIndex build_index(const std::vector<KbEntry>& entries);

/// Same tf and idf formulas using the index's stored statistics; terms absent
/// from the vocabulary are ignored; an all-OOV query yields an empty vector.
SparseVector vectorize_query(const TfIdfIndex& index, std::string_view normalized_text);

/// Cosine scores over all retrievable documents, sorted by score descending
/// with ties broken by ascending entry_id. A zero query vector yields an
/// empty result.
RetrievalResult retrieve(const TfIdfIndex& index, std::string_view normalized_query,
                         std::size_t k,
                         const std::unordered_set<std::string>& exclude = {});

void save_index(const TfIdfIndex& index, const std::string& path);
TfIdfIndex load_index(const std::string& path);

/// Index plus the entry payloads needed to render prompts. Saved to the same
/// container format as a bare index, with the entries section populated.
struct KnowledgeBase {
    TfIdfIndex index;
    std::vector<KbEntry> entries; // aligned with doc ids

    const KbEntry* find(std::string_view entry_id) const;
    void reindex();

private:
    std::unordered_map<std::string, std::size_t> by_id_;
};

KnowledgeBase build_knowledge_base(std::vector<KbEntry> entries);
void save_knowledge_base(const KnowledgeBase& kb, const std::string& path);
KnowledgeBase load_knowledge_base(const std::string& path);

} // namespace gecrag
