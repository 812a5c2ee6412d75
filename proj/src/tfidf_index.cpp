#include "gecrag/tfidf_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "gecrag/errors.hpp"
#include "gecrag/text.hpp"

namespace gecrag {

std::vector<std::string> tokenize(std::string_view normalized_text) {
    return text::split_tokens(normalized_text);
}

std::optional<uint32_t> Vocabulary::id_of(std::string_view term) const {
    const auto it = term_to_id.find(std::string(term));
    if (it == term_to_id.end()) return std::nullopt;
    return it->second;
}

void TfIdfIndex::rebuild_postings() {
    postings.assign(vocab.terms.size(), {});
    for (uint32_t doc = 0; doc < doc_vectors.size(); ++doc) {
        for (const auto& c : doc_vectors[doc]) {
            postings[c.term_id].emplace_back(doc, c.weight);
        }
    }
}

namespace {

double idf(uint64_t total_docs, uint64_t df) {
    return std::log((1.0 + static_cast<double>(total_docs)) / (1.0 + static_cast<double>(df))) +
           1.0;
}

SparseVector weigh_and_normalize(const std::map<uint32_t, uint64_t>& counts,
                                 const Vocabulary& vocab) {
    SparseVector vec;
    vec.reserve(counts.size());
    double norm_sq = 0.0;
    for (const auto& [term_id, tf] : counts) {
        const double w = static_cast<double>(tf) * idf(vocab.total_docs, vocab.doc_freq[term_id]);
        norm_sq += w * w;
        vec.push_back({term_id, w});
    }
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& c : vec) c.weight *= inv;
    }
    return vec;
}

} // namespace

TfIdfIndex build_index(const std::vector<KbEntry>& entries) {
    if (entries.empty()) throw DataError("cannot build an index from an empty entry list");

    std::vector<std::vector<std::string>> doc_terms;
    doc_terms.reserve(entries.size());
    std::map<std::string, uint64_t> df; // ordered: term ids follow byte order
    for (const auto& e : entries) {
        doc_terms.push_back(tokenize(e.retrieval_text));
        std::vector<std::string> uniq = doc_terms.back();
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (auto& t : uniq) ++df[t];
    }

    TfIdfIndex index;
    index.vocab.total_docs = entries.size();
    index.vocab.terms.reserve(df.size());
    index.vocab.doc_freq.reserve(df.size());
    for (const auto& [term, freq] : df) {
        index.vocab.term_to_id.emplace(term, static_cast<uint32_t>(index.vocab.terms.size()));
        index.vocab.terms.push_back(term);
        index.vocab.doc_freq.push_back(freq);
    }

    index.doc_vectors.reserve(entries.size());
    index.doc_to_entry.reserve(entries.size());
    index.empty_doc.reserve(entries.size());
    for (std::size_t d = 0; d < entries.size(); ++d) {
        std::map<uint32_t, uint64_t> counts;
        for (const auto& t : doc_terms[d]) ++counts[*index.vocab.id_of(t)];
        index.doc_vectors.push_back(weigh_and_normalize(counts, index.vocab));
        index.doc_to_entry.push_back(entries[d].entry_id);
        index.empty_doc.push_back(counts.empty() ? 1 : 0);
    }
    index.rebuild_postings();
    return index;
}

SparseVector vectorize_query(const TfIdfIndex& index, std::string_view normalized_text) {
    std::map<uint32_t, uint64_t> counts;
    for (const auto& t : tokenize(normalized_text)) {
        if (const auto id = index.vocab.id_of(t)) ++counts[*id];
    }
    return weigh_and_normalize(counts, index.vocab);
}

RetrievalResult retrieve(const TfIdfIndex& index, std::string_view normalized_query,
                         std::size_t k, const std::unordered_set<std::string>& exclude) {
    if (k < 1) throw DataError("retrieve requires k >= 1");

    RetrievalResult result;
    result.query_text = std::string(normalized_query);
    const SparseVector qv = vectorize_query(index, normalized_query);
    if (qv.empty()) return result;

    std::vector<double> score(index.num_docs(), 0.0);
    for (const auto& c : qv) {
        for (const auto& [doc, w] : index.postings[c.term_id]) {
            score[doc] += c.weight * w;
        }
    }

    std::vector<uint32_t> candidates;
    candidates.reserve(index.num_docs());
    for (uint32_t doc = 0; doc < index.num_docs(); ++doc) {
        if (index.empty_doc[doc]) continue;
        if (!exclude.empty() && exclude.count(index.doc_to_entry[doc])) continue;
        candidates.push_back(doc);
    }
    std::sort(candidates.begin(), candidates.end(), [&](uint32_t a, uint32_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return index.doc_to_entry[a] < index.doc_to_entry[b];
    });
    if (candidates.size() > k) candidates.resize(k);

    result.items.reserve(candidates.size());
    for (const uint32_t doc : candidates) {
        result.items.push_back({index.doc_to_entry[doc], score[doc]});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Container format (see docs/formats.md): little-endian, FNV-1a-64 checksum
// over everything between the magic and the trailer.
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'G', 'E', 'C', 'R', 'A', 'G', 'K', 'B'};
constexpr uint32_t kFormatVersion = 1;

class Writer {
public:
    void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        u64(bits);
    }
    void str(std::string_view s) {
        u32(static_cast<uint32_t>(s.size()));
        buf_.append(s);
    }
    const std::string& bytes() const { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(std::string_view data, const std::string& path) : data_(data), path_(path) {}

    uint8_t u8() { return static_cast<uint8_t>(take(1)[0]); }
    uint32_t u32() {
        const std::string_view b = take(4);
        uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
        return v;
    }
    uint64_t u64() {
        const std::string_view b = take(8);
        uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
        return v;
    }
    double f64() {
        const uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::string str() {
        const uint32_t len = u32();
        return std::string(take(len));
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::string_view take(std::size_t n) {
        if (pos_ + n > data_.size()) throw IoError(path_ + ": truncated index file");
        const std::string_view out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::string_view data_;
    std::size_t pos_ = 0;
    std::string path_;
};

void write_index_payload(Writer& w, const TfIdfIndex& index) {
    w.str(index.scheme_id);
    w.u64(index.vocab.total_docs);
    w.u64(index.vocab.terms.size());
    for (std::size_t t = 0; t < index.vocab.terms.size(); ++t) {
        w.str(index.vocab.terms[t]);
        w.u64(index.vocab.doc_freq[t]);
    }
    w.u64(index.num_docs());
    for (std::size_t d = 0; d < index.num_docs(); ++d) {
        w.str(index.doc_to_entry[d]);
        w.u8(index.empty_doc[d]);
        w.u32(static_cast<uint32_t>(index.doc_vectors[d].size()));
        for (const auto& c : index.doc_vectors[d]) {
            w.u32(c.term_id);
            w.f64(c.weight);
        }
    }
}

TfIdfIndex read_index_payload(Reader& r, const std::string& path) {
    TfIdfIndex index;
    index.scheme_id = r.str();
    if (index.scheme_id != kTfIdfSchemeId) {
        throw IoError(path + ": weighting scheme mismatch: file has '" + index.scheme_id +
                      "', this build expects '" + kTfIdfSchemeId + "'");
    }
    index.vocab.total_docs = r.u64();
    const uint64_t vocab_size = r.u64();
    index.vocab.terms.reserve(vocab_size);
    index.vocab.doc_freq.reserve(vocab_size);
    for (uint64_t t = 0; t < vocab_size; ++t) {
        std::string term = r.str();
        const uint64_t df = r.u64();
        if (df < 1 || df > index.vocab.total_docs) {
            throw IoError(path + ": corrupt vocabulary (df out of range)");
        }
        index.vocab.term_to_id.emplace(term, static_cast<uint32_t>(t));
        index.vocab.terms.push_back(std::move(term));
        index.vocab.doc_freq.push_back(df);
    }
    const uint64_t num_docs = r.u64();
    index.doc_vectors.reserve(num_docs);
    index.doc_to_entry.reserve(num_docs);
    index.empty_doc.reserve(num_docs);
    for (uint64_t d = 0; d < num_docs; ++d) {
        index.doc_to_entry.push_back(r.str());
        index.empty_doc.push_back(r.u8());
        const uint32_t nnz = r.u32();
        SparseVector vec;
        vec.reserve(nnz);
        for (uint32_t i = 0; i < nnz; ++i) {
            const uint32_t term_id = r.u32();
            const double weight = r.f64();
            if (term_id >= vocab_size) throw IoError(path + ": corrupt doc vector (bad term id)");
            vec.push_back({term_id, weight});
        }
        index.doc_vectors.push_back(std::move(vec));
    }
    index.rebuild_postings();
    return index;
}

void write_entries_payload(Writer& w, const std::vector<KbEntry>& entries) {
    w.u64(entries.size());
    for (const auto& e : entries) {
        w.str(e.entry_id);
        w.str(e.ground_truth);
        w.u32(static_cast<uint32_t>(e.hypotheses.size()));
        for (const auto& h : e.hypotheses) w.str(h);
    }
}

std::vector<KbEntry> read_entries_payload(Reader& r) {
    const uint64_t count = r.u64();
    std::vector<KbEntry> entries;
    entries.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        KbEntry e;
        e.entry_id = r.str();
        e.ground_truth = r.str();
        const uint32_t n = r.u32();
        e.hypotheses.reserve(n);
        for (uint32_t h = 0; h < n; ++h) e.hypotheses.push_back(r.str());
        if (!e.hypotheses.empty()) e.retrieval_text = e.hypotheses.front();
        entries.push_back(std::move(e));
    }
    return entries;
}

void write_container(const std::string& path, const TfIdfIndex& index,
                     const std::vector<KbEntry>* entries) {
    Writer payload;
    payload.u32(kFormatVersion);
    write_index_payload(payload, index);
    payload.u8(entries ? 1 : 0);
    if (entries) write_entries_payload(payload, *entries);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write index file: " + path);
    out.write(kMagic, sizeof(kMagic));
    out.write(payload.bytes().data(), static_cast<std::streamsize>(payload.bytes().size()));
    const uint64_t checksum = text::fnv1a64(payload.bytes());
    for (int i = 0; i < 8; ++i) out.put(static_cast<char>((checksum >> (8 * i)) & 0xFF));
    if (!out) throw IoError("failed writing index file: " + path);
}

std::string read_container_payload(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open index file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string data = ss.str();
    if (data.size() < sizeof(kMagic) + 8 + 4 ||
        std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
        throw IoError(path + ": not a gecrag index file (bad magic)");
    }
    const std::string payload = data.substr(sizeof(kMagic), data.size() - sizeof(kMagic) - 8);
    uint64_t stored = 0;
    for (int i = 7; i >= 0; --i) {
        stored = (stored << 8) | static_cast<unsigned char>(data[data.size() - 8 + i]);
    }
    if (text::fnv1a64(payload) != stored) throw IoError(path + ": checksum mismatch");
    return payload;
}

std::pair<TfIdfIndex, std::optional<std::vector<KbEntry>>> load_container(
    const std::string& path) {
    const std::string payload = read_container_payload(path);
    Reader r(payload, path);
    const uint32_t version = r.u32();
    if (version != kFormatVersion) {
        throw IoError(path + ": unsupported index format version " + std::to_string(version));
    }
    TfIdfIndex index = read_index_payload(r, path);
    std::optional<std::vector<KbEntry>> entries;
    if (r.u8() == 1) entries = read_entries_payload(r);
    return {std::move(index), std::move(entries)};
}

} // namespace

void save_index(const TfIdfIndex& index, const std::string& path) {
    write_container(path, index, nullptr);
}

TfIdfIndex load_index(const std::string& path) {
    return load_container(path).first;
}

const KbEntry* KnowledgeBase::find(std::string_view entry_id) const {
    const auto it = by_id_.find(std::string(entry_id));
    return it == by_id_.end() ? nullptr : &entries[it->second];
}

void KnowledgeBase::reindex() {
    by_id_.clear();
    by_id_.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) by_id_.emplace(entries[i].entry_id, i);
}

KnowledgeBase build_knowledge_base(std::vector<KbEntry> entries) {
    KnowledgeBase kb;
    kb.index = build_index(entries);
    kb.entries = std::move(entries);
    kb.reindex();
    return kb;
}

void save_knowledge_base(const KnowledgeBase& kb, const std::string& path) {
    write_container(path, kb.index, &kb.entries);
}

KnowledgeBase load_knowledge_base(const std::string& path) {
    auto [index, entries] = load_container(path);
    if (!entries) {
        throw IoError(path + ": file holds a bare index, not a knowledge base (no entry payload)");
    }
    KnowledgeBase kb;
    kb.index = std::move(index);
    kb.entries = std::move(*entries);
    kb.reindex();
    return kb;
}

} // namespace gecrag
