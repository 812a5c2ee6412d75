#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gecrag/error_channel.hpp"
#include "gecrag/errors.hpp"
#include "gecrag/generator.hpp"
#include "gecrag/normalizer.hpp"
#include "gecrag/prompt_builder.hpp"
#include "gecrag/run_manifest.hpp"
#include "gecrag/tfidf_index.hpp"
#include "gecrag/wer_eval.hpp"

namespace py = pybind11;
using namespace gecrag;

PYBIND11_MODULE(_core, m) {
    m.doc() = "ASR error correction via TF-IDF retrieval-augmented generation";
    m.attr("__version__") = tool_version();

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DataError>(m, "DataError");
    py::register_exception<IoError>(m, "IoError");

    py::class_<NormalizationConfig>(m, "NormalizationConfig")
        .def(py::init<>())
        .def("empty", &NormalizationConfig::empty);
    m.def("load_normalization_config", &load_normalization_config, py::arg("path"));
    m.def("normalize", &normalize, py::arg("text"), py::arg("config"));
    m.def("tokenize", [](const std::string& s) { return tokenize(s); }, py::arg("text"));

    py::class_<HypothesisSet>(m, "HypothesisSet")
        .def(py::init([](std::string utt_id, std::vector<std::string> hypotheses) {
                 return HypothesisSet{std::move(utt_id), std::move(hypotheses)};
             }),
             py::arg("utt_id"), py::arg("hypotheses"))
        .def_readwrite("utt_id", &HypothesisSet::utt_id)
        .def_readwrite("hypotheses", &HypothesisSet::hypotheses);

    py::class_<KbEntry>(m, "KbEntry")
        .def(py::init([](std::string entry_id, std::vector<std::string> hypotheses,
                         std::string ground_truth) {
                 KbEntry e;
                 e.entry_id = std::move(entry_id);
                 e.hypotheses = std::move(hypotheses);
                 e.ground_truth = std::move(ground_truth);
                 if (e.hypotheses.empty()) throw DataError("KbEntry needs >= 1 hypothesis");
                 e.retrieval_text = e.hypotheses.front();
                 return e;
             }),
             py::arg("entry_id"), py::arg("hypotheses"), py::arg("ground_truth"))
        .def_readonly("entry_id", &KbEntry::entry_id)
        .def_readonly("hypotheses", &KbEntry::hypotheses)
        .def_readonly("ground_truth", &KbEntry::ground_truth)
        .def_readonly("retrieval_text", &KbEntry::retrieval_text);

    py::class_<ScoredEntry>(m, "ScoredEntry")
        .def_readonly("entry_id", &ScoredEntry::entry_id)
        .def_readonly("score", &ScoredEntry::score);

    py::class_<RetrievalResult>(m, "RetrievalResult")
        .def_readonly("items", &RetrievalResult::items)
        .def_readonly("query_text", &RetrievalResult::query_text);

    py::class_<TfIdfIndex>(m, "TfIdfIndex")
        .def_property_readonly("num_docs", &TfIdfIndex::num_docs)
        .def_property_readonly("scheme_id",
                               [](const TfIdfIndex& i) { return i.scheme_id; })
        .def_property_readonly("vocab_size",
                               [](const TfIdfIndex& i) { return i.vocab.terms.size(); });
    m.def("build_index", &build_index, py::arg("entries"));
    m.def(
        "retrieve",
        [](const TfIdfIndex& index, const std::string& query, std::size_t k,
           const std::vector<std::string>& exclude) {
            return retrieve(index, query, k,
                            std::unordered_set<std::string>(exclude.begin(), exclude.end()));
        },
        py::arg("index"), py::arg("query"), py::arg("k"),
        py::arg("exclude") = std::vector<std::string>{});
    m.def("save_index", &save_index, py::arg("index"), py::arg("path"));
    m.def("load_index", &load_index, py::arg("path"));

    py::class_<PromptTemplates>(m, "PromptTemplates");
    m.def("default_templates", &default_templates);
    m.def("load_templates", &load_templates, py::arg("path"));

    py::class_<PromptBundle>(m, "PromptBundle")
        .def_readonly("system_text", &PromptBundle::system_text)
        .def_readonly("user_text", &PromptBundle::user_text)
        .def_readonly("k", &PromptBundle::k)
        .def_readonly("n", &PromptBundle::n)
        .def_readonly("retrieved_entry_ids", &PromptBundle::retrieved_entry_ids)
        .def_readonly("query_utt_id", &PromptBundle::query_utt_id);
    m.def("build_prompt", &build_prompt, py::arg("exemplars"), py::arg("query"), py::arg("n"),
          py::arg("templates"));

    m.def("postprocess_output", &postprocess_output, py::arg("raw"), py::arg("config"));

    m.def(
        "align",
        [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
            const AlignmentResult r = align(ref, hyp);
            return py::make_tuple(r.substitutions, r.deletions, r.insertions);
        },
        py::arg("ref_tokens"), py::arg("hyp_tokens"),
        "Returns (substitutions, deletions, insertions).");

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("condition", &EvalReport::condition)
        .def_readonly("corpus_wer", &EvalReport::corpus_wer);
    m.def(
        "score_corpus",
        [](const std::vector<std::tuple<std::string, std::string, std::string>>& pairs,
           const NormalizationConfig& cfg, const std::string& condition) {
            std::vector<ScoredPair> scored;
            scored.reserve(pairs.size());
            for (const auto& [utt_id, ref, hyp] : pairs) scored.push_back({utt_id, ref, hyp});
            return score_corpus(scored, cfg, condition);
        },
        py::arg("pairs"), py::arg("config"), py::arg("condition") = "condition",
        "pairs: list of (utt_id, ref, hyp) tuples.");

    m.def(
        "corrupt",
        [](const std::string& truth, double p_sub, double p_del, double p_ins, uint32_t n_best,
           uint64_t seed, const std::unordered_map<std::string, std::vector<std::string>>& table,
           const std::string& utt_id) {
            ChannelConfig cfg;
            cfg.confusion_table = table;
            cfg.p_sub = p_sub;
            cfg.p_del = p_del;
            cfg.p_ins = p_ins;
            cfg.n_best = n_best;
            cfg.seed = seed;
            return corrupt(truth, cfg, utt_id).hypotheses;
        },
        py::arg("truth"), py::arg("p_sub") = 0.15, py::arg("p_del") = 0.05,
        py::arg("p_ins") = 0.05, py::arg("n_best") = 5, py::arg("seed") = 0,
        py::arg("confusion_table") = std::unordered_map<std::string, std::vector<std::string>>{},
        py::arg("utt_id") = "");
}
