#include <doctest.h>

#include <fstream>
#include <sstream>

#include "gecrag/errors.hpp"
#include "gecrag/prompt_builder.hpp"

using namespace gecrag;

namespace {

KbEntry exemplar(std::string id, std::vector<std::string> hyps, std::string truth) {
    KbEntry e;
    e.entry_id = std::move(id);
    e.hypotheses = std::move(hyps);
    e.ground_truth = std::move(truth);
    e.retrieval_text = e.hypotheses.front();
    return e;
}

std::string read_golden(const std::string& name) {
    const std::string path = std::string(GECRAG_SOURCE_DIR) + "/tests/golden/" + name;
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing golden file ", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// The fixed exemplars/query used by every golden file.
std::vector<KbEntry> golden_exemplars() {
    std::vector<KbEntry> out;
    for (int i = 1; i <= 5; ++i) {
        std::vector<std::string> hyps;
        for (int j = 1; j <= 5; ++j) {
            hyps.push_back("exemplar " + std::to_string(i) + " hypothesis " + std::to_string(j));
        }
        out.push_back(exemplar("kb" + std::to_string(i), hyps,
                               "exemplar " + std::to_string(i) + " truth"));
    }
    return out;
}

HypothesisSet golden_query() {
    HypothesisSet q;
    q.utt_id = "q1";
    for (int j = 1; j <= 5; ++j) q.hypotheses.push_back("query hypothesis " + std::to_string(j));
    return q;
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

} // namespace

TEST_CASE("one-shot one-best prompt renders the documented layout") {
    const std::vector<KbEntry> ex = {exemplar("e1", {"a p"}, "a b")};
    HypothesisSet q;
    q.utt_id = "q";
    q.hypotheses = {"x p"};
    const PromptBundle bundle = build_prompt(ex, q, 1, default_templates());
    CHECK(bundle.user_text ==
          "Example1:\n"
          "Predicted Transcriptions:\n"
          "<hypothesis1>a p</hypothesis1>\n"
          "=>Correct Transcription: a b\n"
          "Query:\n"
          "Predicted Transcriptions:\n"
          "<hypothesis1>x p</hypothesis1>\n"
          "=>Correct Transcription:");
    CHECK(bundle.k == 1);
    CHECK(bundle.retrieved_entry_ids == std::vector<std::string>{"e1"});
}

TEST_CASE("system text switches on n") {
    const PromptTemplates t = default_templates();
    HypothesisSet q;
    q.utt_id = "q";
    q.hypotheses = {"x"};
    const PromptBundle one = build_prompt({}, q, 1, t);
    CHECK(one.system_text.find("Provide only the correct transcription if needed") !=
          std::string::npos);
    const PromptBundle five = build_prompt({}, q, 5, t);
    CHECK(five.system_text.find("listed in order of their ASR posterior score") !=
          std::string::npos);
    CHECK(one.system_text != five.system_text);
}

TEST_CASE("golden prompts are byte-identical for the four pinned shapes") {
    const PromptTemplates t = default_templates();
    const auto ex = golden_exemplars();
    const auto q = golden_query();
    const struct {
        std::size_t k, n;
        const char* name;
    } cases[] = {{0, 1, "prompt_k0_n1.txt"},
                 {0, 5, "prompt_k0_n5.txt"},
                 {5, 1, "prompt_k5_n1.txt"},
                 {5, 5, "prompt_k5_n5.txt"}};
    for (const auto& c : cases) {
        const std::vector<KbEntry> shots(ex.begin(), ex.begin() + c.k);
        const PromptBundle bundle = build_prompt(shots, q, c.n, t);
        const std::string rendered =
            bundle.system_text + "\n---\n" + bundle.user_text + "\n";
        CHECK_MESSAGE(rendered == read_golden(c.name), "golden mismatch for ", c.name);
    }
}

TEST_CASE("user text always ends with the bare cue") {
    const PromptTemplates t = default_templates();
    const auto ex = golden_exemplars();
    const auto q = golden_query();
    for (const std::size_t k : {0UL, 2UL, 5UL}) {
        for (const std::size_t n : {1UL, 3UL, 5UL}) {
            const std::vector<KbEntry> shots(ex.begin(), ex.begin() + k);
            const PromptBundle bundle = build_prompt(shots, q, n, t);
            const std::string cue = "=>Correct Transcription:";
            REQUIRE(bundle.user_text.size() >= cue.size());
            CHECK(bundle.user_text.substr(bundle.user_text.size() - cue.size()) == cue);
        }
    }
}

TEST_CASE("example and hypothesis counts follow k and n") {
    const PromptTemplates t = default_templates();
    const auto ex = golden_exemplars();
    const auto q = golden_query();
    for (const std::size_t k : {0UL, 1UL, 3UL, 5UL}) {
        for (const std::size_t n : {1UL, 2UL, 5UL, 9UL}) {
            const std::vector<KbEntry> shots(ex.begin(), ex.begin() + k);
            const PromptBundle bundle = build_prompt(shots, q, n, t);
            CHECK(count_occurrences(bundle.user_text, "Example") == k);
            // Hypothesis lines in the query block: min(n, available).
            const std::size_t query_pos = bundle.user_text.find("Query:");
            REQUIRE(query_pos != std::string::npos);
            const std::string query_block = bundle.user_text.substr(query_pos);
            CHECK(count_occurrences(query_block, "<hypothesis") ==
                  std::min(n, q.hypotheses.size()));
        }
    }
}

TEST_CASE("vanilla and retrieval prompts share an identical query block") {
    const PromptTemplates t = default_templates();
    const auto ex = golden_exemplars();
    const auto q = golden_query();
    const PromptBundle vanilla = build_prompt({}, q, 5, t);
    const PromptBundle rag = build_prompt(ex, q, 5, t);
    const std::size_t pos = rag.user_text.find("Query:");
    REQUIRE(pos != std::string::npos);
    CHECK(rag.user_text.substr(pos) == vanilla.user_text);
    CHECK(vanilla.user_text.rfind("Query:", 0) == 0);
}

TEST_CASE("exemplars with fewer hypotheses than n emit what they have") {
    const std::vector<KbEntry> ex = {exemplar("e1", {"only one"}, "truth")};
    HypothesisSet q;
    q.utt_id = "q";
    q.hypotheses = {"h1", "h2"};
    const PromptBundle bundle = build_prompt(ex, q, 5, default_templates());
    const std::size_t query_pos = bundle.user_text.find("Query:");
    const std::string example_block = bundle.user_text.substr(0, query_pos);
    CHECK(count_occurrences(example_block, "<hypothesis") == 1);
    CHECK(count_occurrences(bundle.user_text.substr(query_pos), "<hypothesis") == 2);
}

TEST_CASE("invalid prompt requests are rejected") {
    HypothesisSet q;
    q.utt_id = "q";
    q.hypotheses = {"x"};
    CHECK_THROWS_AS(build_prompt({}, q, 0, default_templates()), DataError);
    HypothesisSet empty;
    empty.utt_id = "q";
    CHECK_THROWS_AS(build_prompt({}, empty, 1, default_templates()), DataError);
}

TEST_CASE("estimate_size counts Unicode scalar values") {
    PromptBundle empty;
    const SizeEstimate zero = estimate_size(empty, 10);
    CHECK(zero.within_limit);
    CHECK(zero.count == 0);

    PromptBundle eleven;
    eleven.user_text = "12345678901";
    const SizeEstimate over = estimate_size(eleven, 10);
    CHECK(!over.within_limit);
    CHECK(over.count == 11);

    // Multi-byte scalars count once each.
    PromptBundle fa;
    fa.system_text = "سلام"; // 4 scalars, 8 bytes
    fa.user_text = "ab";
    CHECK(estimate_size(fa, 6).count == 6);
    CHECK(estimate_size(fa, 6).within_limit);
    CHECK(!estimate_size(fa, 5).within_limit);
}

TEST_CASE("the golden one-shot prompt has the hand-counted size") {
    const std::vector<KbEntry> ex = {exemplar("e1", {"a p"}, "a b")};
    HypothesisSet q;
    q.utt_id = "q";
    q.hypotheses = {"x p"};
    const PromptBundle bundle = build_prompt(ex, q, 1, default_templates());
    // The 8-line user text counts to 184: 10+26+31+29+7+26+31+24.
    const SizeEstimate est = estimate_size(bundle, 100000);
    CHECK(est.count == bundle.system_text.size() + bundle.user_text.size()); // ASCII only
    CHECK(bundle.user_text.size() == 184);
    CHECK(est.count == default_templates().system_1best.size() + 184);
}

TEST_CASE("template files parse and match the built-in defaults") {
    const PromptTemplates file =
        load_templates(std::string(GECRAG_SOURCE_DIR) + "/data/templates/default.tmpl");
    const PromptTemplates code = default_templates();
    CHECK(file.system_1best == code.system_1best);
    CHECK(file.system_nbest == code.system_nbest);
    CHECK(file.example_header == code.example_header);
    CHECK(file.predicted_header == code.predicted_header);
    CHECK(file.hypothesis_line == code.hypothesis_line);
    CHECK(file.truth_line == code.truth_line);
    CHECK(file.query_header == code.query_header);
    CHECK(file.final_cue == code.final_cue);
}

TEST_CASE("template parsing rejects unknown and missing sections") {
    CHECK_THROWS_AS(parse_templates("[bogus]\nx\n"), ConfigError);
    CHECK_THROWS_AS(parse_templates("[system_1best]\nx\n"), ConfigError); // others missing
    CHECK_THROWS_AS(parse_templates("stray text\n"), ConfigError);
    CHECK_THROWS_AS(load_templates("/nonexistent/t.tmpl"), IoError);
}
