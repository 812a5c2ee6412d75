#include "gecrag/prompt_builder.hpp"

#include <fstream>
#include <sstream>

#include "gecrag/errors.hpp"
#include "gecrag/text.hpp"

namespace gecrag {

namespace {

constexpr const char* kSystem1Best =
    "You are a transcription error correction assistant and linguistics expert, specializing in "
    "improving transcriptions produced by Automatic Speech Recognition (ASR) systems.\n"
    "Your task is to identify and correct errors in transcriptions, with a focus on likely "
    "misinterpretations, such as homophones, phonetically similar words, and contextually "
    "inappropriate word choices.\n"
    "Use your linguistic expertise to analyze and enhance transcription accuracy while "
    "considering the intended meaning.\n"
    "Provide only the correct transcription if needed, or repeat the text exactly if no "
    "correction is needed.\n"
    "Do not include any explanations or additional commentary.";

constexpr const char* kSystemNBest =
    "You are a transcription error correction assistant and linguistics expert, specializing in "
    "improving transcriptions produced by Automatic Speech Recognition (ASR) systems.\n"
    "Your task is to perform error correction based on the top N outputs generated by the ASR "
    "system, which are listed in order of their ASR posterior score.\n"
    "Identify and correct errors in the transcriptions, focusing on likely misinterpretations "
    "such as homophones, phonetically similar words, and contextually inappropriate word "
    "choices.\n"
    "Analyze the linguistic context and provide the corrected ASR hypothesis directly without "
    "any explanations or additional commentary.";

std::string index_str(std::size_t i) {
    return std::to_string(i);
}

void render_hypothesis_block(std::string& out, const PromptTemplates& t,
                             const std::vector<std::string>& hypotheses, std::size_t n) {
    out += t.predicted_header;
    out.push_back('\n');
    const std::size_t shown = std::min(n, hypotheses.size());
    for (std::size_t j = 0; j < shown; ++j) {
        std::string line = text::replace_all(t.hypothesis_line, "{hyp_index}", index_str(j + 1));
        line = text::replace_all(line, "{hyp_text}", hypotheses[j]);
        out += line;
        out.push_back('\n');
    }
}

} // namespace

PromptTemplates default_templates() {
    PromptTemplates t;
    t.system_1best = kSystem1Best;
    t.system_nbest = kSystemNBest;
    t.example_header = "Example{example_index}:";
    t.predicted_header = "Predicted Transcriptions:";
    t.hypothesis_line = "<hypothesis{hyp_index}>{hyp_text}</hypothesis{hyp_index}>";
    t.truth_line = "=>Correct Transcription: {truth}";
    t.query_header = "Query:";
    t.final_cue = "=>Correct Transcription:";
    return t;
}

PromptTemplates parse_templates(std::string_view content, const std::string& origin) {
    std::vector<std::pair<std::string, std::string>> sections;
    std::string* current = nullptr;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
        const std::size_t eol = content.find('\n', pos);
        std::string_view line;
        if (eol == std::string_view::npos) {
            line = content.substr(pos);
            pos = content.size();
        } else {
            line = content.substr(pos, eol - pos);
            pos = eol + 1;
        }
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.size() >= 2 && line.front() == '[' && line.back() == ']') {
            sections.emplace_back(std::string(line.substr(1, line.size() - 2)), "");
            current = &sections.back().second;
            continue;
        }
        if (!current) {
            if (line.empty()) continue;
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": text before the first [section] header");
        }
        current->append(line);
        current->push_back('\n');
    }

    PromptTemplates t;
    bool have[8] = {};
    for (auto& [name, body] : sections) {
        if (!body.empty() && body.back() == '\n') body.pop_back();
        std::string* field = nullptr;
        if (name == "system_1best") { field = &t.system_1best; have[0] = true; }
        else if (name == "system_nbest") { field = &t.system_nbest; have[1] = true; }
        else if (name == "example_header") { field = &t.example_header; have[2] = true; }
        else if (name == "predicted_header") { field = &t.predicted_header; have[3] = true; }
        else if (name == "hypothesis_line") { field = &t.hypothesis_line; have[4] = true; }
        else if (name == "truth_line") { field = &t.truth_line; have[5] = true; }
        else if (name == "query_header") { field = &t.query_header; have[6] = true; }
        else if (name == "final_cue") { field = &t.final_cue; have[7] = true; }
        else throw ConfigError(origin + ": unknown template section [" + name + "]");
        *field = std::move(body);
    }
    static constexpr const char* names[8] = {
        "system_1best", "system_nbest", "example_header", "predicted_header",
        "hypothesis_line", "truth_line", "query_header", "final_cue"};
    for (int i = 0; i < 8; ++i) {
        if (!have[i]) {
            throw ConfigError(origin + ": missing template section [" + std::string(names[i]) +
                              "]");
        }
    }
    return t;
}

PromptTemplates load_templates(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open template file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_templates(ss.str(), path);
}

PromptBundle build_prompt(const std::vector<KbEntry>& exemplars, const HypothesisSet& query,
                          std::size_t n, const PromptTemplates& templates) {
    if (n < 1) throw DataError("build_prompt requires n >= 1");
    if (query.hypotheses.empty()) {
        throw DataError("build_prompt: query '" + query.utt_id + "' has no hypotheses");
    }

    PromptBundle bundle;
    bundle.k = exemplars.size();
    bundle.n = n;
    bundle.query_utt_id = query.utt_id;
    bundle.system_text = (n == 1) ? templates.system_1best : templates.system_nbest;

    std::string& user = bundle.user_text;
    for (std::size_t i = 0; i < exemplars.size(); ++i) {
        const KbEntry& ex = exemplars[i];
        bundle.retrieved_entry_ids.push_back(ex.entry_id);
        user += text::replace_all(templates.example_header, "{example_index}", index_str(i + 1));
        user.push_back('\n');
        render_hypothesis_block(user, templates, ex.hypotheses, n);
        user += text::replace_all(templates.truth_line, "{truth}", ex.ground_truth);
        user.push_back('\n');
    }
    user += templates.query_header;
    user.push_back('\n');
    render_hypothesis_block(user, templates, query.hypotheses, n);
    user += templates.final_cue;
    return bundle;
}

SizeEstimate estimate_size(const PromptBundle& bundle, std::size_t limit) {
    const std::size_t count =
        text::count_scalars(bundle.system_text) + text::count_scalars(bundle.user_text);
    return {count <= limit, count};
}

} // namespace gecrag
