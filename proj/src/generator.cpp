#include "gecrag/generator.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "gecrag/errors.hpp"
#include "gecrag/text.hpp"

namespace gecrag {

std::string to_string(Backend b) {
    switch (b) {
        case Backend::remote: return "remote";
        case Backend::mock_echo: return "mock_echo";
        case Backend::mock_oracle: return "mock_oracle";
    }
    return "mock_echo";
}

Backend backend_from_string(const std::string& s) {
    if (s == "remote") return Backend::remote;
    if (s == "mock_echo") return Backend::mock_echo;
    if (s == "mock_oracle") return Backend::mock_oracle;
    throw ConfigError("unknown backend: '" + s + "' (expected remote, mock_echo or mock_oracle)");
}

void validate_generator_config(const GeneratorConfig& cfg) {
    if (cfg.temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (cfg.parallelism_limit < 1) throw ConfigError("parallelism limit must be >= 1");
    if (cfg.max_retries < 0) throw ConfigError("max retries must be >= 0");
    if (cfg.backend == Backend::remote) {
        if (cfg.endpoint_url.empty()) throw ConfigError("remote backend requires an endpoint URL");
        if (cfg.api_key.empty()) {
            throw ConfigError("remote backend requires a credential in GECRAG_API_KEY");
        }
    }
}

namespace {

struct ParsedUrl {
    std::string base; // scheme://host[:port]
    std::string path; // starts with '/'
};

ParsedUrl parse_url(const std::string& url) {
    const std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint URL must include a scheme: " + url);
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme == "https") {
        throw ConfigError("this build speaks plain http only; point the endpoint at an http "
                          "gateway or local proxy");
    }
    if (scheme != "http") throw ConfigError("unsupported URL scheme: " + scheme);
    const std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string truncate_scalars(std::string_view s, std::size_t limit) {
    std::size_t count = 0, pos = 0;
    while (pos < s.size() && count < limit) {
        text::decode(s, pos);
        ++count;
    }
    return std::string(s.substr(0, pos));
}

GenerateOutcome generate_remote(const PromptBundle& bundle, const GeneratorConfig& cfg) {
    const ParsedUrl url = parse_url(cfg.endpoint_url);
    const std::string body = render_chat_request(bundle, cfg);

    std::string last_error;
    for (int attempt = 1; attempt <= cfg.max_retries + 1; ++attempt) {
        if (attempt > 1) {
            const auto backoff = cfg.retry_backoff_base * (1LL << (attempt - 2));
            std::this_thread::sleep_for(backoff);
        }
        httplib::Client client(url.base);
        const auto seconds = cfg.request_timeout.count() / 1000;
        const auto micros = (cfg.request_timeout.count() % 1000) * 1000;
        client.set_connection_timeout(seconds, micros);
        client.set_read_timeout(seconds, micros);
        client.set_write_timeout(seconds, micros);

        httplib::Headers headers;
        if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);

        const httplib::Result res = client.Post(url.path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("unparseable response: ") + e.what();
            continue;
        }
        try {
            std::string content = j.at("choices").at(0).at("message").at("content")
                                      .get<std::string>();
            return {truncate_scalars(content, cfg.max_output_chars), attempt};
        } catch (const nlohmann::json::exception&) {
            last_error = "response lacks choices[0].message.content";
            continue;
        }
    }
    throw GenerationError("remote generation failed after " +
                          std::to_string(cfg.max_retries + 1) + " attempt(s): " + last_error);
}

} // namespace

std::string render_chat_request(const PromptBundle& bundle, const GeneratorConfig& cfg) {
    nlohmann::json j;
    j["model"] = cfg.model_name;
    j["temperature"] = cfg.temperature;
    j["messages"] = nlohmann::json::array({
        nlohmann::json{{"role", "system"}, {"content", bundle.system_text}},
        nlohmann::json{{"role", "user"}, {"content", bundle.user_text}},
    });
    return j.dump();
}

GenerateOutcome generate(const PromptBundle& bundle, const GenerationContext& ctx,
                         const GeneratorConfig& cfg) {
    switch (cfg.backend) {
        case Backend::mock_echo:
            return {ctx.baseline_1best, 1};
        case Backend::mock_oracle:
            if (ctx.top_exemplar_truth && ctx.top_score >= cfg.oracle_score_threshold) {
                return {*ctx.top_exemplar_truth, 1};
            }
            return {ctx.baseline_1best, 1};
        case Backend::remote:
            return generate_remote(bundle, cfg);
    }
    throw GenerationError("unreachable backend");
}

std::string postprocess_output(std::string_view raw, const NormalizationConfig& cfg) {
    const std::string s(raw);

    // Markdown fence: drop the opening line (may carry a language tag) and
    // the trailing fence.
    auto trimmed = [](std::string_view v) {
        std::size_t b = v.find_first_not_of(" \t\r\n");
        if (b == std::string_view::npos) return std::string_view{};
        std::size_t e = v.find_last_not_of(" \t\r\n");
        return v.substr(b, e - b + 1);
    };
    std::string_view view = trimmed(s);
    if (view.size() >= 6 && view.substr(0, 3) == "```" && view.substr(view.size() - 3) == "```") {
        view.remove_suffix(3);
        const std::size_t first_nl = view.find('\n');
        view = (first_nl == std::string_view::npos) ? view.substr(3) : view.substr(first_nl + 1);
        view = trimmed(view);
    }

    // Surrounding matching quotes.
    static constexpr std::pair<std::string_view, std::string_view> kQuotePairs[] = {
        {"\"", "\""}, {"'", "'"}, {"“", "”"}, {"«", "»"},
    };
    for (const auto& [open, close] : kQuotePairs) {
        if (view.size() >= open.size() + close.size() && view.substr(0, open.size()) == open &&
            view.substr(view.size() - close.size()) == close) {
            view = trimmed(view.substr(open.size(), view.size() - open.size() - close.size()));
            break;
        }
    }

    // An echoed cue means the answer is the rest of that line.
    std::string result(view);
    std::size_t pos = 0;
    while (pos < result.size()) {
        std::size_t eol = result.find('\n', pos);
        if (eol == std::string::npos) eol = result.size();
        const std::string_view line = trimmed(std::string_view(result).substr(pos, eol - pos));
        if (!line.empty()) {
            static constexpr std::string_view kCues[] = {
                "=>Correct Transcription:", "=> Correct Transcription:", "Correct Transcription:",
            };
            for (const std::string_view cue : kCues) {
                if (line.size() >= cue.size() && line.substr(0, cue.size()) == cue) {
                    result = std::string(line.substr(cue.size()));
                    break;
                }
            }
            break;
        }
        pos = eol + 1;
    }

    return normalize(result, cfg);
}

std::vector<CorrectionRecord> correct_batch(const std::vector<CorrectionTask>& tasks,
                                            const KnowledgeBase& kb,
                                            const GeneratorConfig& gen_cfg,
                                            const NormalizationConfig& norm_cfg,
                                            const PromptTemplates& templates,
                                            const BatchOptions& opts) {
    validate_generator_config(gen_cfg);
    if (tasks.empty()) return {};

    // Resolve every retrieval id up front so a stale id fails fast.
    for (const auto& task : tasks) {
        for (const auto& item : task.retrieval.items) {
            if (!kb.find(item.entry_id)) {
                throw DataError("retrieval id '" + item.entry_id +
                                "' does not resolve in the knowledge base (query '" +
                                task.query.utt_id + "')");
            }
        }
    }

    std::vector<CorrectionRecord> records(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failures{0};

    auto run_one = [&](std::size_t i) {
        const CorrectionTask& task = tasks[i];
        CorrectionRecord rec;
        rec.utt_id = task.query.utt_id;
        rec.backend_used = gen_cfg.backend;
        rec.baseline_text = normalize(task.query.hypotheses.front(), norm_cfg);

        std::vector<KbEntry> exemplars;
        exemplars.reserve(task.retrieval.items.size());
        for (const auto& item : task.retrieval.items) {
            exemplars.push_back(*kb.find(item.entry_id));
            rec.retrieved_entry_ids.push_back(item.entry_id);
        }

        GenerationContext ctx;
        ctx.baseline_1best = task.query.hypotheses.front();
        if (!task.retrieval.items.empty()) {
            ctx.top_exemplar_truth = exemplars.front().ground_truth;
            ctx.top_score = task.retrieval.items.front().score;
        }

        const auto started = std::chrono::steady_clock::now();
        try {
            const PromptBundle bundle = build_prompt(exemplars, task.query, opts.n, templates);
            const GenerateOutcome outcome = generate(bundle, ctx, gen_cfg);
            rec.attempts = outcome.attempts;
            rec.corrected_text = postprocess_output(outcome.raw, norm_cfg);
            if (rec.corrected_text.empty()) {
                rec.corrected_text = rec.baseline_text;
                rec.fallback = true;
            }
        } catch (const std::exception& e) {
            rec.attempts = gen_cfg.max_retries + 1;
            rec.corrected_text = rec.baseline_text;
            rec.fallback = true;
            rec.error = e.what();
            failures.fetch_add(1);
        }
        rec.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        records[i] = std::move(rec);
    };

    const std::size_t worker_count =
        std::min<std::size_t>(static_cast<std::size_t>(gen_cfg.parallelism_limit), tasks.size());
    if (worker_count <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_one(i);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(worker_count);
        for (std::size_t w = 0; w < worker_count; ++w) {
            workers.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) break;
                    run_one(i);
                }
            });
        }
        for (auto& t : workers) t.join();
    }

    if (failures.load() == tasks.size()) {
        throw GenerationError("all " + std::to_string(tasks.size()) + " requests failed; first: " +
                              records.front().error);
    }
    return records;
}

// Timing is deliberately left out of the serialized form so identical runs
// produce identical files; wall-clock data lives in the run manifest.
std::string correction_records_to_jsonl(const std::vector<CorrectionRecord>& records) {
    std::string out;
    for (const auto& rec : records) {
        nlohmann::json j;
        j["utt_id"] = rec.utt_id;
        j["baseline_text"] = rec.baseline_text;
        j["corrected_text"] = rec.corrected_text;
        j["backend"] = to_string(rec.backend_used);
        j["retrieved_entry_ids"] = rec.retrieved_entry_ids;
        j["attempts"] = rec.attempts;
        j["fallback"] = rec.fallback;
        j["error"] = rec.error;
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

void save_correction_records(const std::string& path,
                             const std::vector<CorrectionRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write records file: " + path);
    out << correction_records_to_jsonl(records);
    if (!out) throw IoError("failed writing records file: " + path);
}

std::vector<CorrectionRecord> load_correction_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open records file: " + path);
    std::vector<CorrectionRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": malformed JSON line: " +
                            e.what());
        }
        CorrectionRecord rec;
        try {
            rec.utt_id = j.at("utt_id").get<std::string>();
            rec.baseline_text = j.at("baseline_text").get<std::string>();
            rec.corrected_text = j.at("corrected_text").get<std::string>();
            rec.backend_used = backend_from_string(j.at("backend").get<std::string>());
            rec.retrieved_entry_ids = j.at("retrieved_entry_ids").get<std::vector<std::string>>();
            rec.attempts = j.at("attempts").get<int>();
            rec.fallback = j.at("fallback").get<bool>();
            rec.error = j.at("error").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": bad record: " + e.what());
        }
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace gecrag
