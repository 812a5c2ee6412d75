#include "gecrag/cli_commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "gecrag/error_channel.hpp"
#include "gecrag/errors.hpp"
#include "gecrag/run_manifest.hpp"
#include "gecrag/wer_eval.hpp"

namespace gecrag::cli {

namespace {

NormalizationConfig load_norm_or_empty(const std::string& path) {
    return path.empty() ? NormalizationConfig{} : load_normalization_config(path);
}

std::string file_stem(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    std::string name = (slash == std::string::npos) ? path : path.substr(slash + 1);
    const std::size_t dot = name.find_last_of('.');
    if (dot != std::string::npos && dot > 0) name.resize(dot);
    return name;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write output file: " + path);
    out << content;
    if (!out) throw IoError("failed writing output file: " + path);
}

std::string num(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

} // namespace

void cmd_normalize(const NormalizeOptions& opts) {
    const NormalizationConfig cfg = load_norm_or_empty(opts.normconfig);

    std::ifstream in(opts.in_path, std::ios::binary);
    if (!in) throw IoError("cannot open input file: " + opts.in_path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::string out;
    out.reserve(content.size());
    std::size_t lines = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        std::string_view line(content.data() + pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out += normalize(line, cfg);
        out.push_back('\n');
        ++lines;
        pos = eol + 1;
    }
    write_file(opts.out_path, out);

    RunManifest manifest;
    manifest.command = "normalize";
    manifest.options = {{"in", opts.in_path}, {"normconfig", opts.normconfig}};
    manifest.input_paths.push_back(opts.in_path);
    if (!opts.normconfig.empty()) manifest.input_paths.push_back(opts.normconfig);
    write_run_manifest(opts.out_path, manifest);
    std::cerr << "normalize: " << lines << " line(s) written to " << opts.out_path << "\n";
}

void cmd_build_kb(const BuildKbOptions& opts) {
    if (opts.enlarged_manifest.empty() != opts.enlarged_hyps.empty()) {
        throw ConfigError("--enlarged-kb and --enlarged-hyps must be given together");
    }
    const NormalizationConfig cfg = load_norm_or_empty(opts.normconfig);

    const ManifestLoadResult base = load_manifest(opts.kb_manifest, Split::train);
    const std::vector<HypothesisSet> base_hyps = load_hypotheses(opts.hyps_path, opts.beam_width);
    KbBuildResult built = build_kb_entries(base.utterances, base_hyps, cfg);
    std::cerr << "build-kb: " << built.entries.size() << " base entries ("
              << base.dropped_empty_sentences << " empty rows, " << built.dropped_empty
              << " empty entries dropped)\n";

    if (!opts.enlarged_manifest.empty()) {
        const ManifestLoadResult pool =
            load_manifest(opts.enlarged_manifest, Split::validated_extra);
        const std::vector<Utterance> kept = enlargement_filter(pool.utterances);
        const std::vector<HypothesisSet> pool_hyps =
            load_hypotheses(opts.enlarged_hyps, opts.beam_width);
        KbBuildResult extra = build_kb_entries(kept, pool_hyps, cfg);
        std::cerr << "build-kb: enlargement kept " << kept.size() << " of "
                  << pool.utterances.size() << " pool rows, adding " << extra.entries.size()
                  << " entries\n";

        std::unordered_set<std::string> seen;
        for (const auto& e : built.entries) seen.insert(e.entry_id);
        for (auto& e : extra.entries) {
            if (!seen.insert(e.entry_id).second) {
                throw DataError("entry id '" + e.entry_id +
                                "' appears in both the base manifest and the enlargement pool");
            }
            built.entries.push_back(std::move(e));
        }
    }

    const KnowledgeBase kb = build_knowledge_base(std::move(built.entries));
    save_knowledge_base(kb, opts.out_path);
    std::cerr << "build-kb: index over " << kb.index.num_docs() << " documents, "
              << kb.index.vocab.terms.size() << " terms -> " << opts.out_path << "\n";

    RunManifest manifest;
    manifest.command = "build-kb";
    manifest.options = {{"kb", opts.kb_manifest},
                        {"hyps", opts.hyps_path},
                        {"enlarged-kb", opts.enlarged_manifest},
                        {"enlarged-hyps", opts.enlarged_hyps},
                        {"normconfig", opts.normconfig},
                        {"beam-width", std::to_string(opts.beam_width)}};
    manifest.input_paths = {opts.kb_manifest, opts.hyps_path};
    if (!opts.enlarged_manifest.empty()) {
        manifest.input_paths.push_back(opts.enlarged_manifest);
        manifest.input_paths.push_back(opts.enlarged_hyps);
    }
    if (!opts.normconfig.empty()) manifest.input_paths.push_back(opts.normconfig);
    write_run_manifest(opts.out_path, manifest);
}

void cmd_correct(const CorrectOptions& opts) {
    const NormalizationConfig cfg = load_norm_or_empty(opts.normconfig);
    const PromptTemplates templates =
        opts.templates_path.empty() ? default_templates() : load_templates(opts.templates_path);
    const KnowledgeBase kb = load_knowledge_base(opts.index_path);
    const std::vector<HypothesisSet> queries = load_hypotheses(opts.hyps_path, opts.beam_width);

    std::vector<CorrectionTask> tasks;
    tasks.reserve(queries.size());
    for (const auto& query : queries) {
        CorrectionTask task;
        const std::string qtext = normalize(query.best(), cfg);
        task.retrieval = (opts.k >= 1) ? retrieve(kb.index, qtext, opts.k)
                                       : RetrievalResult{{}, qtext};
        task.query = query;
        tasks.push_back(std::move(task));
    }

    BatchOptions batch;
    batch.n = opts.n;
    const std::vector<CorrectionRecord> records =
        correct_batch(tasks, kb, opts.generator, cfg, templates, batch);
    save_correction_records(opts.out_path, records);

    std::size_t fallbacks = 0;
    for (const auto& r : records) fallbacks += r.fallback ? 1 : 0;
    std::cerr << "correct: " << records.size() << " record(s), " << fallbacks
              << " fallback(s) -> " << opts.out_path << "\n";

    RunManifest manifest;
    manifest.command = "correct";
    manifest.options = {{"index", opts.index_path},
                        {"hyps", opts.hyps_path},
                        {"normconfig", opts.normconfig},
                        {"templates", opts.templates_path},
                        {"k", std::to_string(opts.k)},
                        {"n", std::to_string(opts.n)},
                        {"backend", to_string(opts.generator.backend)},
                        {"endpoint", opts.generator.endpoint_url},
                        {"model", opts.generator.model_name},
                        {"temperature", num(opts.generator.temperature)},
                        {"parallelism", std::to_string(opts.generator.parallelism_limit)}};
    manifest.input_paths = {opts.index_path, opts.hyps_path};
    if (!opts.normconfig.empty()) manifest.input_paths.push_back(opts.normconfig);
    if (!opts.templates_path.empty()) manifest.input_paths.push_back(opts.templates_path);
    write_run_manifest(opts.out_path, manifest);
}

void cmd_eval(const EvalOptions& opts) {
    if (opts.records_paths.empty()) throw ConfigError("eval needs at least one --records file");
    if (!opts.labels.empty() && opts.labels.size() != opts.records_paths.size()) {
        throw ConfigError("--labels count must match --records count");
    }
    const NormalizationConfig cfg = load_norm_or_empty(opts.normconfig);

    const ManifestLoadResult refs = load_manifest(opts.refs_manifest, Split::test);
    std::unordered_map<std::string, const Utterance*> ref_by_id;
    for (const auto& u : refs.utterances) ref_by_id.emplace(u.utt_id, &u);

    auto pairs_for = [&](const std::vector<CorrectionRecord>& records,
                         bool use_baseline) {
        std::vector<ScoredPair> pairs;
        pairs.reserve(records.size());
        std::vector<std::string> missing;
        for (const auto& rec : records) {
            const auto it = ref_by_id.find(rec.utt_id);
            if (it == ref_by_id.end()) {
                missing.push_back(rec.utt_id);
                continue;
            }
            pairs.push_back({rec.utt_id, it->second->ground_truth,
                             use_baseline ? rec.baseline_text : rec.corrected_text});
        }
        if (!missing.empty()) {
            std::ostringstream msg;
            msg << missing.size() << " record utt_id(s) missing from the reference manifest:";
            for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg << " " << missing[i];
            throw DataError(msg.str());
        }
        return pairs;
    };

    std::vector<EvalReport> reports;
    for (std::size_t i = 0; i < opts.records_paths.size(); ++i) {
        const std::vector<CorrectionRecord> records =
            load_correction_records(opts.records_paths[i]);
        if (i == 0) {
            reports.push_back(score_corpus(pairs_for(records, true), cfg, "baseline"));
        }
        const std::string label =
            opts.labels.empty() ? file_stem(opts.records_paths[i]) : opts.labels[i];
        EvalReport report = score_corpus(pairs_for(records, false), cfg, label);
        for (const auto& rec : records) report.fallback_count += rec.fallback ? 1 : 0;
        reports.push_back(std::move(report));
    }

    const std::vector<ComparisonRow> rows = compare_conditions(reports);
    write_file(opts.out_path, comparison_to_json(reports, rows));
    write_file(opts.out_path + ".txt", render_comparison_table(rows));
    std::cerr << "eval:\n" << render_comparison_table(rows);

    RunManifest manifest;
    manifest.command = "eval";
    manifest.options = {{"refs", opts.refs_manifest}, {"normconfig", opts.normconfig}};
    for (std::size_t i = 0; i < opts.records_paths.size(); ++i) {
        manifest.options.emplace_back("records." + std::to_string(i), opts.records_paths[i]);
    }
    manifest.input_paths = {opts.refs_manifest};
    for (const auto& p : opts.records_paths) manifest.input_paths.push_back(p);
    if (!opts.normconfig.empty()) manifest.input_paths.push_back(opts.normconfig);
    write_run_manifest(opts.out_path, manifest);
}

void cmd_corrupt(const CorruptOptions& opts) {
    const NormalizationConfig cfg = load_norm_or_empty(opts.normconfig);
    ChannelConfig channel;
    if (!opts.confusion_path.empty()) {
        channel.confusion_table = load_confusion_table(opts.confusion_path);
    }
    channel.p_sub = opts.p_sub;
    channel.p_del = opts.p_del;
    channel.p_ins = opts.p_ins;
    channel.n_best = opts.n_best;
    channel.seed = opts.seed;
    validate_channel_config(channel);

    const ManifestLoadResult refs = load_manifest(opts.refs_manifest, Split::train);
    std::vector<HypothesisSet> sets;
    sets.reserve(refs.utterances.size());
    std::size_t skipped = 0;
    for (const auto& u : refs.utterances) {
        const std::string truth = normalize(u.ground_truth, cfg);
        if (truth.empty()) {
            ++skipped;
            continue;
        }
        sets.push_back(corrupt(truth, channel, u.utt_id));
    }
    save_hypotheses(opts.out_path, sets);
    std::cerr << "corrupt: " << sets.size() << " hypothesis set(s) written (" << skipped
              << " empty truth(s) skipped) -> " << opts.out_path << "\n";

    RunManifest manifest;
    manifest.command = "corrupt";
    manifest.options = {{"refs", opts.refs_manifest},
                        {"confusion", opts.confusion_path},
                        {"normconfig", opts.normconfig},
                        {"p-sub", num(opts.p_sub)},
                        {"p-del", num(opts.p_del)},
                        {"p-ins", num(opts.p_ins)},
                        {"n", std::to_string(opts.n_best)},
                        {"seed", std::to_string(opts.seed)}};
    manifest.input_paths = {opts.refs_manifest};
    if (!opts.confusion_path.empty()) manifest.input_paths.push_back(opts.confusion_path);
    if (!opts.normconfig.empty()) manifest.input_paths.push_back(opts.normconfig);
    write_run_manifest(opts.out_path, manifest);
}

} // namespace gecrag::cli
