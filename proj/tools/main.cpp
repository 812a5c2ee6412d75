#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gecrag/cli_commands.hpp"
#include "gecrag/errors.hpp"
#include "gecrag/run_manifest.hpp"

namespace {

int run(int argc, char** argv) {
    CLI::App app{"gecrag - ASR error correction via TF-IDF retrieval-augmented generation"};
    app.set_version_flag("--version", std::string(gecrag::tool_version()));
    app.require_subcommand(1);

    using namespace gecrag::cli;

    NormalizeOptions norm_opts;
    CLI::App* norm = app.add_subcommand("normalize", "Batch-normalize a text file, one line each");
    norm->add_option("--in", norm_opts.in_path, "Input text file")->required();
    norm->add_option("--out", norm_opts.out_path, "Output text file")->required();
    norm->add_option("--normconfig", norm_opts.normconfig, "Normalization rules TSV");

    BuildKbOptions kb_opts;
    CLI::App* kb = app.add_subcommand("build-kb", "Build and save the retrieval knowledge base");
    kb->add_option("--kb", kb_opts.kb_manifest, "Training manifest TSV")->required();
    kb->add_option("--hyps", kb_opts.hyps_path, "Training hypotheses JSON-lines")->required();
    kb->add_option("--out", kb_opts.out_path, "Output knowledge-base file")->required();
    kb->add_option("--enlarged-kb", kb_opts.enlarged_manifest,
                   "Enlargement pool manifest TSV (filtered by votes)");
    kb->add_option("--enlarged-hyps", kb_opts.enlarged_hyps, "Enlargement pool hypotheses");
    kb->add_option("--normconfig", kb_opts.normconfig, "Normalization rules TSV");
    kb->add_option("--beam-width", kb_opts.beam_width, "Maximum hypotheses per utterance");

    CorrectOptions cor_opts;
    std::string backend = "mock_echo";
    long long timeout_ms = 30000;
    CLI::App* cor = app.add_subcommand("correct", "Retrieve, prompt and generate corrections");
    cor->add_option("--index", cor_opts.index_path, "Knowledge-base file from build-kb")
        ->required();
    cor->add_option("--hyps", cor_opts.hyps_path, "Query hypotheses JSON-lines")->required();
    cor->add_option("--out", cor_opts.out_path, "Output correction records JSON-lines")
        ->required();
    cor->add_option("--k", cor_opts.k, "Retrieved exemplars per query (0 = vanilla)")
        ->default_val(5);
    cor->add_option("--n", cor_opts.n, "Hypotheses per prompt block")->default_val(1);
    cor->add_option("--backend", backend, "remote | mock_echo | mock_oracle");
    cor->add_option("--endpoint", cor_opts.generator.endpoint_url, "Chat-completions URL");
    cor->add_option("--model", cor_opts.generator.model_name, "Model name sent to the endpoint");
    cor->add_option("--temperature", cor_opts.generator.temperature, "Sampling temperature");
    cor->add_option("--parallelism", cor_opts.generator.parallelism_limit,
                    "Max requests in flight");
    cor->add_option("--max-retries", cor_opts.generator.max_retries, "Retries per request");
    cor->add_option("--timeout-ms", timeout_ms, "Per-request timeout");
    cor->add_option("--oracle-threshold", cor_opts.generator.oracle_score_threshold,
                    "mock_oracle retrieval score threshold");
    cor->add_option("--normconfig", cor_opts.normconfig, "Normalization rules TSV");
    cor->add_option("--templates", cor_opts.templates_path, "Prompt template file");
    cor->add_option("--beam-width", cor_opts.beam_width, "Maximum hypotheses per utterance");

    EvalOptions eval_opts;
    CLI::App* ev = app.add_subcommand("eval", "Score conditions against references");
    ev->add_option("--refs", eval_opts.refs_manifest, "Reference manifest TSV")->required();
    ev->add_option("--records", eval_opts.records_paths, "Correction records JSON-lines")
        ->required()
        ->take_all();
    ev->add_option("--labels", eval_opts.labels, "Condition labels (one per records file)");
    ev->add_option("--normconfig", eval_opts.normconfig, "Normalization rules TSV");
    ev->add_option("--out", eval_opts.out_path, "Output report JSON")->required();

    CorruptOptions crp_opts;
    CLI::App* crp = app.add_subcommand(
        "corrupt", "Derive synthetic N-best hypotheses from reference transcripts");
    crp->add_option("--refs", crp_opts.refs_manifest, "Reference manifest TSV")->required();
    crp->add_option("--out", crp_opts.out_path, "Output hypotheses JSON-lines")->required();
    crp->add_option("--confusion", crp_opts.confusion_path, "Confusion table TSV");
    crp->add_option("--normconfig", crp_opts.normconfig, "Normalization rules TSV");
    crp->add_option("--p-sub", crp_opts.p_sub, "Per-token substitution probability");
    crp->add_option("--p-del", crp_opts.p_del, "Per-token deletion probability");
    crp->add_option("--p-ins", crp_opts.p_ins, "Per-token insertion probability");
    crp->add_option("--n", crp_opts.n_best, "Hypotheses per utterance");
    crp->add_option("--seed", crp_opts.seed, "Channel seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help / --version
        }
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (*norm) {
            cmd_normalize(norm_opts);
        } else if (*kb) {
            cmd_build_kb(kb_opts);
        } else if (*cor) {
            cor_opts.generator.backend = gecrag::backend_from_string(backend);
            cor_opts.generator.request_timeout = std::chrono::milliseconds(timeout_ms);
            if (cor_opts.generator.backend == gecrag::Backend::remote) {
                if (const char* key = std::getenv("GECRAG_API_KEY")) {
                    cor_opts.generator.api_key = key;
                }
            }
            cmd_correct(cor_opts);
        } else if (*ev) {
            cmd_eval(eval_opts);
        } else if (*crp) {
            cmd_corrupt(crp_opts);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    return run(argc, argv);
}
