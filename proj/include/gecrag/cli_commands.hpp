#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gecrag/generator.hpp"

namespace gecrag::cli {

/// Stage-wise commands with file handoffs. Each command writes its outputs
/// to files only (plus a `<out>.manifest.json` attribution sidecar) and logs
/// diagnostics to stderr.

struct NormalizeOptions {
    std::string in_path;
    std::string out_path;
    std::string normconfig; // empty = no-op config
};
void cmd_normalize(const NormalizeOptions& opts);

struct BuildKbOptions {
    std::string kb_manifest;
    std::string hyps_path;
    std::string out_path;
    std::string enlarged_manifest; // optional, with enlarged_hyps
    std::string enlarged_hyps;
    std::string normconfig;
    std::size_t beam_width = kDefaultBeamWidth;
};
void cmd_build_kb(const BuildKbOptions& opts);

struct CorrectOptions {
    std::string index_path;
    std::string hyps_path;
    std::string out_path;
    std::string normconfig;
    std::string templates_path; // empty = built-in defaults
    std::size_t k = 5;
    std::size_t n = 1;
    std::size_t beam_width = kDefaultBeamWidth;
    GeneratorConfig generator;
};
void cmd_correct(const CorrectOptions& opts);

struct EvalOptions {
    std::string refs_manifest;
    std::vector<std::string> records_paths;
    std::vector<std::string> labels; // optional; defaults to file stems
    std::string normconfig;
    std::string out_path; // JSON; the text table goes to <out>.txt
};
void cmd_eval(const EvalOptions& opts);

struct CorruptOptions {
    std::string refs_manifest;
    std::string out_path;
    std::string confusion_path;
    std::string normconfig;
    double p_sub = 0.15;
    double p_del = 0.05;
    double p_ins = 0.05;
    uint32_t n_best = 5;
    uint64_t seed = 0;
};
void cmd_corrupt(const CorruptOptions& opts);

} // namespace gecrag::cli
