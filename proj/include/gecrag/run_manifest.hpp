#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gecrag {

const char* tool_version();

/// Attribution record written next to every produced artifact as
/// `<artifact>.manifest.json`: tool version, command, option snapshot and
/// input digests. The artifact itself stays byte-identical across reruns;
/// only the manifest's timestamp varies.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> options; // flag -> value (no credentials)
    std::vector<std::string> input_paths;                     // digested on write
};

void write_run_manifest(const std::string& artifact_path, const RunManifest& manifest);

} // namespace gecrag
