#include "gecrag/run_manifest.hpp"

#include <ctime>
#include <fstream>

#include <json.hpp>

#include "gecrag/errors.hpp"
#include "gecrag/sha256.hpp"

namespace gecrag {

const char* tool_version() {
#ifdef GECRAG_VERSION_STRING
    return GECRAG_VERSION_STRING;
#else
    return "0.0.0";
#endif
}

void write_run_manifest(const std::string& artifact_path, const RunManifest& manifest) {
    nlohmann::json j;
    j["tool"] = "gecrag";
    j["tool_version"] = tool_version();
    j["command"] = manifest.command;

    nlohmann::json options = nlohmann::json::object();
    for (const auto& [flag, value] : manifest.options) options[flag] = value;
    j["options"] = std::move(options);

    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& path : manifest.input_paths) {
        inputs.push_back({{"path", path}, {"sha256", sha256_file_hex(path)}});
    }
    j["inputs"] = std::move(inputs);
    j["artifact"] = {{"path", artifact_path}, {"sha256", sha256_file_hex(artifact_path)}};

    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &utc);
    j["created_utc"] = stamp;

    const std::string out_path = artifact_path + ".manifest.json";
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write run manifest: " + out_path);
    out << j.dump(2) << "\n";
}

} // namespace gecrag
