#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GECRAG_BIN) + " " + args + " >/dev/null 2>>" +
                            (fs::temp_directory_path() / "gecrag_cli_stderr.log").string();
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot read ", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Workspace {
    fs::path dir;

    Workspace() {
        dir = fs::temp_directory_path() /
              ("gecrag_cli_" + std::to_string(::getpid()) + "_" +
               std::to_string(reinterpret_cast<uintptr_t>(this)));
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

constexpr const char* kManifestHeader = "utt_id\tpath\tsentence\tup_votes\tdown_votes\n";

void write_train_fixture(const Workspace& ws) {
    std::string manifest(kManifestHeader);
    std::string hyps;
    const char* sentences[] = {"the cat sat on the mat", "a dog ran in the park",
                               "the sun rose over the sea", "we meet again next week",
                               "the knight rode through the night"};
    const char* corrupted[] = {"the hat sat on the mat", "a fog ran in the park",
                               "the son rose over the see", "we meat again next weak",
                               "the night rowed through the nite"};
    for (int i = 0; i < 5; ++i) {
        manifest += "t" + std::to_string(i) + "\tt" + std::to_string(i) + ".mp3\t" +
                    sentences[i] + "\t2\t0\n";
        nlohmann::json j;
        j["utt_id"] = "t" + std::to_string(i);
        j["hypotheses"] = {corrupted[i], sentences[i]};
        hyps += j.dump() + "\n";
    }
    write_file(ws.path("train.tsv"), manifest);
    write_file(ws.path("train_hyps.jsonl"), hyps);
}

void write_query_fixture(const Workspace& ws) {
    std::string manifest(kManifestHeader);
    std::string hyps;
    const char* sentences[] = {"the cat sat on the mat", "we meet again next week"};
    const char* corrupted[] = {"the hat sat on the mat", "we meat again next weak"};
    for (int i = 0; i < 2; ++i) {
        manifest += "q" + std::to_string(i) + "\tq" + std::to_string(i) + ".mp3\t" +
                    sentences[i] + "\t2\t0\n";
        nlohmann::json j;
        j["utt_id"] = "q" + std::to_string(i);
        j["hypotheses"] = {corrupted[i]};
        hyps += j.dump() + "\n";
    }
    write_file(ws.path("test.tsv"), manifest);
    write_file(ws.path("test_hyps.jsonl"), hyps);
}

} // namespace

TEST_CASE("cli: no arguments is a usage error") {
    CHECK(run_cli("") == 1);
}

TEST_CASE("cli: --help succeeds") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("normalize --help") == 0);
}

TEST_CASE("cli: unknown flags are usage errors") {
    CHECK(run_cli("eval --bogus x") == 1);
    CHECK(run_cli("frobnicate") == 1);
}

TEST_CASE("cli: missing input files are data errors") {
    Workspace ws;
    CHECK(run_cli("build-kb --kb /nonexistent.tsv --hyps /nonexistent.jsonl --out " +
                  ws.path("kb.bin")) == 2);
    CHECK(run_cli("normalize --in /nonexistent.txt --out " + ws.path("x.txt")) == 2);
}

TEST_CASE("cli: normalize maps lines one to one") {
    Workspace ws;
    write_file(ws.path("in.txt"), "  a\t b  \nsecond   line\n\n");
    REQUIRE(run_cli("normalize --in " + ws.path("in.txt") + " --out " + ws.path("out.txt")) == 0);
    CHECK(read_file(ws.path("out.txt")) == "a b\nsecond line\n\n");

    write_file(ws.path("empty.txt"), "");
    REQUIRE(run_cli("normalize --in " + ws.path("empty.txt") + " --out " +
                    ws.path("empty_out.txt")) == 0);
    CHECK(read_file(ws.path("empty_out.txt")).empty());
    CHECK(fs::exists(ws.path("out.txt.manifest.json")));
}

TEST_CASE("cli: full pipeline with the echo backend is the identity") {
    Workspace ws;
    write_train_fixture(ws);
    write_query_fixture(ws);

    REQUIRE(run_cli("build-kb --kb " + ws.path("train.tsv") + " --hyps " +
                    ws.path("train_hyps.jsonl") + " --out " + ws.path("kb.bin")) == 0);
    REQUIRE(fs::exists(ws.path("kb.bin")));
    REQUIRE(fs::exists(ws.path("kb.bin.manifest.json")));

    REQUIRE(run_cli("correct --index " + ws.path("kb.bin") + " --hyps " +
                    ws.path("test_hyps.jsonl") + " --k 2 --n 2 --backend mock_echo --out " +
                    ws.path("records.jsonl")) == 0);

    // Every record echoes its baseline.
    std::istringstream lines(read_file(ws.path("records.jsonl")));
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        const nlohmann::json j = nlohmann::json::parse(line);
        CHECK(j.at("corrected_text") == j.at("baseline_text"));
        CHECK(j.at("backend") == "mock_echo");
        CHECK(j.at("retrieved_entry_ids").size() == 2);
        ++count;
    }
    CHECK(count == 2);

    REQUIRE(run_cli("eval --refs " + ws.path("test.tsv") + " --records " +
                    ws.path("records.jsonl") + " --labels echo --out " +
                    ws.path("report.json")) == 0);
    const nlohmann::json report = nlohmann::json::parse(read_file(ws.path("report.json")));
    REQUIRE(report.at("comparison").size() == 2);
    // Pipeline identity: the echo condition equals the baseline exactly.
    CHECK(report.at("comparison")[0].at("corpus_wer").get<double>() ==
          report.at("comparison")[1].at("corpus_wer").get<double>());
    CHECK(report.at("comparison")[1].at("condition") == "echo");
    CHECK(fs::exists(ws.path("report.json.txt")));
    CHECK(fs::exists(ws.path("report.json.manifest.json")));
}

TEST_CASE("cli: identical runs produce byte-identical artifacts") {
    Workspace ws;
    write_train_fixture(ws);
    write_query_fixture(ws);

    REQUIRE(run_cli("corrupt --refs " + ws.path("test.tsv") + " --out " + ws.path("h1.jsonl") +
                    " --confusion " + std::string(GECRAG_SOURCE_DIR) +
                    "/data/confusion/latin_toy.tsv --p-sub 0.3 --n 5 --seed 42") == 0);
    REQUIRE(run_cli("corrupt --refs " + ws.path("test.tsv") + " --out " + ws.path("h2.jsonl") +
                    " --confusion " + std::string(GECRAG_SOURCE_DIR) +
                    "/data/confusion/latin_toy.tsv --p-sub 0.3 --n 5 --seed 42") == 0);
    CHECK(read_file(ws.path("h1.jsonl")) == read_file(ws.path("h2.jsonl")));

    for (const char* out : {"kb1.bin", "kb2.bin"}) {
        REQUIRE(run_cli("build-kb --kb " + ws.path("train.tsv") + " --hyps " +
                        ws.path("train_hyps.jsonl") + " --out " + ws.path(out)) == 0);
    }
    CHECK(read_file(ws.path("kb1.bin")) == read_file(ws.path("kb2.bin")));

    for (const char* out : {"r1.jsonl", "r2.jsonl"}) {
        REQUIRE(run_cli("correct --index " + ws.path("kb1.bin") + " --hyps " +
                        ws.path("test_hyps.jsonl") + " --k 1 --backend mock_oracle --out " +
                        ws.path(out)) == 0);
    }
    CHECK(read_file(ws.path("r1.jsonl")) == read_file(ws.path("r2.jsonl")));

    // Different seed, different corruption.
    REQUIRE(run_cli("corrupt --refs " + ws.path("test.tsv") + " --out " + ws.path("h3.jsonl") +
                    " --confusion " + std::string(GECRAG_SOURCE_DIR) +
                    "/data/confusion/latin_toy.tsv --p-sub 0.3 --n 5 --seed 43") == 0);
    CHECK(read_file(ws.path("h1.jsonl")) != read_file(ws.path("h3.jsonl")));
}

TEST_CASE("cli: enlargement pool grows the knowledge base by vote filter") {
    Workspace ws;
    write_train_fixture(ws);

    std::string pool(kManifestHeader);
    pool += "p0\tp0.mp3\textra sentence one\t3\t0\n";  // kept
    pool += "p1\tp1.mp3\textra sentence two\t1\t0\n";  // dropped: up < 2
    pool += "p2\tp2.mp3\textra sentence three\t4\t1\n"; // dropped: down > 0
    write_file(ws.path("pool.tsv"), pool);
    std::string pool_hyps;
    for (const char* id : {"p0", "p1", "p2"}) {
        nlohmann::json j;
        j["utt_id"] = id;
        j["hypotheses"] = {std::string("extra sentence hyp ") + id};
        pool_hyps += j.dump() + "\n";
    }
    write_file(ws.path("pool_hyps.jsonl"), pool_hyps);

    REQUIRE(run_cli("build-kb --kb " + ws.path("train.tsv") + " --hyps " +
                    ws.path("train_hyps.jsonl") + " --enlarged-kb " + ws.path("pool.tsv") +
                    " --enlarged-hyps " + ws.path("pool_hyps.jsonl") + " --out " +
                    ws.path("kb.bin")) == 0);

    // 5 base + exactly 1 qualifying pool row.
    const std::string manifest = read_file(ws.path("kb.bin.manifest.json"));
    const nlohmann::json j = nlohmann::json::parse(manifest);
    CHECK(j.at("command") == "build-kb");
    REQUIRE(run_cli("correct --index " + ws.path("kb.bin") + " --hyps " +
                    ws.path("train_hyps.jsonl") + " --k 6 --backend mock_echo --out " +
                    ws.path("records.jsonl")) == 0);
    std::istringstream lines(read_file(ws.path("records.jsonl")));
    std::string line;
    std::getline(lines, line);
    CHECK(nlohmann::json::parse(line).at("retrieved_entry_ids").size() == 6);
}

TEST_CASE("cli: shipped Persian config drives the normalize command") {
    Workspace ws;
    // Arabic kaf + spaced plural, fused verb prefix, ASCII digits.
    write_file(ws.path("fa.txt"),
               "كتاب ها\n"
               "او میرود\n"
               "سال 1402\n");
    REQUIRE(run_cli("normalize --in " + ws.path("fa.txt") + " --normconfig " +
                    std::string(GECRAG_SOURCE_DIR) + "/data/normalization/fa_starter.tsv" +
                    " --out " + ws.path("fa_out.txt")) == 0);
    CHECK(read_file(ws.path("fa_out.txt")) ==
          "کتاب‌ها\n"
          "او می‌رود\n"
          "سال ۱۴۰۲\n");
}

TEST_CASE("cli: vanilla mode (k=0) skips retrieval but still corrects") {
    Workspace ws;
    write_train_fixture(ws);
    write_query_fixture(ws);
    REQUIRE(run_cli("build-kb --kb " + ws.path("train.tsv") + " --hyps " +
                    ws.path("train_hyps.jsonl") + " --out " + ws.path("kb.bin")) == 0);
    REQUIRE(run_cli("correct --index " + ws.path("kb.bin") + " --hyps " +
                    ws.path("test_hyps.jsonl") + " --k 0 --n 5 --backend mock_echo --out " +
                    ws.path("records.jsonl")) == 0);
    std::istringstream lines(read_file(ws.path("records.jsonl")));
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        const nlohmann::json j = nlohmann::json::parse(line);
        CHECK(j.at("retrieved_entry_ids").empty());
        CHECK(j.at("corrected_text") == j.at("baseline_text"));
        ++count;
    }
    CHECK(count == 2);
}

TEST_CASE("cli: remote backend without GECRAG_API_KEY is a data error") {
    Workspace ws;
    write_train_fixture(ws);
    write_query_fixture(ws);
    REQUIRE(run_cli("build-kb --kb " + ws.path("train.tsv") + " --hyps " +
                    ws.path("train_hyps.jsonl") + " --out " + ws.path("kb.bin")) == 0);
    ::unsetenv("GECRAG_API_KEY");
    CHECK(run_cli("correct --index " + ws.path("kb.bin") + " --hyps " +
                  ws.path("test_hyps.jsonl") + " --backend remote --endpoint http://127.0.0.1:1/v1" +
                  " --out " + ws.path("r.jsonl")) == 2);
}

TEST_CASE("cli: run manifests record inputs and never credentials") {
    Workspace ws;
    write_train_fixture(ws);
    REQUIRE(run_cli("build-kb --kb " + ws.path("train.tsv") + " --hyps " +
                    ws.path("train_hyps.jsonl") + " --out " + ws.path("kb.bin")) == 0);
    const nlohmann::json j = nlohmann::json::parse(read_file(ws.path("kb.bin.manifest.json")));
    CHECK(j.at("tool") == "gecrag");
    CHECK(j.at("inputs").size() == 2);
    for (const auto& input : j.at("inputs")) {
        CHECK(input.at("sha256").get<std::string>().size() == 64);
    }
    CHECK(j.at("artifact").at("path") == ws.path("kb.bin"));
    CHECK(j.dump().find("api_key") == std::string::npos);
    CHECK(j.contains("created_utc"));
}
