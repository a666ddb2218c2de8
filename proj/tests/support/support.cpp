#include "support.hpp"

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "tsp/advisor/backend.hpp"
#include "tsp/advisor/client.hpp"
#include "tsp/error.hpp"
#include "tsp/rag/corpus.hpp"

namespace tsp::test {

namespace fs = std::filesystem;

fs::path fixture_dir() { return TSP_FIXTURE_DIR; }
fs::path golden_dir() { return TSP_GOLDEN_DIR; }

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << data;
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
}

catalog::Catalog fixture_catalog() { return catalog::parse_catalog(read_file(fixture_dir() / "catalog.json")); }

passport::SystemModel fixture_passport(const std::string& name) {
    return passport::parse_passport(read_file(fixture_dir() / name));
}

gateway::Config fixture_config(const fs::path& data_dir) {
    auto cfg = gateway::load_config(fixture_dir() / "config.json");
    cfg.data_dir = data_dir;
    cfg.index = data_dir / "index.tspidx";
    return cfg;
}

rag::VectorIndex fixture_index(rag::Embedder& embedder) {
    const auto cfg = gateway::load_config(fixture_dir() / "config.json");
    rag::VectorIndex index(embedder.name(), embedder.dimension());
    rag::ingest_corpus(fixture_dir() / "corpus", cfg.clean, cfg.chunking, embedder, index);
    return index;
}

gateway::DeriveResult scripted_derive(const std::string& variant, const rag::VectorIndex& index,
                                      rag::Embedder& embedder, const std::string& passport) {
    const auto cfg = gateway::load_config(fixture_dir() / "config.json");
    const auto cat = fixture_catalog();
    const auto model = fixture_passport(passport);
    advisor::ScriptedBackend backend(fixture_dir() / "scripted" / variant);
    advisor::ClientConfig cc = cfg.advisor.client;
    cc.transcript.clear();
    advisor::AdvisorClient client(backend, cc, [] { return std::string(kFixedTimestamp); });
    gateway::DeriveOptions opts;
    opts.thresholds = cfg.thresholds;
    opts.prompt = cfg.prompt;
    opts.timestamp = kFixedTimestamp;
    gateway::AdvisorPath path;
    path.index = &index;
    path.embedder = &embedder;
    path.client = &client;
    return gateway::derive(model, cat, opts, path);
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("tsp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + std::to_string(rd()));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

} // namespace tsp::test
