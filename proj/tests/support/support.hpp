#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "tsp/catalog.hpp"
#include "tsp/decision.hpp"
#include "tsp/gateway/config.hpp"
#include "tsp/gateway/pipeline.hpp"
#include "tsp/passport.hpp"
#include "tsp/rag/embedder.hpp"
#include "tsp/rag/index.hpp"

namespace tsp::test {

inline constexpr const char* kFixedTimestamp = "2025-01-01T00:00:00Z";

std::filesystem::path fixture_dir();
std::filesystem::path golden_dir();
std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& data);

catalog::Catalog fixture_catalog();
passport::SystemModel fixture_passport(const std::string& name = "passport.json");

/// data/fixtures/config.json with data_dir and index redirected to `data_dir`.
gateway::Config fixture_config(const std::filesystem::path& data_dir);

/// The fixture corpus ingested with the fixture config's cleaning and chunking settings.
rag::VectorIndex fixture_index(rag::Embedder& embedder);

/// End-to-end derive of the fixture passport through the scripted backend in `variant`
/// ("agree" or "conflict"), with a fixed timestamp and no transcript.
gateway::DeriveResult scripted_derive(const std::string& variant, const rag::VectorIndex& index,
                                      rag::Embedder& embedder,
                                      const std::string& passport = "passport.json");

/// Self-deleting scratch directory.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace tsp::test
