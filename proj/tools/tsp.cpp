#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tsp/catalog.hpp"
#include "tsp/decision.hpp"
#include "tsp/gateway/config.hpp"
#include "tsp/gateway/pipeline.hpp"
#include "tsp/gateway/service.hpp"
#include "tsp/passport.hpp"
#include "tsp/profiling.hpp"
#include "tsp/rag/corpus.hpp"
#include "tsp/review/session.hpp"

namespace fs = std::filesystem;
using namespace tsp;

namespace {

// Exit codes: 1 for a module error, 2 for usage errors (CLI11), 3 when review cannot approve.
constexpr int kErrorExit = 1;
constexpr int kBlockedExit = 3;

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& data) {
    if (path.empty() || path == "-") {
        std::cout << data;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << data;
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

gateway::Config config_or_default(const std::string& explicit_path) {
    if (auto p = gateway::locate_config(explicit_path)) return gateway::load_config(*p);
    return {};
}

gateway::Config require_config(const std::string& explicit_path) {
    auto p = gateway::locate_config(explicit_path);
    if (!p) throw Error(ErrorCode::ConfigError, "no config file: pass --config or set TSP_CONFIG");
    return gateway::load_config(*p);
}

catalog::Catalog load_catalog(const fs::path& p) { return catalog::parse_catalog(read_file(p)); }

struct IngestArgs {
    std::string corpus, out, strategy;
    std::size_t size = 0, overlap = 0;
};

int run_ingest(const std::string& config_path, const IngestArgs& a) {
    auto cfg = config_or_default(config_path);
    if (!a.strategy.empty()) cfg.chunking.strategy = rag::parse_chunk_strategy(a.strategy);
    if (a.size) cfg.chunking.size = a.size;
    if (a.overlap) cfg.chunking.overlap = a.overlap;
    cfg.chunking.validate();
    const fs::path out = a.out.empty() ? cfg.index : fs::path(a.out);
    auto embedder = gateway::make_embedder(cfg.embedder);
    rag::VectorIndex index(embedder->name(), embedder->dimension());
    const auto report = rag::ingest_corpus(a.corpus, cfg.clean, cfg.chunking, *embedder, index);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    index.save(out);
    std::cout << "documents " << report.documents << ", chunks " << report.chunks << ", indexed " << report.indexed
              << ", skipped " << report.skipped.size() << " -> " << out.string() << "\n";
    return 0;
}

int run_validate(const std::string& config_path, const std::string& catalog_path, const std::string& passport_path) {
    fs::path cat_path = catalog_path;
    if (cat_path.empty()) cat_path = require_config(config_path).catalog;
    const auto cat = load_catalog(cat_path);
    std::cout << "catalog " << cat.version() << ": " << cat.controls().size() << " controls, baselines";
    for (const auto& [c, ids] : cat.baselines()) std::cout << " " << to_string(c) << "=" << ids.size();
    std::cout << "\n";
    if (passport_path.empty()) return 0;
    const auto model = passport::parse_passport(read_file(passport_path));
    const auto report = passport::completeness(model, cat);
    for (const auto& d : model.infeasible_controls) {
        if (!cat.contains(d.control_id)) std::cerr << "warning: infeasible control " << d.control_id << " is not in the catalog\n";
    }
    std::cout << "passport " << model.system_name << ": category " << to_string(profiling::categorize(model))
              << ", completeness " << report.score << "\n";
    for (const auto& f : report.missing_fields) std::cout << "  missing field " << f << "\n";
    return 0;
}

struct DeriveArgs {
    std::string passport, backend, fixtures, out, emit_matrix, emit_prompts, timestamp;
};

int run_derive(const std::string& config_path, const DeriveArgs& a) {
    auto cfg = require_config(config_path);
    if (!a.backend.empty()) cfg.advisor.kind = a.backend;
    if (!a.fixtures.empty()) cfg.advisor.fixture_dir = a.fixtures;
    if (cfg.advisor.kind != "none" && cfg.advisor.kind != "scripted" && cfg.advisor.kind != "remote") {
        throw Error(ErrorCode::ConfigError, "unknown backend '" + cfg.advisor.kind + "'");
    }
    // Backend construction validates credentials, so a misconfigured remote backend fails
    // here, before the passport is even read.
    auto backend = gateway::make_backend(cfg.advisor);
    const auto cat = load_catalog(cfg.catalog);
    const auto model = passport::parse_passport(read_file(a.passport));

    gateway::DeriveOptions opts;
    opts.thresholds = cfg.thresholds;
    opts.prompt = cfg.prompt;
    opts.timestamp = a.timestamp.empty() ? utc_now() : a.timestamp;

    std::unique_ptr<rag::Embedder> embedder;
    std::optional<rag::VectorIndex> index;
    std::unique_ptr<advisor::AdvisorClient> client;
    gateway::AdvisorPath path;
    if (backend) {
        embedder = gateway::make_embedder(cfg.embedder);
        if (fs::exists(cfg.index)) {
            index.emplace(rag::VectorIndex::load(cfg.index));
            path.index = &*index;
        } else {
            std::cerr << "warning: index " << cfg.index.string() << " not found; prompts carry no regulatory context\n";
        }
        const auto stamp = opts.timestamp;
        client = std::make_unique<advisor::AdvisorClient>(*backend, cfg.advisor.client, [stamp] { return stamp; });
        path.embedder = embedder.get();
        path.client = client.get();
    }
    const auto result = gateway::derive(model, cat, opts, path);

    if (!a.emit_matrix.empty()) write_output(a.emit_matrix, matrix::to_json(result.matrix).dump(2) + "\n");
    if (!a.emit_prompts.empty()) {
        fs::create_directories(a.emit_prompts);
        for (const auto& p : result.prompts) {
            write_output((fs::path(a.emit_prompts) / ("control-" + p.control_id + ".prompt.txt")).string(), p.text);
        }
    }
    for (const auto& [cid, msg] : result.request_errors) std::cerr << "advisor: " << cid << ": " << msg << "\n";
    write_output(a.out, decision::serialize_profile(result.profile));
    return 0;
}

int run_review(const std::string& profile_path, const std::string& reviewer, const std::string& out,
               const std::string& timestamp) {
    const auto profile = decision::parse_profile(read_file(profile_path));
    const auto ts = timestamp.empty() ? utc_now() : timestamp;
    auto session = review::open_session(profile, reviewer, "s-headless", ts);
    const auto n = review::accept_all_pending(session, reviewer, ts);
    const auto blocked = session.blocking();
    if (!blocked.empty()) {
        std::cerr << "accepted " << n << " controls; approval blocked by";
        for (const auto& id : blocked) std::cerr << " " << id;
        std::cerr << " (conflicts need an explicit decision)\n";
        return kBlockedExit;
    }
    write_output(out, decision::serialize_profile(review::approve(session, reviewer, ts)));
    std::cerr << "accepted " << n << " controls; profile approved\n";
    return 0;
}

int run_export(const std::string& config_path, const std::string& profile_path, const std::string& format,
               const std::string& out) {
    const auto profile = decision::parse_profile(read_file(profile_path));
    if (format == "json") {
        write_output(out, decision::serialize_profile(profile));
        return 0;
    }
    const auto cfg = require_config(config_path);
    write_output(out, decision::render_markdown(profile, load_catalog(cfg.catalog)));
    return 0;
}

int run_serve(const std::string& config_path) {
    auto cfg = require_config(config_path);
    gateway::Gateway::Deps deps;
    deps.catalog = load_catalog(cfg.catalog);
    deps.embedder = gateway::make_embedder(cfg.embedder);
    if (fs::exists(cfg.index)) deps.index = std::make_unique<rag::VectorIndex>(rag::VectorIndex::load(cfg.index));
    deps.backend = gateway::make_backend(cfg.advisor);
    deps.clock = utc_now;
    deps.config = std::move(cfg);
    gateway::Gateway gw(std::move(deps));
    gateway::serve(gw);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Target security profile derivation"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "Config file (default: $TSP_CONFIG)");

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Chunk and embed a corpus into an index file");
    ingest_cmd->add_option("--corpus", ingest.corpus, "Corpus directory with manifest.json")->required();
    ingest_cmd->add_option("--strategy", ingest.strategy, "character, sentence or structure");
    ingest_cmd->add_option("--size", ingest.size, "Chunk size in code points");
    ingest_cmd->add_option("--overlap", ingest.overlap, "Character-strategy overlap");
    ingest_cmd->add_option("--out", ingest.out, "Index file (default: config index path)");

    std::string v_catalog, v_passport;
    auto* validate_cmd = app.add_subcommand("validate", "Lint a catalog and optionally a passport");
    validate_cmd->add_option("--catalog", v_catalog, "Catalog file (default: config catalog)");
    validate_cmd->add_option("--passport", v_passport, "Passport file");

    DeriveArgs derive;
    auto* derive_cmd = app.add_subcommand("derive", "Derive a target profile from a passport");
    derive_cmd->add_option("--passport", derive.passport, "Passport file")->required();
    derive_cmd->add_option("--backend", derive.backend, "none, scripted or remote (default: config)");
    derive_cmd->add_option("--fixtures", derive.fixtures, "Scripted response directory");
    derive_cmd->add_option("--out", derive.out, "Profile output file (default: stdout)");
    derive_cmd->add_option("--emit-matrix", derive.emit_matrix, "Write the working matrix JSON here");
    derive_cmd->add_option("--emit-prompts", derive.emit_prompts, "Write assembled prompts into this directory");
    derive_cmd->add_option("--timestamp", derive.timestamp, "Provenance timestamp (default: now, UTC)");

    std::string r_profile, r_reviewer = "ci", r_out, r_timestamp;
    auto* review_cmd = app.add_subcommand("review", "Accept every pending control and approve, headless");
    review_cmd->add_option("--profile", r_profile, "Draft profile file")->required();
    review_cmd->add_option("--reviewer", r_reviewer, "Reviewer name recorded in the audit trail");
    review_cmd->add_option("--out", r_out, "Approved profile output (default: stdout)");
    review_cmd->add_option("--timestamp", r_timestamp, "Audit timestamp (default: now, UTC)");

    std::string e_profile, e_format = "json", e_out;
    auto* export_cmd = app.add_subcommand("export", "Render a profile as JSON or Markdown");
    export_cmd->add_option("--profile", e_profile, "Profile file")->required();
    export_cmd->add_option("--format", e_format, "json or markdown")->check(CLI::IsMember({"json", "markdown"}));
    export_cmd->add_option("--out", e_out, "Output file (default: stdout)");

    auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP gateway");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest_cmd) return run_ingest(config_path, ingest);
        if (*validate_cmd) return run_validate(config_path, v_catalog, v_passport);
        if (*derive_cmd) return run_derive(config_path, derive);
        if (*review_cmd) return run_review(r_profile, r_reviewer, r_out, r_timestamp);
        if (*export_cmd) return run_export(config_path, e_profile, e_format, e_out);
        if (*serve_cmd) return run_serve(config_path);
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what();
        if (!e.details().empty()) std::cerr << " " << e.details().dump();
        std::cerr << "\n";
        return kErrorExit;
    } catch (const std::exception& e) {
        std::cerr << "error: Internal: " << e.what() << "\n";
        return kErrorExit;
    }
    return 0;
}
