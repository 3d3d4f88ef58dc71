#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "fsel/llm.hpp"
#include "fsel/tabular.hpp"

namespace fsel {

enum class MetadataSource { ncbi, local_file };

struct FeatureMetadata {
    std::string feature;  // normalized symbol
    std::string official_name;
    std::string summary;
    MetadataSource source = MetadataSource::local_file;
    std::string retrieved_at;  // ISO-8601 UTC
    bool missing = false;      // provider had no record for this symbol
};

class MetadataProvider {
public:
    virtual ~MetadataProvider() = default;
    // nullopt = not found; throws RetrievalError on transport failure.
    virtual std::optional<FeatureMetadata> fetch(const std::string& symbol) = 0;
    virtual MetadataSource source() const = 0;
};

// Provider backed by a JSON file: {symbol: {official_name, summary}, ...}.
// Symbols are matched case-insensitively.
class LocalFileProvider : public MetadataProvider {
public:
    explicit LocalFileProvider(const std::string& path);
    std::optional<FeatureMetadata> fetch(const std::string& symbol) override;
    MetadataSource source() const override { return MetadataSource::local_file; }

private:
    std::map<std::string, std::pair<std::string, std::string>> records_;
};

struct NcbiConfig {
    std::string base_url = "https://eutils.ncbi.nlm.nih.gov";  // overridable for tests
    std::string organism = "human";
    double requests_per_second = 3.0;
    int max_retries = 3;
};

// Gene-database provider: symbol search (esearch, db=gene) then summary fetch
// (esummary), both in JSON wire format. Requests go through a rate limiter
// with jittered retry.
class NcbiProvider : public MetadataProvider {
public:
    explicit NcbiProvider(NcbiConfig cfg = NcbiConfig{});
    std::optional<FeatureMetadata> fetch(const std::string& symbol) override;
    MetadataSource source() const override { return MetadataSource::ncbi; }

private:
    void throttle();
    NcbiConfig cfg_;
    std::mutex mu_;
    std::chrono::steady_clock::time_point last_request_{};
    std::uint64_t retry_jitter_state_ = 0x5eed;
};

// Disk cache, one JSON record per normalized (uppercased, trimmed) symbol.
// Entries are immutable once written; hits never touch the provider.
class MetadataCache {
public:
    explicit MetadataCache(std::string dir);
    std::optional<FeatureMetadata> get(const std::string& symbol) const;
    void put(const FeatureMetadata& meta);
    static std::string normalize(const std::string& symbol);

private:
    std::string path_for(const std::string& normalized) const;
    std::string dir_;
};

FeatureMetadata fetch_metadata(const std::string& feature, MetadataProvider& provider,
                               MetadataCache& cache);

struct RafsOptions {
    std::size_t summary_budget = 1200;  // support-document character cap
};

// Text-based bundle whose system prompt embeds a support document with the
// retrieved official name and summary; missing metadata falls back to the
// plain text prompt with the bundle flagged degraded.
PromptBundle build_rafs_prompt(const std::string& feature, const FeatureMetadata& meta,
                               const Descriptor& desc, const PromptTemplate& tpl = PromptTemplate{},
                               const RafsOptions& opts = RafsOptions{});

SelectionResult rafs_select(const Dataset& d, const Descriptor& desc, MetadataProvider& provider,
                            MetadataCache& cache, CompletionClient& client, double ratio,
                            const ScoreConfig& cfg = ScoreConfig{},
                            const RafsOptions& opts = RafsOptions{});

// Per-feature scores for the rafs strategy (rafs_select = this + rank_and_select).
std::vector<FeatureScore> rafs_score_features(const Dataset& d, const Descriptor& desc,
                                              MetadataProvider& provider, MetadataCache& cache,
                                              CompletionClient& client,
                                              const ScoreConfig& cfg = ScoreConfig{},
                                              const RafsOptions& opts = RafsOptions{});

}  // namespace fsel
