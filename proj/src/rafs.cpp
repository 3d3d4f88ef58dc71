#include "fsel/rafs.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fsel/error.hpp"
#include "fsel/rng.hpp"

namespace fs = std::filesystem;

namespace fsel {

namespace {

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json meta_to_json(const FeatureMetadata& m) {
    return {{"feature", m.feature},
            {"official_name", m.official_name},
            {"summary", m.summary},
            {"source", m.source == MetadataSource::ncbi ? "ncbi" : "local_file"},
            {"retrieved_at", m.retrieved_at},
            {"missing", m.missing}};
}

FeatureMetadata meta_from_json(const nlohmann::json& j) {
    FeatureMetadata m;
    m.feature = j.at("feature").get<std::string>();
    m.official_name = j.value("official_name", std::string{});
    m.summary = j.value("summary", std::string{});
    m.source = j.value("source", std::string{"local_file"}) == "ncbi" ? MetadataSource::ncbi
                                                                      : MetadataSource::local_file;
    m.retrieved_at = j.value("retrieved_at", std::string{});
    m.missing = j.value("missing", false);
    return m;
}

}  // namespace

LocalFileProvider::LocalFileProvider(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open local metadata file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid metadata JSON: ") + e.what());
    }
    for (auto& [symbol, rec] : j.items()) {
        records_[MetadataCache::normalize(symbol)] = {rec.value("official_name", std::string{}),
                                                      rec.value("summary", std::string{})};
    }
}

std::optional<FeatureMetadata> LocalFileProvider::fetch(const std::string& symbol) {
    auto it = records_.find(MetadataCache::normalize(symbol));
    if (it == records_.end()) return std::nullopt;
    FeatureMetadata m;
    m.feature = MetadataCache::normalize(symbol);
    m.official_name = it->second.first;
    m.summary = it->second.second;
    m.source = MetadataSource::local_file;
    m.retrieved_at = utc_now();
    return m;
}

NcbiProvider::NcbiProvider(NcbiConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.requests_per_second <= 0.0) {
        throw ConfigError("NcbiProvider: requests_per_second must be positive");
    }
}

void NcbiProvider::throttle() {
    using namespace std::chrono;
    const auto min_gap = duration_cast<steady_clock::duration>(
        duration<double>(1.0 / cfg_.requests_per_second));
    std::lock_guard<std::mutex> lock(mu_);
    auto now = steady_clock::now();
    if (last_request_.time_since_epoch().count() != 0 && now - last_request_ < min_gap) {
        std::this_thread::sleep_for(min_gap - (now - last_request_));
    }
    last_request_ = steady_clock::now();
}

std::optional<FeatureMetadata> NcbiProvider::fetch(const std::string& symbol) {
    httplib::Client cli(cfg_.base_url);
    cli.set_read_timeout(30, 0);

    auto get_json = [&](const std::string& path) -> nlohmann::json {
        std::string last_error;
        Rng jitter(retry_jitter_state_++);
        for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            if (attempt > 0) {
                auto ms = (100 << (attempt - 1)) + static_cast<int>(jitter.below(100));
                std::this_thread::sleep_for(std::chrono::milliseconds(ms));
            }
            throttle();
            auto res = cli.Get(path);
            if (!res) {
                last_error = "connection error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status != 200) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            auto j = nlohmann::json::parse(res->body, nullptr, false);
            if (j.is_discarded()) {
                last_error = "malformed JSON response";
                continue;
            }
            return j;
        }
        throw RetrievalError("metadata query failed for '" + symbol + "': " + last_error);
    };

    const std::string norm = MetadataCache::normalize(symbol);
    std::string term = norm + "[sym]";
    if (!cfg_.organism.empty()) term += " AND " + cfg_.organism + "[orgn]";
    auto search = get_json("/entrez/eutils/esearch.fcgi?db=gene&retmode=json&term=" +
                           httplib::detail::encode_url(term));

    std::string gene_id;
    if (search.contains("esearchresult")) {
        const auto& ids = search["esearchresult"].value("idlist", nlohmann::json::array());
        if (!ids.empty()) gene_id = ids.front().get<std::string>();
    }
    if (gene_id.empty()) return std::nullopt;

    auto summary = get_json("/entrez/eutils/esummary.fcgi?db=gene&retmode=json&id=" + gene_id);
    FeatureMetadata m;
    m.feature = norm;
    m.source = MetadataSource::ncbi;
    m.retrieved_at = utc_now();
    if (summary.contains("result") && summary["result"].contains(gene_id)) {
        const auto& rec = summary["result"][gene_id];
        m.official_name = rec.value("nomenclaturename", rec.value("description", std::string{}));
        m.summary = rec.value("summary", std::string{});
    }
    if (m.official_name.empty() && m.summary.empty()) return std::nullopt;
    return m;
}

MetadataCache::MetadataCache(std::string dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
}

std::string MetadataCache::normalize(const std::string& symbol) {
    std::size_t first = symbol.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw DataError("empty feature symbol");
    std::size_t last = symbol.find_last_not_of(" \t\r\n");
    std::string s = symbol.substr(first, last - first + 1);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

std::string MetadataCache::path_for(const std::string& normalized) const {
    // File-system-safe key: non-alnum bytes hex-escaped.
    std::string key;
    for (unsigned char c : normalized) {
        if (std::isalnum(c) || c == '-' || c == '_') {
            key += static_cast<char>(c);
        } else {
            char buf[4];
            std::snprintf(buf, sizeof(buf), "%%%02X", c);
            key += buf;
        }
    }
    return (fs::path(dir_) / (key + ".json")).string();
}

std::optional<FeatureMetadata> MetadataCache::get(const std::string& symbol) const {
    std::ifstream in(path_for(normalize(symbol)));
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;  // corrupt entry treated as a miss
    }
    return meta_from_json(j);
}

void MetadataCache::put(const FeatureMetadata& meta) {
    auto path = path_for(meta.feature);
    if (fs::exists(path)) return;  // entries are immutable
    std::ofstream out(path);
    if (!out) throw DataError("cannot write cache entry: " + path);
    out << meta_to_json(meta).dump(2) << "\n";
}

FeatureMetadata fetch_metadata(const std::string& feature, MetadataProvider& provider,
                               MetadataCache& cache) {
    if (auto cached = cache.get(feature)) return *cached;
    auto fetched = provider.fetch(feature);
    FeatureMetadata m;
    if (fetched) {
        m = *fetched;
    } else {
        m.feature = MetadataCache::normalize(feature);
        m.source = provider.source();
        m.retrieved_at = utc_now();
        m.missing = true;
    }
    cache.put(m);
    return m;
}

PromptBundle build_rafs_prompt(const std::string& feature, const FeatureMetadata& meta,
                               const Descriptor& desc, const PromptTemplate& tpl,
                               const RafsOptions& opts) {
    PromptBundle b = build_text_prompt(feature, desc, tpl);
    b.mode = OutputMode::json_score;
    if (meta.missing || (meta.official_name.empty() && meta.summary.empty())) {
        b.degraded = true;
        return b;
    }
    std::string summary = meta.summary;
    if (summary.size() > opts.summary_budget) {
        summary.resize(opts.summary_budget);
    }
    b.system += "\n\nSupport document for \"" + feature + "\":\nOfficial full name: " +
                meta.official_name + "\nSummary: " + summary;
    return b;
}

std::vector<FeatureScore> rafs_score_features(const Dataset& d, const Descriptor& desc,
                                              MetadataProvider& provider, MetadataCache& cache,
                                              CompletionClient& client, const ScoreConfig& cfg,
                                              const RafsOptions& opts) {
    std::vector<FeatureScore> scores;
    scores.reserve(d.n_features());
    for (const auto& col : d.features) {
        FeatureScore fs;
        fs.feature = col.name;
        fs.method = ScoreMethod::rafs;
        fs.model_id = client.model_id();

        FeatureMetadata meta;
        try {
            meta = fetch_metadata(col.name, provider, cache);
        } catch (const RetrievalError& e) {
            meta.feature = MetadataCache::normalize(col.name);
            meta.missing = true;  // degrade to the plain text prompt
            fs.note = std::string("metadata retrieval failed: ") + e.what();
        }
        PromptBundle bundle = build_rafs_prompt(col.name, meta, desc, PromptTemplate{}, opts);

        CompletionRequest req{bundle.system, bundle.user, cfg.temperature, cfg.max_tokens};
        std::string last_error;
        bool ok = false;
        for (int attempt = 0; attempt <= cfg.retries && !ok; ++attempt) {
            try {
                auto res = client.complete(req);
                auto parsed = parse_score(res.text, bundle.mode);
                fs.score = parsed.score;
                fs.rationale = parsed.rationale;
                fs.clamped = parsed.clamped;
                ok = true;
            } catch (const Error& e) {
                last_error = e.what();
            }
        }
        if (!ok) {
            fs.score = 0.0;
            fs.failed = true;
            fs.note = "feature '" + col.name + "' scored 0 after " +
                      std::to_string(cfg.retries + 1) + " attempts: " + last_error;
        }
        scores.push_back(std::move(fs));
    }
    return scores;
}

SelectionResult rafs_select(const Dataset& d, const Descriptor& desc, MetadataProvider& provider,
                            MetadataCache& cache, CompletionClient& client, double ratio,
                            const ScoreConfig& cfg, const RafsOptions& opts) {
    auto scores = rafs_score_features(d, desc, provider, cache, client, cfg, opts);
    return rank_and_select(scores, ratio, "rafs");
}

}  // namespace fsel
