#include "fsel/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fsel/classic.hpp"
#include "fsel/error.hpp"
#include "fsel/llm.hpp"
#include "fsel/rafs.hpp"
#include "fsel/transport.hpp"

namespace fs = std::filesystem;

namespace fsel {

namespace {

const std::set<std::string> kKnownMethods{"mi",       "rfe",      "mrmr", "random",
                                          "llm_data", "llm_text", "rafs"};

bool is_llm_method(const std::string& m) {
    return m == "llm_data" || m == "llm_text" || m == "rafs";
}

std::string cell_key(const std::string& dataset, const std::string& method,
                     const std::string& shots, std::uint64_t seed) {
    return dataset + "|" + method + "|" + shots + "|" + std::to_string(seed);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    for (const auto& dj : j.at("datasets")) {
        DatasetSpec ds;
        ds.csv = dj.at("csv").get<std::string>();
        ds.name = dj.value("name", fs::path(ds.csv).stem().string());
        ds.descriptor = dj.value("descriptor", std::string{});
        ds.target = dj.at("target").get<std::string>();
        auto task = dj.value("task", std::string("classification"));
        if (task == "classification") {
            ds.task = TaskKind::classification;
        } else if (task == "regression") {
            ds.task = TaskKind::regression;
        } else {
            throw ConfigError("unknown task kind: " + task);
        }
        cfg.datasets.push_back(std::move(ds));
    }
    cfg.methods = j.at("methods").get<std::vector<std::string>>();
    for (const auto& s : j.at("shots")) {
        if (s.is_string()) {
            cfg.shots.push_back(s.get<std::string>());
        } else {
            cfg.shots.push_back(std::to_string(s.get<std::uint64_t>()));
        }
    }
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.ratio = j.value("ratio", 0.3);
    if (j.contains("grid")) cfg.grid = j.at("grid").get<std::vector<double>>();
    cfg.folds = j.value("folds", kDefaultFolds);
    cfg.rfe_lambda = j.value("rfe_lambda", 1.0);
    if (j.contains("transport")) {
        const auto& t = j.at("transport");
        cfg.transport.type = t.value("type", std::string{});
        cfg.transport.replay_file = t.value("replay_file", std::string{});
        cfg.transport.record_file = t.value("record_file", std::string{});
        cfg.transport.base_url = t.value("base_url", std::string{});
        cfg.transport.path = t.value("path", cfg.transport.path);
        cfg.transport.model = t.value("model", cfg.transport.model);
        cfg.transport.api_key_env = t.value("api_key_env", cfg.transport.api_key_env);
    }
    if (j.contains("provider")) {
        const auto& p = j.at("provider");
        cfg.provider.type = p.value("type", cfg.provider.type);
        cfg.provider.file = p.value("file", std::string{});
        cfg.provider.base_url = p.value("base_url", std::string{});
        cfg.provider.cache_dir = p.value("cache_dir", std::string{});
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    auto cfg = from_json(j);
    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    if (datasets.empty()) throw ConfigError("config: no datasets");
    if (methods.empty()) throw ConfigError("config: no methods");
    if (shots.empty()) throw ConfigError("config: no shot settings");
    if (seeds.empty()) throw ConfigError("config: no seeds");
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("config: ratio must be in (0, 1]");
    if (folds < 2) throw ConfigError("config: folds must be >= 2");
    if (grid.empty()) throw ConfigError("config: empty lambda grid");
    bool needs_transport = false;
    bool needs_provider = false;
    for (const auto& m : methods) {
        if (!kKnownMethods.count(m)) throw ConfigError("config: unknown method '" + m + "'");
        needs_transport |= is_llm_method(m);
        needs_provider |= (m == "rafs");
    }
    for (const auto& s : shots) {
        if (s == "full") continue;
        std::uint64_t v = 0;
        try {
            v = std::stoull(s);
        } catch (...) {
            throw ConfigError("config: bad shots entry '" + s + "'");
        }
        if (v < 1) throw ConfigError("config: shots entries must be >= 1");
    }
    if (needs_transport) {
        if (transport.type == "replay") {
            if (transport.replay_file.empty()) {
                throw ConfigError("config: replay transport needs replay_file");
            }
        } else if (transport.type == "http") {
            if (transport.base_url.empty()) {
                throw ConfigError("config: http transport needs base_url");
            }
        } else {
            throw ConfigError("config: llm methods need transport.type replay or http");
        }
    }
    if (needs_provider) {
        if (provider.type == "local") {
            if (provider.file.empty()) throw ConfigError("config: local provider needs file");
        } else if (provider.type != "ncbi") {
            throw ConfigError("config: provider.type must be local or ncbi");
        }
    }
    for (const auto& ds : datasets) {
        if (!fs::exists(ds.csv)) throw ConfigError("config: missing dataset CSV " + ds.csv);
        if (!ds.descriptor.empty() && !fs::exists(ds.descriptor)) {
            throw ConfigError("config: missing descriptor " + ds.descriptor);
        }
    }
}

std::vector<EvaluationRecord> read_records_csv(const std::string& path) {
    std::vector<EvaluationRecord> records;
    std::ifstream in(path);
    if (!in) return records;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::istringstream ss(line);
        EvaluationRecord r;
        std::string seed_str, value_str;
        std::getline(ss, r.dataset, ',');
        std::getline(ss, r.method, ',');
        std::getline(ss, r.shots, ',');
        std::getline(ss, seed_str, ',');
        std::getline(ss, r.metric, ',');
        std::getline(ss, value_str, ',');
        r.seed = std::stoull(seed_str);
        r.value = std::stod(value_str);
        records.push_back(std::move(r));
    }
    return records;
}

void write_summary(const std::vector<EvaluationRecord>& records, const std::string& path) {
    // per-method AUROC stats; std taken across per-shot means
    std::map<std::string, std::vector<double>> auroc_all;
    std::map<std::string, std::map<std::string, std::vector<double>>> auroc_by_shot;
    std::vector<EvaluationRecord> mae_records;
    for (const auto& r : records) {
        if (r.metric == "auroc") {
            auroc_all[r.method].push_back(r.value);
            auroc_by_shot[r.method][r.shots].push_back(r.value);
        } else {
            mae_records.push_back(r);
        }
    }

    std::ofstream out(path);
    if (!out) throw DataError("cannot write summary: " + path);
    out << "# Sweep summary\n\n";
    out << "Records: " << records.size() << "\n\n";

    if (!auroc_all.empty()) {
        out << "## Classification: mean AUROC per method\n\n";
        out << "| method | mean AUROC | std across shot settings |\n";
        out << "|---|---|---|\n";
        for (const auto& [method, vals] : auroc_all) {
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            std::vector<double> shot_means;
            for (const auto& [shot, sv] : auroc_by_shot[method]) {
                double m = 0.0;
                for (double v : sv) m += v;
                shot_means.push_back(m / static_cast<double>(sv.size()));
            }
            double sd = 0.0;
            if (shot_means.size() > 1) {
                double m = 0.0;
                for (double v : shot_means) m += v;
                m /= static_cast<double>(shot_means.size());
                for (double v : shot_means) sd += (v - m) * (v - m);
                sd = std::sqrt(sd / static_cast<double>(shot_means.size() - 1));
            }
            out << "| " << method << " | " << mean << " | " << sd << " |\n";
        }
        out << "\n";
    }

    if (!mae_records.empty()) {
        out << "## Regression: mean rank by MAE per method (lower is better)\n\n";
        out << "| method | mean rank |\n|---|---|\n";
        for (const auto& [method, rank] : aggregate_rank(mae_records)) {
            out << "| " << method << " | " << rank << " |\n";
        }
        out << "\n";
    }
}

SweepOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    fs::create_directories(fs::path(out_dir) / "selections");

    // Fail on unreadable inputs before any cell executes.
    struct Loaded {
        Dataset d;
        Descriptor desc;
    };
    std::vector<Loaded> loaded;
    for (const auto& ds : cfg.datasets) {
        Loaded l{load_dataset(ds.csv, ds.target, ds.task, ds.name), Descriptor{}};
        if (!ds.descriptor.empty()) l.desc = load_descriptor(ds.descriptor, l.d);
        loaded.push_back(std::move(l));
    }

    // Transport / provider built once per run; configuration errors abort here.
    std::shared_ptr<CompletionClient> client;
    bool any_llm = std::any_of(cfg.methods.begin(), cfg.methods.end(), is_llm_method);
    if (any_llm) {
        if (cfg.transport.type == "replay") {
            client = std::make_shared<ReplayClient>(cfg.transport.replay_file,
                                                    cfg.transport.model);
        } else {
            HttpTransportConfig hc;
            hc.base_url = cfg.transport.base_url;
            hc.path = cfg.transport.path;
            hc.model = cfg.transport.model;
            hc.api_key_env = cfg.transport.api_key_env;
            client = std::make_shared<HttpCompletionClient>(hc);
            std::string record_file = cfg.transport.record_file;
            if (record_file.empty()) {
                fs::create_directories(fs::path(out_dir) / "transcripts");
                record_file = (fs::path(out_dir) / "transcripts" / "run.jsonl").string();
            }
            client = std::make_shared<RecordingClient>(client, record_file);
        }
    }
    std::unique_ptr<MetadataProvider> provider;
    std::unique_ptr<MetadataCache> cache;
    bool any_rafs = std::count(cfg.methods.begin(), cfg.methods.end(), "rafs") > 0;
    if (any_rafs) {
        if (cfg.provider.type == "local") {
            provider = std::make_unique<LocalFileProvider>(cfg.provider.file);
        } else {
            NcbiConfig nc;
            if (!cfg.provider.base_url.empty()) nc.base_url = cfg.provider.base_url;
            provider = std::make_unique<NcbiProvider>(nc);
        }
        std::string cache_dir = cfg.provider.cache_dir.empty()
                                    ? (fs::path(out_dir) / "meta_cache").string()
                                    : cfg.provider.cache_dir;
        cache = std::make_unique<MetadataCache>(cache_dir);
    }

    const std::string records_path = (fs::path(out_dir) / "records.csv").string();
    SweepOutcome outcome;
    outcome.records = read_records_csv(records_path);
    std::set<std::string> done;
    for (const auto& r : outcome.records) {
        done.insert(cell_key(r.dataset, r.method, r.shots, r.seed));
    }

    std::ofstream rec_out;
    auto append_record = [&](const EvaluationRecord& r) {
        if (!rec_out.is_open()) {
            bool fresh = !fs::exists(records_path) || fs::file_size(records_path) == 0;
            rec_out.open(records_path, std::ios::app);
            if (fresh) rec_out << "dataset,method,shots,seed,metric,value\n";
        }
        rec_out << r.dataset << "," << r.method << "," << r.shots << "," << r.seed << ","
                << r.metric << "," << render_number(r.value) << "\n";
        rec_out.flush();
    };

    for (std::size_t di = 0; di < cfg.datasets.size(); ++di) {
        const auto& d = loaded[di].d;
        const auto& desc = loaded[di].desc;
        for (const auto& method : cfg.methods) {
            for (const auto& shots : cfg.shots) {
                for (auto seed : cfg.seeds) {
                    const auto key = cell_key(d.name, method, shots, seed);
                    if (done.count(key)) {
                        ++outcome.skipped_cells;
                        continue;
                    }
                    try {
                        std::vector<std::size_t> rows;  // empty = full data
                        std::size_t k_shots = d.n_rows();
                        if (shots != "full") {
                            k_shots = std::min<std::size_t>(std::stoull(shots), d.n_rows());
                            rows = subsample_shots(d, k_shots, seed);
                        }

                        SelectionResult sel;
                        if (method == "mi") {
                            sel = mi_filter(d, cfg.ratio, rows);
                        } else if (method == "mrmr") {
                            sel = mrmr(d, cfg.ratio, rows);
                        } else if (method == "rfe") {
                            sel = rfe(d, cfg.ratio, cfg.rfe_lambda, rows);
                        } else if (method == "random") {
                            sel = random_select(d, cfg.ratio, seed);
                        } else if (method == "llm_data" || method == "llm_text") {
                            ScoreConfig sc;
                            sc.shots = k_shots;
                            sc.seed = seed;
                            auto strategy = method == "llm_data" ? ScoreMethod::data_driven
                                                                 : ScoreMethod::text_based;
                            auto scores = score_all_features(d, desc, strategy, *client, sc);
                            sel = rank_and_select(scores, cfg.ratio, method);
                        } else {  // rafs
                            ScoreConfig sc;
                            sc.seed = seed;
                            sel = rafs_select(d, desc, *provider, *cache, *client, cfg.ratio, sc);
                        }

                        auto sel_path = fs::path(out_dir) / "selections" /
                                        (d.name + "_" + method + "_" + shots + "_" +
                                         std::to_string(seed) + ".json");
                        std::ofstream sf(sel_path);
                        sf << sel.to_json().dump(2) << "\n";

                        auto rec = evaluate_selection(d, sel, seed, cfg.grid, cfg.folds);
                        rec.shots = shots;
                        append_record(rec);
                        outcome.records.push_back(rec);
                        done.insert(key);
                        ++outcome.executed_cells;
                    } catch (const Error& e) {
                        outcome.failures.push_back(key + ": " + e.what());
                    }
                }
            }
        }
    }

    write_summary(outcome.records, (fs::path(out_dir) / "summary.md").string());
    return outcome;
}

}  // namespace fsel
