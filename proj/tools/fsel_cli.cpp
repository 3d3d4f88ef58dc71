// Command-line surface: select / evaluate / sweep / record / replay / fetch-meta.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "fsel/classic.hpp"
#include "fsel/error.hpp"
#include "fsel/eval.hpp"
#include "fsel/llm.hpp"
#include "fsel/rafs.hpp"
#include "fsel/runner.hpp"
#include "fsel/transport.hpp"

namespace {

struct SelectOptions {
    std::string csv;
    std::string target;
    std::string task = "classification";
    std::string name;
    std::string descriptor;
    std::string method = "mi";
    double ratio = 0.3;
    std::string shots = "full";
    std::uint64_t seed = 0;
    double rfe_lambda = 1.0;
    std::string replay_file;
    std::string record_file;
    std::string endpoint;
    std::string endpoint_path = "/v1/chat/completions";
    std::string model = "replay";
    std::string api_key_env = "FSEL_API_KEY";
    std::string provider_type = "local";
    std::string provider_file;
    std::string ncbi_url;
    std::string cache_dir = "meta_cache";
    std::string out;
};

void add_select_options(CLI::App* cmd, SelectOptions& o) {
    cmd->add_option("--csv", o.csv, "input dataset CSV")->required();
    cmd->add_option("--target", o.target, "target column name")->required();
    cmd->add_option("--task", o.task, "classification or regression");
    cmd->add_option("--name", o.name, "dataset name (defaults to the CSV stem)");
    cmd->add_option("--descriptor", o.descriptor, "descriptor JSON file");
    cmd->add_option("--method", o.method, "mi | rfe | mrmr | random | llm_data | llm_text | rafs");
    cmd->add_option("--ratio", o.ratio, "selection ratio in (0, 1]");
    cmd->add_option("--shots", o.shots, "row budget for selection statistics, or 'full'");
    cmd->add_option("--seed", o.seed, "seed");
    cmd->add_option("--rfe-lambda", o.rfe_lambda, "RFE inner-model regularization");
    cmd->add_option("--replay-file", o.replay_file, "transcript to replay completions from");
    cmd->add_option("--record-file", o.record_file, "transcript to append live completions to");
    cmd->add_option("--endpoint", o.endpoint, "completion endpoint base URL");
    cmd->add_option("--endpoint-path", o.endpoint_path, "completion endpoint path");
    cmd->add_option("--model", o.model, "model id");
    cmd->add_option("--api-key-env", o.api_key_env, "env var holding the API credential");
    cmd->add_option("--provider", o.provider_type, "rafs metadata provider: local | ncbi");
    cmd->add_option("--provider-file", o.provider_file, "local provider metadata JSON");
    cmd->add_option("--ncbi-url", o.ncbi_url, "override the gene-database base URL");
    cmd->add_option("--cache-dir", o.cache_dir, "metadata cache directory");
    cmd->add_option("--out", o.out, "write the selection record to this JSON file");
}

fsel::TaskKind parse_task(const std::string& s) {
    if (s == "classification") return fsel::TaskKind::classification;
    if (s == "regression") return fsel::TaskKind::regression;
    throw fsel::ConfigError("unknown task: " + s);
}

std::shared_ptr<fsel::CompletionClient> make_client(const SelectOptions& o) {
    if (!o.replay_file.empty()) {
        return std::make_shared<fsel::ReplayClient>(o.replay_file, o.model);
    }
    if (o.endpoint.empty()) {
        throw fsel::ConfigError("llm methods need --replay-file or --endpoint");
    }
    fsel::HttpTransportConfig hc;
    hc.base_url = o.endpoint;
    hc.path = o.endpoint_path;
    hc.model = o.model;
    hc.api_key_env = o.api_key_env;
    std::shared_ptr<fsel::CompletionClient> client =
        std::make_shared<fsel::HttpCompletionClient>(hc);
    if (!o.record_file.empty()) {
        client = std::make_shared<fsel::RecordingClient>(client, o.record_file);
    }
    return client;
}

int run_select(const SelectOptions& o) {
    auto d = fsel::load_dataset(o.csv, o.target, parse_task(o.task), o.name);
    fsel::Descriptor desc;
    if (!o.descriptor.empty()) desc = fsel::load_descriptor(o.descriptor, d);

    std::vector<std::size_t> rows;
    std::size_t k_shots = d.n_rows();
    if (o.shots != "full") {
        k_shots = std::stoull(o.shots);
        rows = fsel::subsample_shots(d, k_shots, o.seed);
    }

    fsel::SelectionResult sel;
    if (o.method == "mi") {
        sel = fsel::mi_filter(d, o.ratio, rows);
    } else if (o.method == "mrmr") {
        sel = fsel::mrmr(d, o.ratio, rows);
    } else if (o.method == "rfe") {
        sel = fsel::rfe(d, o.ratio, o.rfe_lambda, rows);
    } else if (o.method == "random") {
        sel = fsel::random_select(d, o.ratio, o.seed);
    } else if (o.method == "llm_data" || o.method == "llm_text") {
        auto client = make_client(o);
        fsel::ScoreConfig sc;
        sc.shots = k_shots;
        sc.seed = o.seed;
        auto strategy = o.method == "llm_data" ? fsel::ScoreMethod::data_driven
                                               : fsel::ScoreMethod::text_based;
        sel = fsel::rank_and_select(fsel::score_all_features(d, desc, strategy, *client, sc),
                                    o.ratio, o.method);
    } else if (o.method == "rafs") {
        auto client = make_client(o);
        std::unique_ptr<fsel::MetadataProvider> provider;
        if (o.provider_type == "local") {
            provider = std::make_unique<fsel::LocalFileProvider>(o.provider_file);
        } else {
            fsel::NcbiConfig nc;
            if (!o.ncbi_url.empty()) nc.base_url = o.ncbi_url;
            provider = std::make_unique<fsel::NcbiProvider>(nc);
        }
        fsel::MetadataCache cache(o.cache_dir);
        fsel::ScoreConfig sc;
        sc.seed = o.seed;
        sel = fsel::rafs_select(d, desc, *provider, cache, *client, o.ratio, sc);
    } else {
        throw fsel::ConfigError("unknown method: " + o.method);
    }

    auto j = sel.to_json();
    std::cout << j.dump(2) << "\n";
    if (!o.out.empty()) {
        std::ofstream out(o.out);
        if (!out) throw fsel::DataError("cannot write " + o.out);
        out << j.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"feature-selection engine and experiment harness"};
    app.require_subcommand(1);

    SelectOptions sel_opts;
    auto* sel_cmd = app.add_subcommand("select", "rank features and select a subset");
    add_select_options(sel_cmd, sel_opts);

    struct {
        std::string csv, target, task = "classification", name, selection;
        std::uint64_t seed = 0;
        int folds = fsel::kDefaultFolds;
        std::string grid;
    } eval_opts;
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a selection with the downstream model");
    eval_cmd->add_option("--csv", eval_opts.csv)->required();
    eval_cmd->add_option("--target", eval_opts.target)->required();
    eval_cmd->add_option("--task", eval_opts.task);
    eval_cmd->add_option("--name", eval_opts.name);
    eval_cmd->add_option("--selection", eval_opts.selection, "selection record JSON")->required();
    eval_cmd->add_option("--seed", eval_opts.seed);
    eval_cmd->add_option("--folds", eval_opts.folds);
    eval_cmd->add_option("--grid", eval_opts.grid, "comma-separated lambda grid");

    struct {
        std::string config, out_dir = "out";
    } sweep_opts;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a full experiment grid");
    sweep_cmd->add_option("--config", sweep_opts.config)->required();
    sweep_cmd->add_option("--out-dir", sweep_opts.out_dir);

    // record/replay manage LLM transcripts around a nested select
    SelectOptions record_opts;
    std::string record_path;
    auto* record_cmd = app.add_subcommand("record", "run select against a live endpoint, recording the transcript");
    record_cmd->add_option("--file", record_path, "transcript file to append to")->required();
    auto* record_sel = record_cmd->add_subcommand("select");
    add_select_options(record_sel, record_opts);
    record_cmd->require_subcommand(1);

    SelectOptions replay_opts;
    std::string replay_path;
    auto* replay_cmd = app.add_subcommand("replay", "run select against a recorded transcript");
    replay_cmd->add_option("--file", replay_path, "transcript file to replay")->required();
    auto* replay_sel = replay_cmd->add_subcommand("select");
    add_select_options(replay_sel, replay_opts);
    replay_cmd->require_subcommand(1);

    struct {
        std::string features, csv, target;
        std::string provider = "ncbi";
        std::string provider_file, ncbi_url;
        std::string cache_dir = "meta_cache";
    } meta_opts;
    auto* meta_cmd = app.add_subcommand("fetch-meta", "warm the metadata cache");
    meta_cmd->add_option("--features", meta_opts.features, "comma-separated feature symbols");
    meta_cmd->add_option("--csv", meta_opts.csv, "take feature names from this CSV header");
    meta_cmd->add_option("--target", meta_opts.target, "target column to skip when using --csv");
    meta_cmd->add_option("--provider", meta_opts.provider, "local | ncbi");
    meta_cmd->add_option("--provider-file", meta_opts.provider_file);
    meta_cmd->add_option("--ncbi-url", meta_opts.ncbi_url);
    meta_cmd->add_option("--cache-dir", meta_opts.cache_dir);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sel_cmd->parsed()) return run_select(sel_opts);

        if (record_cmd->parsed()) {
            record_opts.record_file = record_path;
            record_opts.replay_file.clear();
            return run_select(record_opts);
        }
        if (replay_cmd->parsed()) {
            replay_opts.replay_file = replay_path;
            return run_select(replay_opts);
        }

        if (eval_cmd->parsed()) {
            auto d = fsel::load_dataset(eval_opts.csv, eval_opts.target, parse_task(eval_opts.task),
                                        eval_opts.name);
            std::ifstream in(eval_opts.selection);
            if (!in) throw fsel::ConfigError("cannot open selection: " + eval_opts.selection);
            nlohmann::json j;
            in >> j;
            auto sel = fsel::SelectionResult::from_json(j);
            std::vector<double> grid = fsel::kDefaultLambdaGrid;
            if (!eval_opts.grid.empty()) {
                grid.clear();
                std::istringstream ss(eval_opts.grid);
                std::string tok;
                while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
            }
            auto rec = fsel::evaluate_selection(d, sel, eval_opts.seed, grid, eval_opts.folds);
            std::cout << rec.dataset << "," << rec.method << "," << rec.shots << "," << rec.seed
                      << "," << rec.metric << "," << fsel::render_number(rec.value) << "\n";
            return 0;
        }

        if (sweep_cmd->parsed()) {
            auto cfg = fsel::ExperimentConfig::load(sweep_opts.config);
            auto outcome = fsel::run_experiment(cfg, sweep_opts.out_dir);
            std::cout << "executed " << outcome.executed_cells << " cells, skipped "
                      << outcome.skipped_cells << " already-complete cells\n";
            for (const auto& f : outcome.failures) std::cerr << "cell failed: " << f << "\n";
            std::cout << "reports in " << sweep_opts.out_dir << "\n";
            return outcome.failures.empty() ? 0 : 2;
        }

        if (meta_cmd->parsed()) {
            std::vector<std::string> features;
            if (!meta_opts.features.empty()) {
                std::istringstream ss(meta_opts.features);
                std::string tok;
                while (std::getline(ss, tok, ',')) features.push_back(tok);
            } else if (!meta_opts.csv.empty()) {
                auto d = fsel::load_dataset(meta_opts.csv, meta_opts.target,
                                            fsel::TaskKind::classification);
                for (const auto& c : d.features) features.push_back(c.name);
            } else {
                throw fsel::ConfigError("fetch-meta needs --features or --csv");
            }
            std::unique_ptr<fsel::MetadataProvider> provider;
            if (meta_opts.provider == "local") {
                provider = std::make_unique<fsel::LocalFileProvider>(meta_opts.provider_file);
            } else {
                fsel::NcbiConfig nc;
                if (!meta_opts.ncbi_url.empty()) nc.base_url = meta_opts.ncbi_url;
                provider = std::make_unique<fsel::NcbiProvider>(nc);
            }
            fsel::MetadataCache cache(meta_opts.cache_dir);
            for (const auto& f : features) {
                auto m = fsel::fetch_metadata(f, *provider, cache);
                std::cout << m.feature << ": " << (m.missing ? "(missing)" : m.official_name)
                          << "\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
