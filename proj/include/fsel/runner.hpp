#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsel/eval.hpp"

namespace fsel {

struct DatasetSpec {
    std::string name;
    std::string csv;
    std::string descriptor;  // optional; required by llm_text / rafs
    std::string target;
    TaskKind task = TaskKind::classification;
};

struct TransportSpec {
    std::string type;  // "replay" or "http"
    std::string replay_file;
    std::string record_file;  // optional, http only
    std::string base_url;
    std::string path = "/v1/chat/completions";
    std::string model = "replay";
    std::string api_key_env = "FSEL_API_KEY";
};

struct ProviderSpec {
    std::string type = "local";  // "local" or "ncbi"
    std::string file;            // local provider map
    std::string base_url;        // ncbi override
    std::string cache_dir;
};

struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<std::string> methods;  // mi | rfe | mrmr | random | llm_data | llm_text | rafs
    std::vector<std::string> shots;    // counts as strings, or "full"
    std::vector<std::uint64_t> seeds;
    double ratio = 0.3;
    std::vector<double> grid = kDefaultLambdaGrid;
    int folds = kDefaultFolds;
    double rfe_lambda = 1.0;
    TransportSpec transport;
    ProviderSpec provider;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);
    void validate() const;  // throws ConfigError
};

struct SweepOutcome {
    std::vector<EvaluationRecord> records;  // resumed + newly computed
    std::size_t executed_cells = 0;
    std::size_t skipped_cells = 0;  // already present in records.csv
    std::vector<std::string> failures;
};

// Runs the full sweep grid, writing records.csv incrementally (resume skips
// completed cells), selections/*.json, and summary.md under out_dir.
SweepOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

std::vector<EvaluationRecord> read_records_csv(const std::string& path);
void write_summary(const std::vector<EvaluationRecord>& records, const std::string& path);

}  // namespace fsel
