#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsel/classic.hpp"
#include "fsel/tabular.hpp"
#include "fsel/transport.hpp"

namespace fsel {

enum class OutputMode { plain_score, json_score };

enum class ScoreMethod { data_driven, text_based, rafs };

std::string to_string(ScoreMethod m);

struct PromptBundle {
    std::string system;
    std::string user;
    OutputMode mode = OutputMode::plain_score;
    std::string feature;
    bool degraded = false;  // fallback path was taken (missing description/metadata)
};

struct FeatureScore {
    std::string feature;
    double score = 0.0;
    std::optional<std::string> rationale;
    ScoreMethod method = ScoreMethod::data_driven;
    std::string model_id;
    bool failed = false;        // completion failed after retries; score forced to 0
    bool clamped = false;       // model emitted an out-of-range score
    std::string note;           // failure / clamp diagnostics
};

// Instruction strings shared by the prompt builders; defaults follow the
// scoring-prompt wording the pipelines are tested against.
struct PromptTemplate {
    std::string scoring_instruction =
        "For the given feature, your task is to provide a feature importance score "
        "(between 0 and 1; larger value indicates greater importance).";
    std::string pairs_preamble =
        "Here are some data points in the format of (feature value, target value), "
        "please refer to this to determine how informative the feature is in predicting "
        "the target value:";
    std::string question = "Question: What is the importance score for the given feature";
    std::string answer_scaffold = "Answer: The importance score is";
    bool fallback_to_feature_name = true;  // text prompts: use the bare name when no description
};

PromptBundle build_data_driven_prompt(const SamplePairs& sp,
                                      const PromptTemplate& tpl = PromptTemplate{});

PromptBundle build_text_prompt(const std::string& feature, const Descriptor& desc,
                               const PromptTemplate& tpl = PromptTemplate{});

struct ParsedScore {
    double score = 0.0;
    std::optional<std::string> rationale;
    bool clamped = false;
};

// plain_score: first real number after "importance score is" (case-insensitive),
// else the first real number anywhere. json_score: outermost JSON object,
// required "score", optional "reasoning". Out-of-range scores clamp to [0,1].
ParsedScore parse_score(const std::string& text, OutputMode mode);

struct ScoreConfig {
    std::size_t shots = 16;      // data_driven only
    std::uint64_t seed = 0;
    int retries = 2;
    double temperature = 0.0;
    int max_tokens = 1024;
};

// One FeatureScore per feature, in column order. A feature whose completion
// fails after retries scores 0 with failed=true; the run continues.
std::vector<FeatureScore> score_all_features(const Dataset& d, const Descriptor& desc,
                                             ScoreMethod strategy, CompletionClient& client,
                                             const ScoreConfig& cfg = ScoreConfig{});

// Descending score, ties by ascending column index (= input order).
SelectionResult rank_and_select(const std::vector<FeatureScore>& scores, double ratio,
                                const std::string& method);

}  // namespace fsel
