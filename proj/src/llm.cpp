#include "fsel/llm.hpp"

#include <algorithm>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fsel/error.hpp"

namespace fsel {

std::string to_string(ScoreMethod m) {
    switch (m) {
        case ScoreMethod::data_driven: return "llm_data";
        case ScoreMethod::text_based: return "llm_text";
        case ScoreMethod::rafs: return "rafs";
    }
    return "unknown";
}

PromptBundle build_data_driven_prompt(const SamplePairs& sp, const PromptTemplate& tpl) {
    if (sp.pairs.empty()) throw DataError("build_data_driven_prompt: empty sample pairs");
    PromptBundle b;
    b.mode = OutputMode::plain_score;
    b.feature = sp.feature;
    b.system = tpl.scoring_instruction;

    std::ostringstream user;
    user << tpl.pairs_preamble << "\n";
    for (const auto& [value, target] : sp.pairs) {
        user << "(" << value << ", " << target << ")\n";
    }
    user << "\nHere is an example:\n```\n"
         << tpl.question << "\n"
         << tpl.answer_scaffold << " 0.9\n```\n\n"
         << tpl.question << "\n"
         << tpl.answer_scaffold;
    b.user = user.str();
    return b;
}

namespace {

const char* kOutputSchema =
    R"({"description": "Feature importance output.", "properties": {"reasoning": {"title": "Reasoning", "description": "Logical reasoning behind feature importance score", "type": "string"}, "score": {"title": "Score", "description": "Feature importance score", "type": "number"}}, "required": ["score"]})";

const char* kJsonDemonstration =
    R"({"reasoning": "The feature is strongly associated with the target variable and separates its values well, implying substantial predictive signal. Thus, the score is 0.9.", "score": 0.9})";

std::string text_system_prompt(const Descriptor& desc) {
    std::ostringstream sys;
    sys << "Context: " << desc.dataset_description << "\n\n"
        << "For each feature input by the user, your task is to provide a feature importance "
           "score (between 0 and 1; larger value indicates greater importance) for predicting "
           "the target variable, and a reasoning behind how the importance score was assigned."
        << "\n\n"
        << "The output should be formatted as a JSON instance that conforms to the JSON schema "
           "below.\n\nHere is the output schema:\n```\n"
        << kOutputSchema << "\n```\n\n"
        << "Here is an example output:\n"
        << kJsonDemonstration;
    return sys.str();
}

}  // namespace

PromptBundle build_text_prompt(const std::string& feature, const Descriptor& desc,
                               const PromptTemplate& tpl) {
    if (desc.dataset_description.empty()) {
        throw DataError("build_text_prompt: descriptor has no dataset_description");
    }
    PromptBundle b;
    b.mode = OutputMode::json_score;
    b.feature = feature;

    std::string description;
    auto it = desc.features.find(feature);
    if (it != desc.features.end() && !it->second.empty()) {
        description = it->second;
    } else if (tpl.fallback_to_feature_name) {
        description = feature;
        b.degraded = true;
    } else {
        throw DataError("build_text_prompt: no description for feature '" + feature + "'");
    }

    b.system = text_system_prompt(desc);
    b.user = "Provide a score and reasoning for \"" + description +
             "\" formatted according to the output schema above:";
    return b;
}

namespace {

const std::regex kNumber(R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)");

std::optional<double> first_number(const std::string& text) {
    std::smatch m;
    if (std::regex_search(text, m, kNumber)) return std::stod(m.str());
    return std::nullopt;
}

// Extract the outermost balanced JSON object containing a parseable body.
std::optional<nlohmann::json> find_json_object(const std::string& text) {
    for (std::size_t start = text.find('{'); start != std::string::npos;
         start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (c == '\\') {
                    ++i;
                } else if (c == '"') {
                    in_string = false;
                }
            } else if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    auto candidate = text.substr(start, i - start + 1);
                    auto j = nlohmann::json::parse(candidate, nullptr, false);
                    if (!j.is_discarded()) return j;
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace

ParsedScore parse_score(const std::string& text, OutputMode mode) {
    ParsedScore out;
    if (mode == OutputMode::plain_score) {
        static const std::regex phrase("importance score is", std::regex::icase);
        std::smatch m;
        std::optional<double> value;
        if (std::regex_search(text, m, phrase)) {
            value = first_number(m.suffix().str());
        }
        if (!value) value = first_number(text);
        if (!value) throw ParseError("no numeric score in completion: " + text);
        out.score = *value;
    } else {
        auto j = find_json_object(text);
        if (!j) throw ParseError("no JSON object in completion: " + text);
        if (!j->contains("score")) throw ParseError("JSON completion lacks 'score': " + text);
        const auto& s = (*j)["score"];
        if (s.is_number()) {
            out.score = s.get<double>();
        } else if (s.is_string()) {
            auto v = first_number(s.get<std::string>());
            if (!v) throw ParseError("'score' is not numeric: " + text);
            out.score = *v;
        } else {
            throw ParseError("'score' is not numeric: " + text);
        }
        if (j->contains("reasoning") && (*j)["reasoning"].is_string()) {
            out.rationale = (*j)["reasoning"].get<std::string>();
        }
    }
    if (out.score < 0.0 || out.score > 1.0) {
        out.score = std::clamp(out.score, 0.0, 1.0);
        out.clamped = true;
    }
    return out;
}

std::vector<FeatureScore> score_all_features(const Dataset& d, const Descriptor& desc,
                                             ScoreMethod strategy, CompletionClient& client,
                                             const ScoreConfig& cfg) {
    if (strategy == ScoreMethod::rafs) {
        throw ConfigError("score_all_features: use rafs_select for the rafs strategy");
    }
    if (strategy == ScoreMethod::data_driven && cfg.shots < 1) {
        throw ConfigError("data_driven strategy requires shots >= 1");
    }
    if (strategy == ScoreMethod::text_based && desc.dataset_description.empty()) {
        throw ConfigError("text_based strategy requires a descriptor with dataset_description");
    }

    std::vector<std::size_t> sample_rows;
    if (strategy == ScoreMethod::data_driven) {
        sample_rows = subsample_shots(d, std::min(cfg.shots, d.n_rows()), cfg.seed);
    }

    std::vector<FeatureScore> scores;
    scores.reserve(d.n_features());
    for (const auto& col : d.features) {
        PromptBundle bundle = strategy == ScoreMethod::data_driven
                                  ? build_data_driven_prompt(
                                        make_sample_pairs(d, col.name, sample_rows))
                                  : build_text_prompt(col.name, desc);

        FeatureScore fs;
        fs.feature = col.name;
        fs.method = strategy;
        fs.model_id = client.model_id();

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
                if (parsed.clamped) fs.note = "score clamped to [0,1]";
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

SelectionResult rank_and_select(const std::vector<FeatureScore>& scores, double ratio,
                                const std::string& method) {
    std::set<std::string> uniq;
    for (const auto& s : scores) {
        if (!uniq.insert(s.feature).second) {
            throw DataError("duplicate feature in score list: " + s.feature);
        }
    }
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return scores[a].score > scores[b].score;
    });
    std::vector<std::string> ranking;
    ranking.reserve(scores.size());
    for (auto i : idx) ranking.push_back(scores[i].feature);
    return take_top(std::move(ranking), ratio, method);
}

}  // namespace fsel
