#pragma once

// Shared helpers for the test suites: synthetic dataset builders, a scripted
// completion client, and filesystem scratch space.

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fsel/rng.hpp"
#include "fsel/tabular.hpp"
#include "fsel/transport.hpp"

namespace testutil {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("fsel_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    std::filesystem::path path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Numeric classification/regression dataset where features [0, n_signal) sum
// to drive the target and the rest are independent noise.
inline fsel::Dataset planted_signal(std::size_t n, std::size_t l, std::size_t n_signal,
                                    std::uint64_t seed, fsel::TaskKind task,
                                    double noise = 0.3) {
    fsel::Rng rng(seed);
    fsel::Dataset d;
    d.name = "planted";
    d.task = task;
    d.features.resize(l);
    std::vector<std::vector<double>> x(l, std::vector<double>(n));
    for (std::size_t f = 0; f < l; ++f) {
        for (std::size_t r = 0; r < n; ++r) x[f][r] = rng.normal();
    }
    for (std::size_t f = 0; f < l; ++f) {
        auto& col = d.features[f];
        col.name = "x" + std::to_string(f);
        col.kind = fsel::ColumnKind::numeric;
        col.values.resize(n);
        col.numeric = x[f];
        for (std::size_t r = 0; r < n; ++r) col.values[r] = fsel::render_number(x[f][r]);
    }
    d.target.name = "y";
    d.target.values.resize(n);
    if (task == fsel::TaskKind::classification) {
        d.target.kind = fsel::ColumnKind::categorical;
        for (std::size_t r = 0; r < n; ++r) {
            double z = noise * rng.normal();
            for (std::size_t f = 0; f < n_signal; ++f) z += x[f][r];
            d.target.values[r] = z > 0 ? "yes" : "no";
        }
    } else {
        d.target.kind = fsel::ColumnKind::numeric;
        d.target.numeric.resize(n);
        for (std::size_t r = 0; r < n; ++r) {
            double z = noise * rng.normal();
            for (std::size_t f = 0; f < n_signal; ++f) z += x[f][r];
            d.target.numeric[r] = z;
            d.target.values[r] = fsel::render_number(z);
        }
    }
    return d;
}

// Mixed numeric/categorical CSV with a planted binary signal, shaped like the
// public tabular benchmarks (used by the sweep tests).
inline void write_mixed_csv(const std::string& path, std::size_t n, std::size_t l,
                            std::uint64_t seed) {
    fsel::Rng rng(seed);
    std::ostringstream out;
    const std::size_t n_cat = l / 4;
    for (std::size_t f = 0; f < l; ++f) out << "f" << f << ",";
    out << "target\n";
    const char* levels[] = {"low", "mid", "high", "other"};
    for (std::size_t r = 0; r < n; ++r) {
        double z = 0.5 * rng.normal();
        std::vector<std::string> cells(l);
        for (std::size_t f = 0; f < l; ++f) {
            if (f < n_cat) {
                std::size_t lv = rng.below(4);
                if (f == 0) {
                    z += (lv == 2 ? 1.0 : lv == 0 ? -1.0 : 0.0);
                }
                cells[f] = levels[lv];
            } else {
                double v = rng.normal();
                if (f == n_cat || f == n_cat + 1) z += v;
                // sprinkle missing cells into one noise column
                if (f == l - 1 && rng.below(50) == 0) {
                    cells[f] = "";
                } else {
                    cells[f] = fsel::render_number(v);
                }
            }
        }
        for (const auto& c : cells) out << c << ",";
        out << (z > 0 ? "bad" : "good") << "\n";
    }
    write_file(path, out.str());
}

inline std::string descriptor_json(const fsel::Dataset& d, const std::string& description) {
    std::ostringstream out;
    out << "{\"dataset_description\": \"" << description << "\", \"features\": {";
    for (std::size_t f = 0; f < d.n_features(); ++f) {
        if (f) out << ", ";
        out << "\"" << d.features[f].name << "\": \"description of " << d.features[f].name
            << "\"";
    }
    out << "}}";
    return out.str();
}

// Deterministic stand-in for a completion endpoint: answers data-driven
// prompts in the plain-score format and JSON-schema prompts as JSON, with the
// score derived from the prompt hash.
class ScriptedModelClient : public fsel::CompletionClient {
public:
    explicit ScriptedModelClient(std::string model = "scripted-model")
        : model_(std::move(model)) {}

    fsel::CompletionResponse complete(const fsel::CompletionRequest& req) override {
        ++calls_;
        auto h = fsel::prompt_hash(req.system, req.user, model_);
        double score = static_cast<double>(std::stoull(h.substr(0, 8), nullptr, 16) % 1000) / 999.0;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.3f", score);
        if (req.user.find("output schema") != std::string::npos) {
            return {std::string("{\"reasoning\": \"Scripted rationale.\", \"score\": ") + buf + "}",
                    true};
        }
        return {std::string("The importance score is ") + buf, true};
    }
    std::string model_id() const override { return model_; }
    std::size_t calls() const { return calls_; }

private:
    std::string model_;
    std::size_t calls_ = 0;
};

// Client driven by an arbitrary function, for failure-path tests.
class FunctionClient : public fsel::CompletionClient {
public:
    using Fn = std::function<std::string(const fsel::CompletionRequest&)>;
    explicit FunctionClient(Fn fn, std::string model = "fn-model")
        : fn_(std::move(fn)), model_(std::move(model)) {}
    fsel::CompletionResponse complete(const fsel::CompletionRequest& req) override {
        return {fn_(req), true};
    }
    std::string model_id() const override { return model_; }

private:
    Fn fn_;
    std::string model_;
};

}  // namespace testutil
