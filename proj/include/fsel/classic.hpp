#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsel/tabular.hpp"

namespace fsel {

struct SelectionResult {
    std::string method;
    double ratio = 0.3;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> ranking;   // most important first
    std::vector<std::string> selected;  // first k of ranking

    nlohmann::json to_json() const;
    static SelectionResult from_json(const nlohmann::json& j);
};

// k = max(1, round(ratio * l)), round half up.
std::size_t select_count(double ratio, std::size_t n_features);

// Build a SelectionResult from a full ranking.
SelectionResult take_top(std::vector<std::string> ranking, double ratio, std::string method,
                         std::optional<std::uint64_t> seed = std::nullopt);

// Selectors compute their statistics on `rows` only (the k-shot subsample in
// sweeps; all rows when empty).

SelectionResult mi_filter(const Dataset& d, double ratio,
                          const std::vector<std::size_t>& rows = {});

SelectionResult mrmr(const Dataset& d, double ratio,
                     const std::vector<std::size_t>& rows = {});

SelectionResult rfe(const Dataset& d, double ratio, double lambda = 1.0,
                    const std::vector<std::size_t>& rows = {});

SelectionResult random_select(const Dataset& d, double ratio, std::uint64_t seed);

}  // namespace fsel
