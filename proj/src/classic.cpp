#include "fsel/classic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "fsel/error.hpp"
#include "fsel/eval.hpp"
#include "fsel/mi.hpp"
#include "fsel/rng.hpp"

namespace fsel {

namespace {

std::vector<std::size_t> rows_or_all(const Dataset& d, const std::vector<std::size_t>& rows) {
    return rows.empty() ? all_rows(d) : rows;
}

// Descending by score, ties by ascending column index.
std::vector<std::size_t> order_by_score(const std::vector<double>& score) {
    std::vector<std::size_t> idx(score.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    return idx;
}

std::vector<std::string> names_of(const Dataset& d, const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(d.features[i].name);
    return out;
}

}  // namespace

nlohmann::json SelectionResult::to_json() const {
    nlohmann::json j;
    j["method"] = method;
    j["ratio"] = ratio;
    if (seed) {
        j["seed"] = *seed;
    } else {
        j["seed"] = nullptr;
    }
    j["ranking"] = ranking;
    j["selected"] = selected;
    return j;
}

SelectionResult SelectionResult::from_json(const nlohmann::json& j) {
    SelectionResult s;
    s.method = j.at("method").get<std::string>();
    s.ratio = j.at("ratio").get<double>();
    if (j.contains("seed") && !j.at("seed").is_null()) {
        s.seed = j.at("seed").get<std::uint64_t>();
    }
    s.ranking = j.at("ranking").get<std::vector<std::string>>();
    s.selected = j.at("selected").get<std::vector<std::string>>();
    return s;
}

std::size_t select_count(double ratio, std::size_t n_features) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("selection ratio must be in (0, 1]");
    auto k = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n_features) + 0.5));
    return std::max<std::size_t>(1, std::min(k, n_features));
}

SelectionResult take_top(std::vector<std::string> ranking, double ratio, std::string method,
                         std::optional<std::uint64_t> seed) {
    std::set<std::string> uniq(ranking.begin(), ranking.end());
    if (uniq.size() != ranking.size()) throw DataError("ranking contains duplicate feature names");
    SelectionResult s;
    s.method = std::move(method);
    s.ratio = ratio;
    s.seed = seed;
    const std::size_t k = select_count(ratio, ranking.size());
    s.selected.assign(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(k));
    s.ranking = std::move(ranking);
    return s;
}

SelectionResult mi_filter(const Dataset& d, double ratio, const std::vector<std::size_t>& rows) {
    auto use = rows_or_all(d, rows);
    auto codes = discretize_dataset(d, use);
    auto rel = relevance_parallel(codes);
    return take_top(names_of(d, order_by_score(rel)), ratio, "mi");
}

SelectionResult mrmr(const Dataset& d, double ratio, const std::vector<std::size_t>& rows) {
    auto use = rows_or_all(d, rows);
    auto codes = discretize_dataset(d, use);
    auto rel = relevance_parallel(codes);
    auto red = redundancy_parallel(codes);
    const std::size_t l = rel.size();
    const std::size_t k = select_count(ratio, l);

    std::vector<std::size_t> picked;
    std::vector<bool> used(l, false);
    while (picked.size() < k) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_f = l;
        for (std::size_t f = 0; f < l; ++f) {
            if (used[f]) continue;
            double score = rel[f];
            if (!picked.empty()) {
                double redundancy = 0.0;
                for (auto s : picked) redundancy += red[f][s];
                score -= redundancy / static_cast<double>(picked.size());
            }
            if (score > best) {  // strict '>' keeps the lowest index on ties
                best = score;
                best_f = f;
            }
        }
        used[best_f] = true;
        picked.push_back(best_f);
    }

    // Selection order first, then the rest by relevance.
    std::vector<std::size_t> rest;
    for (auto f : order_by_score(rel)) {
        if (!used[f]) rest.push_back(f);
    }
    auto ranking_idx = picked;
    ranking_idx.insert(ranking_idx.end(), rest.begin(), rest.end());
    return take_top(names_of(d, ranking_idx), ratio, "mrmr");
}

SelectionResult rfe(const Dataset& d, double ratio, double lambda,
                    const std::vector<std::size_t>& rows) {
    auto use = rows_or_all(d, rows);
    const std::size_t l = d.n_features();
    const std::size_t k = select_count(ratio, l);

    Encoder enc = Encoder::fit(d, use);
    Eigen::MatrixXd Xfull = enc.transform(d, use);
    Eigen::VectorXd y = target_vector(d, use);

    std::vector<std::size_t> survivors(l);
    std::iota(survivors.begin(), survivors.end(), std::size_t{0});
    std::vector<std::size_t> eliminated;  // elimination order

    auto fit_scores = [&](const std::vector<std::size_t>& feats) {
        Eigen::MatrixXd X = select_columns(Xfull, enc, feats);
        LinearModel m = d.task == TaskKind::classification ? fit_logistic(X, y, lambda)
                                                           : fit_ridge(X, y, lambda);
        // max |coefficient| over each feature's one-hot group
        std::vector<double> score(feats.size(), 0.0);
        std::size_t col = 0;
        for (std::size_t i = 0; i < feats.size(); ++i) {
            auto [lo, hi] = enc.feature_columns(feats[i]);
            for (std::size_t c = lo; c < hi; ++c) {
                score[i] = std::max(score[i], std::abs(m.weights(static_cast<Eigen::Index>(col))));
                ++col;
            }
        }
        return score;
    };

    std::vector<double> final_score;
    while (true) {
        final_score = fit_scores(survivors);
        if (survivors.size() <= k) break;
        std::size_t worst = 0;
        for (std::size_t i = 1; i < survivors.size(); ++i) {
            // '>' drops the highest-index feature on ties
            if (final_score[i] <= final_score[worst]) worst = i;
        }
        eliminated.push_back(survivors[worst]);
        survivors.erase(survivors.begin() + static_cast<std::ptrdiff_t>(worst));
    }

    // Survivors by final-fit score, then reverse elimination order.
    std::vector<std::size_t> surv_order = order_by_score(final_score);
    std::vector<std::size_t> ranking_idx;
    for (auto i : surv_order) ranking_idx.push_back(survivors[i]);
    for (auto it = eliminated.rbegin(); it != eliminated.rend(); ++it) ranking_idx.push_back(*it);
    return take_top(names_of(d, ranking_idx), ratio, "rfe");
}

SelectionResult random_select(const Dataset& d, double ratio, std::uint64_t seed) {
    std::vector<std::size_t> idx(d.n_features());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(idx);
    return take_top(names_of(d, idx), ratio, "random", seed);
}

}  // namespace fsel
