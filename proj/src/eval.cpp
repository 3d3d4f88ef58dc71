#include "fsel/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fsel/classic.hpp"
#include "fsel/error.hpp"
#include "fsel/rng.hpp"

namespace fsel {

Eigen::VectorXd LinearModel::decision(const Eigen::MatrixXd& X) const {
    return (X * weights).array() + bias;
}

LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
    if (X.rows() != y.size() || y.size() < 1) throw DataError("fit_ridge: shape mismatch");
    if (lambda < 0.0) throw ConfigError("fit_ridge: lambda must be nonnegative");
    const Eigen::Index n = X.rows(), p = X.cols();

    Eigen::MatrixXd A(p + 1, p + 1);
    A.topLeftCorner(p, p) = X.transpose() * X + lambda * Eigen::MatrixXd::Identity(p, p);
    A.topRightCorner(p, 1) = X.colwise().sum().transpose();
    A.bottomLeftCorner(1, p) = X.colwise().sum();
    A(p, p) = static_cast<double>(n);
    Eigen::VectorXd rhs(p + 1);
    rhs.head(p) = X.transpose() * y;
    rhs(p) = y.sum();

    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) {
        throw SolverError("fit_ridge: singular normal equations (collinear columns at lambda=0)");
    }
    Eigen::VectorXd z = lu.solve(rhs);

    LinearModel m;
    m.kind = ModelKind::ridge;
    m.lambda = lambda;
    m.weights = z.head(p);
    m.bias = z(p);
    return m;
}

namespace {

inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// log(1 + exp(-t)) without overflow
inline double softplus_neg(double t) {
    return t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

}  // namespace

double logistic_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& w, double bias, double lambda) {
    const Eigen::Index n = X.rows();
    Eigen::VectorXd z = (X * w).array() + bias;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        // y in {0,1}; margin t = (2y-1) z
        double t = (y(i) > 0.5 ? z(i) : -z(i));
        loss += softplus_neg(t);
    }
    loss /= static_cast<double>(n);
    loss += 0.5 * lambda / static_cast<double>(n) * w.squaredNorm();
    return loss;
}

Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& w, double bias, double lambda) {
    const Eigen::Index n = X.rows(), p = X.cols();
    Eigen::VectorXd z = (X * w).array() + bias;
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = sigmoid(z(i)) - y(i);
    Eigen::VectorXd g(p + 1);
    g.head(p) = X.transpose() * r / static_cast<double>(n) + (lambda / static_cast<double>(n)) * w;
    g(p) = r.sum() / static_cast<double>(n);
    return g;
}

LinearModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                         double tol, int max_iter) {
    const Eigen::Index n = X.rows(), p = X.cols();
    if (n != y.size() || n < 1) throw DataError("fit_logistic: shape mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y(i) != 0.0 && y(i) != 1.0) throw DataError("fit_logistic: labels must be 0/1");
    }
    if (!X.allFinite()) throw DataError("fit_logistic: non-finite values in design matrix");

    LinearModel m;
    m.kind = ModelKind::logistic;
    m.lambda = lambda;
    m.weights = Eigen::VectorXd::Zero(p);
    m.bias = 0.0;

    double loss = logistic_loss(X, y, m.weights, m.bias, lambda);
    int it = 0;
    for (; it < max_iter; ++it) {
        Eigen::VectorXd g = logistic_gradient(X, y, m.weights, m.bias, lambda);
        if (g.lpNorm<Eigen::Infinity>() < tol) break;

        // Newton direction on the stacked [w; b] system
        Eigen::VectorXd z = (X * m.weights).array() + m.bias;
        Eigen::VectorXd s(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double pi = sigmoid(z(i));
            s(i) = std::max(pi * (1.0 - pi), 1e-10);
        }
        Eigen::MatrixXd H(p + 1, p + 1);
        Eigen::MatrixXd Xs = X.array().colwise() * s.array();
        H.topLeftCorner(p, p) = X.transpose() * Xs / static_cast<double>(n);
        H.topLeftCorner(p, p) += (lambda / static_cast<double>(n)) * Eigen::MatrixXd::Identity(p, p);
        H.topRightCorner(p, 1) = Xs.colwise().sum().transpose() / static_cast<double>(n);
        H.bottomLeftCorner(1, p) = H.topRightCorner(p, 1).transpose();
        H(p, p) = s.sum() / static_cast<double>(n);

        Eigen::LDLT<Eigen::MatrixXd> ldlt(H + 1e-12 * Eigen::MatrixXd::Identity(p + 1, p + 1));
        Eigen::VectorXd dir = -ldlt.solve(g);

        // Backtracking: halve until the objective decreases (accepted steps
        // are monotone by construction)
        double step = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            Eigen::VectorXd w_new = m.weights + step * dir.head(p);
            double b_new = m.bias + step * dir(p);
            double loss_new = logistic_loss(X, y, w_new, b_new, lambda);
            if (loss_new < loss) {
                m.weights = w_new;
                m.bias = b_new;
                loss = loss_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // numerical floor
    }
    m.iterations = it;
    m.converged =
        logistic_gradient(X, y, m.weights, m.bias, lambda).lpNorm<Eigen::Infinity>() < tol;
    return m;
}

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty()) throw DataError("auroc: shape mismatch");
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += (l != 0);
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("auroc: both classes must be present");

    // Average ranks over ties, then the Mann-Whitney U statistic.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double rank_sum_pos = 0.0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k] != 0) rank_sum_pos += rank[k];
    }
    double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double mae(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size() || pred.empty()) throw DataError("mae: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
    return s / static_cast<double>(pred.size());
}

std::vector<int> make_folds(const Dataset& d, const std::vector<std::size_t>& rows,
                            int n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw ConfigError("make_folds: need at least 2 folds");
    // Shuffled class blocks concatenated, fold = position mod n_folds. Total
    // fold sizes differ by at most 1 and so do per-class counts.
    std::vector<std::size_t> position_of(rows.size());
    if (d.task == TaskKind::classification) {
        auto classes = d.target_classes();
        std::size_t pos = 0;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (*d.target.values[rows[i]] == classes[c]) members.push_back(i);
            }
            Rng rng(Rng::mix(seed, c));
            rng.shuffle(members);
            for (auto i : members) position_of[i] = pos++;
        }
    } else {
        std::vector<std::size_t> order(rows.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(seed);
        rng.shuffle(order);
        for (std::size_t pos = 0; pos < order.size(); ++pos) position_of[order[pos]] = pos;
    }
    std::vector<int> fold(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        fold[i] = static_cast<int>(position_of[i] % static_cast<std::size_t>(n_folds));
    }
    return fold;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const Encoder& enc,
                               const std::vector<std::size_t>& feature_indices) {
    std::size_t width = 0;
    for (auto f : feature_indices) {
        auto [lo, hi] = enc.feature_columns(f);
        width += hi - lo;
    }
    Eigen::MatrixXd out(X.rows(), width);
    std::size_t col = 0;
    for (auto f : feature_indices) {
        auto [lo, hi] = enc.feature_columns(f);
        for (std::size_t c = lo; c < hi; ++c) out.col(col++) = X.col(c);
    }
    return out;
}

namespace {

struct FoldEval {
    // Fit on train rows, score validation rows; metric per task.
    static double run(const Dataset& d, const std::vector<std::size_t>& train,
                      const std::vector<std::size_t>& val,
                      const std::vector<std::size_t>& feat_idx, double lambda) {
        Encoder enc = Encoder::fit(d, train);
        Eigen::MatrixXd Xtr = select_columns(enc.transform(d, train), enc, feat_idx);
        Eigen::MatrixXd Xva = select_columns(enc.transform(d, val), enc, feat_idx);
        Eigen::VectorXd ytr = target_vector(d, train);
        Eigen::VectorXd yva = target_vector(d, val);
        if (d.task == TaskKind::classification) {
            LinearModel m = fit_logistic(Xtr, ytr, lambda);
            Eigen::VectorXd z = m.decision(Xva);
            std::vector<double> scores(z.data(), z.data() + z.size());
            std::vector<int> labels(yva.size());
            for (Eigen::Index i = 0; i < yva.size(); ++i) labels[i] = yva(i) > 0.5 ? 1 : 0;
            return auroc(scores, labels);
        }
        LinearModel m = fit_ridge(Xtr, ytr, lambda);
        Eigen::VectorXd z = m.decision(Xva);
        std::vector<double> pred(z.data(), z.data() + z.size());
        std::vector<double> tgt(yva.data(), yva.data() + yva.size());
        return mae(pred, tgt);
    }
};

std::vector<std::size_t> feature_indices(const Dataset& d, const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const auto& name : names) idx.push_back(d.feature_index(name));
    return idx;
}

}  // namespace

GridSearchResult grid_search_cv(const Dataset& d,
                                const std::vector<std::size_t>& train_rows,
                                const std::vector<std::string>& selected,
                                const std::vector<double>& grid,
                                int n_folds,
                                std::uint64_t seed) {
    if (grid.empty()) throw ConfigError("grid_search_cv: empty lambda grid");
    if (n_folds < 2) throw ConfigError("grid_search_cv: folds must be >= 2");
    if (d.task == TaskKind::classification) {
        std::map<std::string, std::size_t> counts;
        for (auto r : train_rows) counts[*d.target.values[r]]++;
        for (const auto& [label, cnt] : counts) {
            if (cnt < static_cast<std::size_t>(n_folds)) {
                throw ConfigError("grid_search_cv: class '" + label + "' has " +
                                  std::to_string(cnt) + " rows, fewer than " +
                                  std::to_string(n_folds) + " folds");
            }
        }
    }

    auto feat_idx = feature_indices(d, selected);
    auto fold = make_folds(d, train_rows, n_folds, seed);
    const bool maximize = d.task == TaskKind::classification;

    GridSearchResult res;
    bool first = true;
    for (double lambda : grid) {
        double sum = 0.0;
        for (int f = 0; f < n_folds; ++f) {
            std::vector<std::size_t> tr, va;
            for (std::size_t i = 0; i < train_rows.size(); ++i) {
                (fold[i] == f ? va : tr).push_back(train_rows[i]);
            }
            sum += FoldEval::run(d, tr, va, feat_idx, lambda);
        }
        double mean = sum / n_folds;
        res.per_lambda.push_back({lambda, mean});
        bool better = first || (maximize ? mean > res.best_metric : mean < res.best_metric) ||
                      (mean == res.best_metric && lambda > res.best_lambda);
        if (better) {
            res.best_lambda = lambda;
            res.best_metric = mean;
            first = false;
        }
    }
    return res;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_test_split(
    const Dataset& d, std::uint64_t seed, double test_fraction) {
    auto rows = all_rows(d);
    auto fold = make_folds(d, rows, static_cast<int>(std::lround(1.0 / test_fraction)),
                           Rng::mix(seed, 0x7e57));
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        (fold[i] == 0 ? test : train).push_back(rows[i]);
    }
    return {train, test};
}

EvaluationRecord evaluate_selection(const Dataset& d,
                                    const SelectionResult& sel,
                                    std::uint64_t split_seed,
                                    const std::vector<double>& grid,
                                    int n_folds) {
    auto [train, test] = train_test_split(d, split_seed);
    auto gs = grid_search_cv(d, train, sel.selected, grid, n_folds, Rng::mix(split_seed, 1));

    auto feat_idx = feature_indices(d, sel.selected);
    Encoder enc = Encoder::fit(d, train);
    Eigen::MatrixXd Xtr = select_columns(enc.transform(d, train), enc, feat_idx);
    Eigen::MatrixXd Xte = select_columns(enc.transform(d, test), enc, feat_idx);
    Eigen::VectorXd ytr = target_vector(d, train);
    Eigen::VectorXd yte = target_vector(d, test);

    EvaluationRecord rec;
    rec.dataset = d.name;
    rec.method = sel.method;
    rec.shots = "full";
    rec.seed = split_seed;
    if (d.task == TaskKind::classification) {
        LinearModel m = fit_logistic(Xtr, ytr, gs.best_lambda);
        Eigen::VectorXd z = m.decision(Xte);
        std::vector<double> scores(z.data(), z.data() + z.size());
        std::vector<int> labels(yte.size());
        for (Eigen::Index i = 0; i < yte.size(); ++i) labels[i] = yte(i) > 0.5 ? 1 : 0;
        rec.metric = "auroc";
        rec.value = auroc(scores, labels);
    } else {
        LinearModel m = fit_ridge(Xtr, ytr, gs.best_lambda);
        Eigen::VectorXd z = m.decision(Xte);
        std::vector<double> pred(z.data(), z.data() + z.size());
        std::vector<double> tgt(yte.data(), yte.data() + yte.size());
        rec.metric = "mae";
        rec.value = mae(pred, tgt);
    }
    return rec;
}

std::map<std::string, double> aggregate_rank(const std::vector<EvaluationRecord>& records) {
    // dataset -> method -> mean value
    std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> acc;
    std::map<std::string, bool> maximize_for;
    std::set<std::string> methods;
    for (const auto& r : records) {
        auto& cell = acc[r.dataset][r.method];
        cell.first += r.value;
        cell.second += 1;
        maximize_for[r.dataset] = (r.metric == "auroc");
        methods.insert(r.method);
    }
    std::map<std::string, double> rank_sum;
    for (const auto& [dataset, by_method] : acc) {
        for (const auto& m : methods) {
            if (!by_method.count(m)) {
                throw ConfigError("aggregate_rank: method '" + m + "' missing for dataset '" +
                                  dataset + "'");
            }
        }
        std::vector<std::pair<double, std::string>> vals;
        for (const auto& [method, cell] : by_method) {
            double v = cell.first / static_cast<double>(cell.second);
            vals.push_back({maximize_for[dataset] ? -v : v, method});  // ascending = better first
        }
        std::sort(vals.begin(), vals.end());
        std::size_t i = 0;
        while (i < vals.size()) {
            std::size_t j = i;
            while (j + 1 < vals.size() && vals[j + 1].first == vals[i].first) ++j;
            double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) rank_sum[vals[k].second] += avg;
            i = j + 1;
        }
    }
    const double n_datasets = static_cast<double>(acc.size());
    for (auto& [_, v] : rank_sum) v /= n_datasets;
    return rank_sum;
}

}  // namespace fsel
