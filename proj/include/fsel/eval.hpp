#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsel/tabular.hpp"

namespace fsel {

enum class ModelKind { logistic, ridge };

struct LinearModel {
    Eigen::VectorXd weights;
    double bias = 0.0;
    ModelKind kind = ModelKind::ridge;
    double lambda = 0.0;
    int iterations = 0;
    bool converged = true;

    // Linear score Xw + b (decision value for logistic, prediction for ridge).
    Eigen::VectorXd decision(const Eigen::MatrixXd& X) const;
};

// Minimizes ||Xw + b1 - y||^2 + lambda*||w||^2, bias unpenalized; closed form
// via the normal equations. lambda = 0 with rank-deficient columns throws.
LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda);

// Minimizes mean log-loss + (lambda/n)*||w||^2/2, bias unpenalized; damped
// Newton with backtracking line search.
LinearModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                         double tol = 1e-8, int max_iter = 500);

double logistic_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& w, double bias, double lambda);

// Gradient of the logistic objective, [d/dw; d/db] stacked, used by the
// finite-difference checks.
Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& w, double bias, double lambda);

// Mann-Whitney AUROC: P(score+ > score-) + P(tie)/2, via rank statistics.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

double mae(const std::vector<double>& pred, const std::vector<double>& target);

// Deterministic k-fold assignment over the given rows; class-stratified for
// classification. folds[i] in [0, n_folds), sizes balanced within 1.
std::vector<int> make_folds(const Dataset& d, const std::vector<std::size_t>& rows,
                            int n_folds, std::uint64_t seed);

struct GridSearchResult {
    double best_lambda = 0.0;
    double best_metric = 0.0;  // mean validation AUROC (classification) or MAE (regression)
    std::vector<std::pair<double, double>> per_lambda;  // (lambda, mean metric)
};

inline const std::vector<double> kDefaultLambdaGrid{0.01, 0.1, 1.0, 10.0, 100.0};
constexpr int kDefaultFolds = 5;

GridSearchResult grid_search_cv(const Dataset& d,
                                const std::vector<std::size_t>& train_rows,
                                const std::vector<std::string>& selected,
                                const std::vector<double>& grid,
                                int n_folds,
                                std::uint64_t seed);

struct EvaluationRecord {
    std::string dataset;
    std::string method;
    std::string shots;  // count or "full"
    std::uint64_t seed = 0;
    std::string metric;  // "auroc" or "mae"
    double value = 0.0;
};

struct SelectionResult;  // classic.hpp

EvaluationRecord evaluate_selection(const Dataset& d,
                                    const SelectionResult& sel,
                                    std::uint64_t split_seed,
                                    const std::vector<double>& grid = kDefaultLambdaGrid,
                                    int n_folds = kDefaultFolds);

// Per-method mean rank across datasets (average-rank tie convention; MAE
// ascending, AUROC descending). Multiple records per (method, dataset) are
// averaged first.
std::map<std::string, double> aggregate_rank(const std::vector<EvaluationRecord>& records);

// Seeded 80/20 split of all dataset rows, stratified for classification.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_test_split(
    const Dataset& d, std::uint64_t seed, double test_fraction = 0.2);

// Restrict a design to the output columns of the selected source features.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const Encoder& enc,
                               const std::vector<std::size_t>& feature_indices);

}  // namespace fsel
