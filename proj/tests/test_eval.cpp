#include <doctest.h>

#include <algorithm>
#include <set>

#include "fsel/classic.hpp"
#include "fsel/error.hpp"
#include "fsel/eval.hpp"
#include "testutil.hpp"

using namespace fsel;

namespace {

// Exhaustive pairwise concordance oracle for AUROC.
double auroc_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
    double num = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[i] == 1 && labels[j] == 0) {
                ++pairs;
                if (scores[i] > scores[j]) {
                    num += 1.0;
                } else if (scores[i] == scores[j]) {
                    num += 0.5;
                }
            }
        }
    }
    return num / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("ridge interpolates at lambda = 0") {
    Eigen::MatrixXd X(2, 1);
    X << 1, 2;
    Eigen::VectorXd y(2);
    y << 1, 2;
    auto m = fit_ridge(X, y, 0.0);
    CHECK(m.weights(0) == doctest::Approx(1.0));
    CHECK(m.bias == doctest::Approx(0.0));
}

TEST_CASE("ridge closed form on centered data") {
    // centered x = (-0.5, 0.5), centered y = (-0.5, 0.5), lambda = 1
    // w = Sxy / (Sxx + lambda) = 0.5 / 1.5 = 1/3
    Eigen::MatrixXd X(2, 1);
    X << -0.5, 0.5;
    Eigen::VectorXd y(2);
    y << -0.5, 0.5;
    auto m = fit_ridge(X, y, 1.0);
    CHECK(m.weights(0) == doctest::Approx(1.0 / 3.0));
    CHECK(m.bias == doctest::Approx(0.0));
}

TEST_CASE("ridge shrinkage limit: w -> 0, bias -> mean(y)") {
    Rng rng(1);
    Eigen::MatrixXd X(20, 3);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
        y(i) = rng.normal() + 2.0;
    }
    auto m = fit_ridge(X, y, 1e12);
    CHECK(m.weights.norm() < 1e-6);
    CHECK(m.bias == doctest::Approx(y.mean()).epsilon(1e-6));
}

TEST_CASE("ridge singular system errors at lambda = 0") {
    Eigen::MatrixXd X(3, 2);
    X << 1, 2, 2, 4, 3, 6;  // collinear columns
    Eigen::VectorXd y(3);
    y << 1, 2, 3;
    CHECK_THROWS_AS(fit_ridge(X, y, 0.0), SolverError);
    CHECK_NOTHROW(fit_ridge(X, y, 0.1));
}

TEST_CASE("ridge monotone shrinkage in lambda") {
    Rng rng(5);
    Eigen::MatrixXd X(30, 4);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) {
        for (int j = 0; j < 4; ++j) X(i, j) = rng.normal();
        y(i) = X(i, 0) * 2 - X(i, 2) + 0.1 * rng.normal();
    }
    double prev = 1e300;
    for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        double norm = fit_ridge(X, y, lambda).weights.norm();
        CHECK(norm <= prev + 1e-12);
        prev = norm;
    }
}

TEST_CASE("ridge closed form agrees with an iterative gradient solve") {
    Rng rng(9);
    Eigen::MatrixXd X(25, 3);
    Eigen::VectorXd y(25);
    for (int i = 0; i < 25; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
        y(i) = X(i, 1) + 0.2 * rng.normal();
    }
    for (double lambda : {0.1, 1.0, 10.0}) {
        auto m = fit_ridge(X, y, lambda);
        // gradient descent on the same objective
        Eigen::VectorXd w = Eigen::VectorXd::Zero(3);
        double b = 0.0;
        double lr = 1.0 / (2.0 * (X.squaredNorm() + lambda + X.rows()));
        for (int it = 0; it < 200000; ++it) {
            Eigen::VectorXd r = X * w;
            r.array() += b;
            r -= y;
            Eigen::VectorXd gw = 2.0 * X.transpose() * r + 2.0 * lambda * w;
            double gb = 2.0 * r.sum();
            w -= lr * gw;
            b -= lr * gb;
        }
        CHECK((w - m.weights).lpNorm<Eigen::Infinity>() < 1e-6);
        CHECK(std::abs(b - m.bias) < 1e-6);
    }
}

TEST_CASE("logistic symmetry: uninformative balanced data gives zero model") {
    Eigen::MatrixXd X(4, 1);
    X << 1, 1, 1, 1;
    Eigen::VectorXd y(4);
    y << 0, 1, 0, 1;
    auto m = fit_logistic(X, y, 1.0);
    CHECK(std::abs(m.weights(0)) < 1e-8);
    CHECK(std::abs(m.bias) < 1e-8);
}

TEST_CASE("logistic beats the all-zero model on separable data") {
    Eigen::MatrixXd X(10, 1);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) {
        X(i, 0) = i < 5 ? -1.0 - i * 0.1 : 1.0 + i * 0.1;
        y(i) = i < 5 ? 0.0 : 1.0;
    }
    auto m = fit_logistic(X, y, 0.1);
    CHECK(std::isfinite(m.weights.norm()));
    CHECK(logistic_loss(X, y, m.weights, m.bias, 0.1) < std::log(2.0));
}

TEST_CASE("logistic analytic gradient matches central finite differences") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 5 + static_cast<int>(rng.below(20));
        int p = 1 + static_cast<int>(rng.below(4));
        Eigen::MatrixXd X(n, p);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
            y(i) = rng.below(2);
        }
        Eigen::VectorXd w(p);
        for (int j = 0; j < p; ++j) w(j) = rng.normal();
        double b = rng.normal();
        double lambda = 0.5;

        auto g = logistic_gradient(X, y, w, b, lambda);
        const double h = 1e-6;
        for (int j = 0; j <= p; ++j) {
            Eigen::VectorXd wp = w, wm = w;
            double bp = b, bm = b;
            if (j < p) {
                wp(j) += h;
                wm(j) -= h;
            } else {
                bp += h;
                bm -= h;
            }
            double fd = (logistic_loss(X, y, wp, bp, lambda) -
                         logistic_loss(X, y, wm, bm, lambda)) /
                        (2 * h);
            double rel = std::abs(fd - g(j)) / std::max(1e-8, std::abs(g(j)));
            CHECK(rel < 1e-5);
        }
    }
}

TEST_CASE("logistic rejects bad labels") {
    Eigen::MatrixXd X(2, 1);
    X << 1, 2;
    Eigen::VectorXd y(2);
    y << 0, 2;
    CHECK_THROWS_AS(fit_logistic(X, y, 1.0), DataError);
}

TEST_CASE("auroc worked example") {
    CHECK(auroc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == doctest::Approx(0.75));
    CHECK(auroc({0, 0, 1, 1}, {0, 0, 1, 1}) == doctest::Approx(1.0));
    CHECK(auroc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(auroc({0.1, 0.2}, {1, 1}), DataError);
}

TEST_CASE("auroc equals the exhaustive pair count with ties") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + rng.below(60);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool has0 = false, has1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = static_cast<double>(rng.below(8)) / 4.0;  // force ties
            labels[i] = static_cast<int>(rng.below(2));
            (labels[i] ? has1 : has0) = true;
        }
        if (!has0 || !has1) continue;
        CHECK(auroc(scores, labels) == doctest::Approx(auroc_oracle(scores, labels)).epsilon(1e-12));
    }
}

TEST_CASE("auroc invariant under strictly increasing transforms") {
    std::vector<double> scores{0.1, 0.7, 0.3, 0.9, 0.5, 0.3};
    std::vector<int> labels{0, 1, 0, 1, 1, 0};
    double base = auroc(scores, labels);
    std::vector<double> warped(scores.size());
    std::transform(scores.begin(), scores.end(), warped.begin(),
                   [](double s) { return std::exp(3.0 * s) - 7.0; });
    CHECK(auroc(warped, labels) == doctest::Approx(base));
}

TEST_CASE("mae basics") {
    CHECK(mae({1, 2}, {2, 4}) == doctest::Approx(1.5));
    CHECK(mae({3, 3}, {3, 3}) == doctest::Approx(0.0));
    CHECK(mae({1, 2, 3}, {2, 3, 4}) == doctest::Approx(1.0));  // constant shift
    CHECK_THROWS_AS(mae({1.0}, {1.0, 2.0}), DataError);
}

TEST_CASE("cv folds are disjoint, covering, balanced, stratified") {
    for (std::size_t n : {23, 100, 103}) {
        auto d = testutil::planted_signal(n, 3, 1, 77, TaskKind::classification);
        auto rows = all_rows(d);
        auto fold = make_folds(d, rows, 5, 3);
        std::vector<std::size_t> sizes(5, 0);
        for (int f : fold) sizes[f]++;
        std::size_t total = 0;
        for (auto s : sizes) total += s;
        CHECK(total == n);
        CHECK(*std::max_element(sizes.begin(), sizes.end()) -
                  *std::min_element(sizes.begin(), sizes.end()) <= 1);
        // stratified within 1 per class
        for (const auto& cls : d.target_classes()) {
            std::vector<std::size_t> per(5, 0);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (*d.target.values[rows[i]] == cls) per[fold[i]]++;
            }
            CHECK(*std::max_element(per.begin(), per.end()) -
                      *std::min_element(per.begin(), per.end()) <= 1);
        }
    }
}

TEST_CASE("fold sizes for n = 103 are {21,21,21,20,20}") {
    auto d = testutil::planted_signal(103, 2, 1, 4, TaskKind::classification);
    auto fold = make_folds(d, all_rows(d), 5, 0);
    std::vector<std::size_t> sizes(5, 0);
    for (int f : fold) sizes[f]++;
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    CHECK(sizes == std::vector<std::size_t>{21, 21, 21, 20, 20});
}

TEST_CASE("grid search: single value, tie to larger lambda, stratification guard") {
    auto d = testutil::planted_signal(100, 4, 2, 6, TaskKind::classification);
    auto rows = all_rows(d);
    std::vector<std::string> feats{"x0", "x1"};

    auto one = grid_search_cv(d, rows, feats, {0.5}, 5, 1);
    CHECK(one.best_lambda == 0.5);

    CHECK_THROWS_AS(grid_search_cv(d, rows, feats, {}, 5, 1), ConfigError);

    // duplicated lambda: identical CV metric, larger (equal) value retained
    auto dup = grid_search_cv(d, rows, feats, {0.5, 0.5}, 5, 1);
    CHECK(dup.per_lambda[0].second == dup.per_lambda[1].second);

    // a class smaller than the fold count is a configuration error
    auto tiny = testutil::planted_signal(8, 2, 1, 3, TaskKind::classification, 0.01);
    CHECK_THROWS_AS(grid_search_cv(tiny, all_rows(tiny), {"x0"}, {1.0}, 7, 0), ConfigError);
}

TEST_CASE("evaluate_selection: perfect predictor reaches AUROC 1") {
    // y determined by x0 exactly
    auto d = testutil::planted_signal(120, 3, 1, 2, TaskKind::classification, 0.0);
    SelectionResult sel = take_top({"x0", "x1", "x2"}, 0.34, "manual");
    auto rec = evaluate_selection(d, sel, 0);
    CHECK(rec.metric == "auroc");
    CHECK(rec.value == doctest::Approx(1.0));
}

TEST_CASE("evaluate_selection is deterministic") {
    auto d = testutil::planted_signal(150, 5, 2, 8, TaskKind::classification);
    auto sel = mi_filter(d, 0.4);
    auto a = evaluate_selection(d, sel, 3);
    auto b = evaluate_selection(d, sel, 3);
    CHECK(a.value == b.value);
    auto c = evaluate_selection(d, sel, 4);
    CHECK(a.value != c.value);  // different split
}

TEST_CASE("evaluate_selection on pure noise hovers near chance") {
    double sum = 0.0;
    int trials = 50;
    for (int s = 0; s < trials; ++s) {
        auto d = testutil::planted_signal(120, 4, 0, 1000 + s, TaskKind::classification, 1.0);
        // with zero signal features the target is pure noise
        SelectionResult sel = take_top({"x0", "x1"}, 1.0, "noise");
        sum += evaluate_selection(d, sel, s).value;
    }
    CHECK(sum / trials == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("aggregate_rank conventions") {
    std::vector<EvaluationRecord> recs{
        {"d1", "a", "full", 0, "mae", 1.0},
        {"d1", "b", "full", 0, "mae", 2.0},
        {"d1", "c", "full", 0, "mae", 2.0},
    };
    auto ranks = aggregate_rank(recs);
    CHECK(ranks["a"] == doctest::Approx(1.0));
    CHECK(ranks["b"] == doctest::Approx(2.5));  // tie -> average rank
    CHECK(ranks["c"] == doctest::Approx(2.5));

    // method best on all datasets -> mean rank 1
    std::vector<EvaluationRecord> multi;
    for (int dIdx = 0; dIdx < 4; ++dIdx) {
        std::string ds = "reg" + std::to_string(dIdx);
        multi.push_back({ds, "best", "full", 0, "mae", 0.1});
        multi.push_back({ds, "worse", "full", 0, "mae", 0.9});
    }
    CHECK(aggregate_rank(multi)["best"] == doctest::Approx(1.0));

    // AUROC ranks descending
    std::vector<EvaluationRecord> cls{
        {"c1", "hi", "full", 0, "auroc", 0.9},
        {"c1", "lo", "full", 0, "auroc", 0.6},
    };
    CHECK(aggregate_rank(cls)["hi"] == doctest::Approx(1.0));

    // missing cell
    std::vector<EvaluationRecord> gap{
        {"d1", "a", "full", 0, "mae", 1.0},
        {"d1", "b", "full", 0, "mae", 2.0},
        {"d2", "a", "full", 0, "mae", 1.0},
    };
    CHECK_THROWS_AS(aggregate_rank(gap), ConfigError);
}
