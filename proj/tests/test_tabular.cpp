#include <doctest.h>

#include <set>

#include "fsel/error.hpp"
#include "fsel/tabular.hpp"
#include "testutil.hpp"

using namespace fsel;

namespace {

const char* kTinyCsv =
    "checking,amount,label\n"
    "<0,100,no\n"
    "no checking,250,yes\n"
    "<0,,no\n"
    "0<=X<200,80,yes\n";

}  // namespace

TEST_CASE("load_dataset infers kinds and counts") {
    testutil::TempDir tmp("load");
    testutil::write_file(tmp.file("tiny.csv"), kTinyCsv);
    auto d = load_dataset(tmp.file("tiny.csv"), "label", TaskKind::classification, "tiny");

    CHECK(d.n_rows() == 4);
    CHECK(d.n_features() == 2);
    CHECK(d.features[0].kind == ColumnKind::categorical);
    CHECK(d.features[1].kind == ColumnKind::numeric);
    CHECK(d.features[1].missing(2));
    CHECK(d.target_classes() == std::vector<std::string>{"no", "yes"});
}

TEST_CASE("load_dataset single feature, 3 rows") {
    testutil::TempDir tmp("load1");
    testutil::write_file(tmp.file("one.csv"), "x,y\n1,0\n2,1\n3,0\n");
    auto d = load_dataset(tmp.file("one.csv"), "y", TaskKind::classification);
    CHECK(d.n_features() == 1);
    CHECK(d.n_rows() == 3);
}

TEST_CASE("load_dataset error paths") {
    testutil::TempDir tmp("loaderr");
    testutil::write_file(tmp.file("tiny.csv"), kTinyCsv);
    testutil::write_file(tmp.file("empty.csv"), "");
    CHECK_THROWS_AS(load_dataset(tmp.file("tiny.csv"), "nope", TaskKind::classification),
                    DataError);
    CHECK_THROWS_AS(load_dataset(tmp.file("empty.csv"), "y", TaskKind::classification), DataError);
    // missing target value
    testutil::write_file(tmp.file("hole.csv"), "x,y\n1,0\n2,\n");
    CHECK_THROWS_AS(load_dataset(tmp.file("hole.csv"), "y", TaskKind::classification), DataError);
}

TEST_CASE("descriptor validation") {
    testutil::TempDir tmp("desc");
    testutil::write_file(tmp.file("tiny.csv"), kTinyCsv);
    auto d = load_dataset(tmp.file("tiny.csv"), "label", TaskKind::classification);

    testutil::write_file(tmp.file("ok.json"),
                         R"({"dataset_description": "credit data", "features": {"checking": "status of checking account"}})");
    auto desc = load_descriptor(tmp.file("ok.json"), d);
    CHECK(desc.dataset_description == "credit data");
    CHECK(desc.features.at("checking") == "status of checking account");

    testutil::write_file(tmp.file("bad.json"),
                         R"({"dataset_description": "x", "features": {"unknown_col": "?"}})");
    CHECK_THROWS_AS(load_descriptor(tmp.file("bad.json"), d), DataError);
}

TEST_CASE("subsample_shots is stratified and deterministic") {
    auto d = testutil::planted_signal(120, 4, 2, 11, TaskKind::classification);
    auto a = subsample_shots(d, 16, 0);
    auto b = subsample_shots(d, 16, 0);
    CHECK(a == b);
    CHECK(a.size() == 16);
    CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 16);

    std::set<std::string> classes;
    for (auto r : a) classes.insert(*d.target.values[r]);
    CHECK(classes.size() == 2);

    auto c = subsample_shots(d, 16, 1);
    CHECK(a != c);

    auto full = subsample_shots(d, 120, 3);
    CHECK(full.size() == 120);
    CHECK_THROWS_AS(subsample_shots(d, 121, 0), DataError);
}

TEST_CASE("subsample_shots stratification property across seeds") {
    auto d = testutil::planted_signal(200, 3, 1, 5, TaskKind::classification);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (std::size_t k : {2, 5, 16, 33}) {
            auto rows = subsample_shots(d, k, seed);
            std::set<std::string> classes;
            for (auto r : rows) classes.insert(*d.target.values[r]);
            CHECK(classes.size() == d.target_classes().size());
        }
    }
}

TEST_CASE("make_sample_pairs renders raw values") {
    testutil::TempDir tmp("pairs");
    testutil::write_file(tmp.file("tiny.csv"), kTinyCsv);
    auto d = load_dataset(tmp.file("tiny.csv"), "label", TaskKind::classification);

    auto sp = make_sample_pairs(d, "checking", {0, 1});
    REQUIRE(sp.pairs.size() == 2);
    CHECK(sp.pairs[0] == std::pair<std::string, std::string>{"<0", "no"});
    CHECK(sp.pairs[1] == std::pair<std::string, std::string>{"no checking", "yes"});

    auto sp2 = make_sample_pairs(d, "amount", {0});
    CHECK(sp2.pairs[0].first == "100");

    CHECK_THROWS_AS(make_sample_pairs(d, "nope", {0}), DataError);
}

TEST_CASE("numeric render is shortest round-trip") {
    CHECK(render_number(3.5) == "3.5");
    CHECK(render_number(1.0) == "1");
    CHECK(render_number(0.1) == "0.1");
    CHECK(render_number(-2.25) == "-2.25");
}

TEST_CASE("preprocess standardizes with population variance") {
    testutil::TempDir tmp("prep");
    testutil::write_file(tmp.file("n.csv"), "x,y\n1,0\n2,1\n3,0\n");
    auto d = load_dataset(tmp.file("n.csv"), "y", TaskKind::classification);
    auto pre = preprocess(d, {0, 1, 2});
    REQUIRE(pre.design.cols() == 1);
    CHECK(pre.design(0, 0) == doctest::Approx(-1.2247448714).epsilon(1e-9));
    CHECK(pre.design(1, 0) == doctest::Approx(0.0));
    CHECK(pre.design(2, 0) == doctest::Approx(1.2247448714).epsilon(1e-9));
}

TEST_CASE("preprocess constant column maps to zeros") {
    testutil::TempDir tmp("prepc");
    testutil::write_file(tmp.file("c.csv"), "x,y\n5,0\n5,1\n5,0\n");
    auto d = load_dataset(tmp.file("c.csv"), "y", TaskKind::classification);
    auto pre = preprocess(d, {0, 1, 2});
    CHECK(pre.design.col(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("preprocess one-hot and unseen categories") {
    testutil::TempDir tmp("prepo");
    testutil::write_file(tmp.file("o.csv"), "c,y\na,0\nb,1\na,0\nz,1\n");
    auto d = load_dataset(tmp.file("o.csv"), "y", TaskKind::classification);

    auto enc = Encoder::fit(d, {0, 1, 2});  // categories {a, b}
    CHECK(enc.width() == 2);
    auto X = enc.transform(d, {0, 1, 3});
    CHECK(X(0, 0) == 1.0);  // "a" -> (1, 0)
    CHECK(X(0, 1) == 0.0);
    CHECK(X(1, 0) == 0.0);  // "b" -> (0, 1)
    CHECK(X(1, 1) == 1.0);
    CHECK(X(2, 0) == 0.0);  // unseen "z" -> all zeros
    CHECK(X(2, 1) == 0.0);
}

TEST_CASE("preprocess imputes with fit-set median and mode") {
    testutil::TempDir tmp("prepm");
    testutil::write_file(tmp.file("m.csv"), "n,c,y\n1,a,0\n3,a,1\n,,0\n10,b,1\n");
    auto d = load_dataset(tmp.file("m.csv"), "y", TaskKind::classification);
    auto enc = Encoder::fit(d, {0, 1, 3});  // medians/modes from rows without the hole
    auto X = enc.transform(d, {2});
    // median of {1,3,10} = 3 -> standardized value of 3
    double mean = (1.0 + 3.0 + 10.0) / 3.0;
    double var = ((1 - mean) * (1 - mean) + (3 - mean) * (3 - mean) + (10 - mean) * (10 - mean)) / 3;
    CHECK(X(0, 0) == doctest::Approx((3.0 - mean) / std::sqrt(var)));
    // mode "a" -> first indicator column
    CHECK(X(0, 1) == 1.0);
    CHECK(X(0, 2) == 0.0);

    CHECK_THROWS_AS(Encoder::fit(d, {}), DataError);
}

TEST_CASE("transform on fit rows has mean 0 variance 1") {
    auto d = testutil::planted_signal(100, 5, 2, 42, TaskKind::classification);
    auto rows = all_rows(d);
    auto pre = preprocess(d, rows);
    for (Eigen::Index c = 0; c < pre.design.cols(); ++c) {
        double mu = pre.design.col(c).mean();
        double var = (pre.design.col(c).array() - mu).square().mean();
        CHECK(std::abs(mu) < 1e-9);
        CHECK(std::abs(var - 1.0) < 1e-9);
    }
}
