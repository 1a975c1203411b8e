#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "drpt/dataset.hpp"
#include "drpt/rng.hpp"
#include "oracles.hpp"

namespace {

std::string temp_csv(const std::string& name, const std::string& content) {
    const std::string path = "test_" + name + ".csv";
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("load_csv basic header file") {
    const auto path = temp_csv("basic", "f1,f2,class\n1,2,a\n3,4,b\n5,6,a\n");
    const drpt::Dataset d = drpt::load_csv(path, "class", true);
    CHECK(d.samples() == 3);
    CHECK(d.features() == 2);
    CHECK(d.feature_names == std::vector<std::string>{"f1", "f2"});
    // Classes coded by first appearance: a=0, b=1.
    CHECK(d.b == std::vector<double>{0, 1, 0});
    CHECK(d.class_labels == std::vector<std::string>{"a", "b"});
    CHECK(d.a.at(1, 0) == 3);
}

TEST_CASE("load_csv label by zero-based index and by last") {
    const auto path = temp_csv("label_idx", "y,f1,f2\nx,1,2\ny,3,4\n");
    const drpt::Dataset d = drpt::load_csv(path, "0", true);
    CHECK(d.feature_names == std::vector<std::string>{"f1", "f2"});
    CHECK(d.b == std::vector<double>{0, 1});

    const auto path2 = temp_csv("label_last", "f1,f2,y\n1,2,q\n3,4,r\n");
    const drpt::Dataset d2 = drpt::load_csv(path2, "last", true);
    CHECK(d2.b == std::vector<double>{0, 1});
}

TEST_CASE("load_csv keeps numeric labels continuous") {
    const auto path = temp_csv("contlab", "f1,y\n1,0.25\n2,-3.5\n3,0.25\n");
    const drpt::Dataset d = drpt::load_csv(path, "last", true);
    CHECK(d.b == std::vector<double>{0.25, -3.5, 0.25});
    CHECK(d.class_labels.empty());
}

TEST_CASE("load_csv flags empty cells as missing") {
    const auto path = temp_csv("missing", "f1,f2,y\n1,,a\n3,4,b\n");
    const drpt::Dataset d = drpt::load_csv(path, "y", true);
    CHECK(d.has_missing());
    CHECK(std::isnan(d.a.at(0, 1)));
}

TEST_CASE("load_csv honors RFC-4180 quoting") {
    const auto path = temp_csv("quoted", "\"f,1\",f2,y\n1,2,\"a\"\"b\"\n3,4,c\n");
    const drpt::Dataset d = drpt::load_csv(path, "y", true);
    CHECK(d.feature_names[0] == "f,1");
    CHECK(d.class_labels[0] == "a\"b");
}

TEST_CASE("load_csv reports ragged rows with the row number") {
    const auto path = temp_csv("ragged", "f1,f2,y\n1,2,a\n3,a\n");
    CHECK_THROWS_WITH_AS(drpt::load_csv(path, "y", true),
                         doctest::Contains("row 3"), drpt::FormatError);
}

TEST_CASE("load_csv reports non-numeric cells with coordinates") {
    const auto path = temp_csv("nonnum", "f1,f2,y\n1,oops,a\n3,4,b\n");
    CHECK_THROWS_WITH_AS(drpt::load_csv(path, "y", true),
                         doctest::Contains("row 2, column 2"), drpt::FormatError);
}

TEST_CASE("load_csv rejects unknown label columns") {
    const auto path = temp_csv("badlabel", "f1,f2,y\n1,2,a\n");
    CHECK_THROWS_AS(drpt::load_csv(path, "nope", true), drpt::FormatError);
}

TEST_CASE("knn_impute copies the single nearest row") {
    drpt::Dataset d;
    d.a = drpt::Matrix::with_missing(2, 3, {1, 2, std::nan(""), 1, 2, 9});
    d.b = {0, 1};
    d.feature_names = {"a", "b", "c"};
    const drpt::Dataset out = drpt::knn_impute(d, 1);
    CHECK(out.a.at(0, 2) == 9);
}

TEST_CASE("knn_impute averages the k neighbors") {
    drpt::Dataset d;
    d.a = drpt::Matrix::with_missing(3, 2, {5, 1, 5, 2, 5, std::nan("")});
    d.b = {0, 0, 1};
    d.feature_names = {"a", "b"};
    const drpt::Dataset out = drpt::knn_impute(d, 2);
    CHECK(out.a.at(2, 1) == doctest::Approx(1.5));
}

TEST_CASE("knn_impute matches the brute-force reference") {
    drpt::Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        drpt::Dataset d;
        d.a = oracle::random_matrix(20, 5, rng);
        d.b.assign(20, 0.0);
        d.feature_names = {"a", "b", "c", "d", "e"};
        for (int h = 0; h < 5; ++h) {  // ~5% missing
            d.a.at(rng.next_u64() % 20, rng.next_u64() % 5) =
                std::numeric_limits<double>::quiet_NaN();
        }
        CHECK(drpt::knn_impute(d, 4).a == oracle::knn_impute_brute(d, 4).a);
    }
}

TEST_CASE("knn_impute rejects an entirely missing column") {
    drpt::Dataset d;
    d.a = drpt::Matrix::with_missing(2, 2, {1, std::nan(""), 2, std::nan("")});
    d.b = {0, 1};
    d.feature_names = {"a", "b"};
    CHECK_THROWS_AS(drpt::knn_impute(d, 1), drpt::ValidationError);
}

TEST_CASE("normalize runs min-max then unit-norm") {
    drpt::Dataset d;
    d.a = drpt::Matrix(3, 1, {0, 3, 4});
    d.b = {0, 1, 0};
    d.feature_names = {"f"};
    const auto [out, rec] = drpt::normalize(d);
    // min-max gives [0, .75, 1]; its 2-norm is 1.25.
    CHECK(out.a.at(0, 0) == doctest::Approx(0.0));
    CHECK(out.a.at(1, 0) == doctest::Approx(0.6));
    CHECK(out.a.at(2, 0) == doctest::Approx(0.8));
    CHECK(rec.min[0] == 0);
    CHECK(rec.max[0] == 4);
    CHECK(rec.norm[0] == doctest::Approx(1.25));
}

TEST_CASE("normalize maps constant columns to zero and flags them") {
    drpt::Dataset d;
    d.a = drpt::Matrix(3, 2, {7, 1, 7, 2, 7, 3});
    d.b = {0, 1, 0};
    d.feature_names = {"const", "var"};
    const auto [out, rec] = drpt::normalize(d);
    CHECK(out.a.at(0, 0) == 0.0);
    CHECK(out.a.at(2, 0) == 0.0);
    CHECK(rec.constant[0]);
    CHECK_FALSE(rec.constant[1]);
}

TEST_CASE("normalize leaves unit 2-norm columns") {
    drpt::Rng rng(9);
    drpt::Dataset d;
    d.a = oracle::random_matrix(12, 6, rng);
    d.b.assign(12, 0.0);
    d.feature_names.assign(6, "f");
    const auto [out, rec] = drpt::normalize(d);
    for (std::size_t j = 0; j < 6; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < 12; ++i) s += out.a.at(i, j) * out.a.at(i, j);
        CHECK(std::fabs(std::sqrt(s) - 1.0) <= 1e-12);
    }
}

TEST_CASE("normalize record reproduces the transform") {
    drpt::Rng rng(10);
    drpt::Dataset d;
    d.a = oracle::random_matrix(8, 3, rng);
    d.b.assign(8, 0.0);
    d.feature_names = {"a", "b", "c"};
    const auto [out, rec] = drpt::normalize(d);
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t i = 0; i < 8; ++i) {
            const double replay =
                (d.a.at(i, j) - rec.min[j]) / (rec.max[j] - rec.min[j]) / rec.norm[j];
            CHECK(replay == out.a.at(i, j));  // bit-exact
        }
    }
    // Determinism.
    CHECK(drpt::normalize(d).first.a == out.a);
}

TEST_CASE("normalize stages can be disabled independently") {
    drpt::Dataset d;
    d.a = drpt::Matrix(2, 1, {3, 4});
    d.b = {0, 1};
    d.feature_names = {"f"};
    drpt::NormalizeOptions only_unit;
    only_unit.min_max = false;
    const auto out = drpt::normalize(d, only_unit).first;
    CHECK(out.a.at(0, 0) == doctest::Approx(0.6));
    CHECK(out.a.at(1, 0) == doctest::Approx(0.8));
}

TEST_CASE("stratified_split takes the right per-class counts") {
    drpt::Dataset d;
    d.a = drpt::Matrix(30, 1);
    d.b.assign(30, 0.0);
    for (std::size_t i = 10; i < 30; ++i) d.b[i] = 1.0;
    d.feature_names = {"f"};
    const drpt::SplitPlan plan = drpt::stratified_split(d, 0.7, 42);
    std::size_t train0 = 0, train1 = 0;
    for (std::size_t r : plan.train_rows) (d.b[r] == 0.0 ? train0 : train1)++;
    CHECK(train0 == 7);
    CHECK(train1 == 14);
    CHECK(plan.train_rows.size() + plan.test_rows.size() == 30);

    // Disjoint.
    for (std::size_t r : plan.train_rows) {
        for (std::size_t t : plan.test_rows) CHECK(r != t);
    }
}

TEST_CASE("stratified_split exact halves") {
    drpt::Dataset d;
    d.a = drpt::Matrix(8, 1);
    d.b = {0, 0, 0, 0, 1, 1, 1, 1};
    d.feature_names = {"f"};
    const drpt::SplitPlan plan = drpt::stratified_split(d, 0.5, 1);
    CHECK(plan.train_rows.size() == 4);
    CHECK(plan.test_rows.size() == 4);
}

TEST_CASE("stratified_split is deterministic in the seed") {
    drpt::Dataset d;
    d.a = drpt::Matrix(20, 1);
    d.b.assign(20, 0.0);
    for (std::size_t i = 0; i < 10; ++i) d.b[i] = 1.0;
    d.feature_names = {"f"};
    const drpt::SplitPlan p1 = drpt::stratified_split(d, 0.7, 5);
    const drpt::SplitPlan p2 = drpt::stratified_split(d, 0.7, 5);
    CHECK(p1.train_rows == p2.train_rows);
    CHECK(p1.test_rows == p2.test_rows);
}

TEST_CASE("stratified_split rejects singleton classes") {
    drpt::Dataset d;
    d.a = drpt::Matrix(3, 1);
    d.b = {0, 0, 1};
    d.feature_names = {"f"};
    CHECK_THROWS_AS(drpt::stratified_split(d, 0.5, 0), drpt::ValidationError);
}

TEST_CASE("permutations: identity, inverse, composition, names") {
    drpt::Rng rng(11);
    drpt::Dataset d;
    d.a = oracle::random_matrix(6, 4, rng);
    d.b = {0, 1, 0, 1, 0, 1};
    d.feature_names = {"w", "x", "y", "z"};

    const std::vector<std::size_t> id{0, 1, 2, 3, 4, 5};
    CHECK(drpt::permute_rows(d, id).a == d.a);

    const std::vector<std::size_t> perm{3, 1, 0, 2};
    const drpt::Dataset pc = drpt::permute_cols(d, perm);
    CHECK(pc.feature_names == std::vector<std::string>{"z", "x", "w", "y"});
    CHECK(pc.a.at(0, 0) == d.a.at(0, 3));

    // Applying the inverse restores the original.
    std::vector<std::size_t> inv(4);
    for (std::size_t j = 0; j < 4; ++j) inv[perm[j]] = j;
    const drpt::Dataset back = drpt::permute_cols(pc, inv);
    CHECK(back.a == d.a);
    CHECK(back.feature_names == d.feature_names);

    // Composition: perm2 applied after perm1 equals the composed permutation.
    const std::vector<std::size_t> p1{1, 0, 2, 3}, p2{2, 3, 1, 0};
    const drpt::Dataset two_step = drpt::permute_cols(drpt::permute_cols(d, p1), p2);
    std::vector<std::size_t> composed(4);
    for (std::size_t j = 0; j < 4; ++j) composed[j] = p1[p2[j]];
    CHECK(two_step.a == drpt::permute_cols(d, composed).a);

    // Labels follow rows.
    const std::vector<std::size_t> rp{5, 4, 3, 2, 1, 0};
    const drpt::Dataset pr = drpt::permute_rows(d, rp);
    CHECK(pr.b == std::vector<double>{1, 0, 1, 0, 1, 0});
}

TEST_CASE("permutations reject invalid input") {
    drpt::Dataset d;
    d.a = drpt::Matrix(2, 2, {1, 2, 3, 4});
    d.b = {0, 1};
    d.feature_names = {"a", "b"};
    CHECK_THROWS_AS(drpt::permute_rows(d, {0, 0}), drpt::ValidationError);
    CHECK_THROWS_AS(drpt::permute_cols(d, {0}), drpt::ValidationError);
    CHECK_THROWS_AS(drpt::permute_cols(d, {0, 5}), drpt::ValidationError);
}

TEST_CASE("content_hash tracks data changes") {
    drpt::Dataset d;
    d.a = drpt::Matrix(2, 2, {1, 2, 3, 4});
    d.b = {0, 1};
    d.feature_names = {"a", "b"};
    const std::uint64_t h = drpt::content_hash(d);
    CHECK(h == drpt::content_hash(d));
    drpt::Dataset d2 = d;
    d2.a.at(0, 0) = 1.5;
    CHECK(h != drpt::content_hash(d2));
}

TEST_CASE("write_csv round-trips through load_csv") {
    drpt::Rng rng(12);
    drpt::Dataset d;
    d.a = oracle::random_matrix(5, 3, rng);
    d.b = {0.5, -1, 2, 0.5, 3};
    d.feature_names = {"a", "b", "c"};
    drpt::write_csv(d, "test_roundtrip.csv");
    const drpt::Dataset back = drpt::load_csv("test_roundtrip.csv", "last", true);
    CHECK(back.a == d.a);
    CHECK(back.b == d.b);
    CHECK(back.feature_names == d.feature_names);
}
