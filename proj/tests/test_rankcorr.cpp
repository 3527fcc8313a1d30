#include <cmath>
#include <set>
#include <utility>

#include "doctest.h"
#include "sympcast/rankcorr.hpp"
#include "test_helpers.hpp"

using namespace sympcast;
using namespace sympcast::testing;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(v.size());
    int i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// independent oracle: two-sided tail mass of the Student-t density by
// Simpson quadrature on [|t|, cutoff]
double t_tail_by_quadrature(double t, double df) {
    double norm = std::exp(std::lgamma((df + 1) / 2.0) - std::lgamma(df / 2.0)) /
                  std::sqrt(df * M_PI);
    auto density = [&](double x) {
        return norm * std::pow(1.0 + x * x / df, -(df + 1) / 2.0);
    };
    double lo = std::fabs(t), hi = 1e7;
    // substitute x = lo + u/(1-u) to map [0,1) onto [lo, inf)
    auto g = [&](double u) {
        double x = lo + u / (1.0 - u);
        double jac = 1.0 / ((1.0 - u) * (1.0 - u));
        return density(x) * jac;
    };
    (void)hi;
    int n = 20000;  // even
    double h = 1.0 / n, sum = g(0.0);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * g(i * h);
    // endpoint u=1 maps to infinity where the density vanishes
    return 2.0 * sum * h / 3.0;
}

}  // namespace

TEST_CASE("pearson: exact linear relations") {
    Eigen::VectorXd x = vec({1, 2, 3, 4});
    CHECK(pearson(x, 2.0 * x.array() + 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson(x, -x) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson: hand-evaluated value sqrt(3)/2") {
    double r = pearson(vec({1, 2, 3}), vec({1, 2, 2}));
    CHECK(r == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-9));
}

TEST_CASE("pearson: constant input reported") {
    CHECK_THROWS_AS(pearson(vec({1, 1, 1}), vec({1, 2, 3})), Error);
}

TEST_CASE("pearson symmetry and affine property") {
    RandomStream rng(4);
    Eigen::VectorXd x(30), y(30);
    for (int i = 0; i < 30; ++i) {
        x(i) = rng.normal();
        y(i) = rng.normal();
    }
    CHECK(pearson(x, y) == doctest::Approx(pearson(y, x)).epsilon(1e-14));
    CHECK(pearson(x, 3.5 * x.array() - 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson(x, -0.5 * x.array() + 7.0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("p-value: null, limit, and quadrature-checked cases") {
    CHECK(pearson_p_value(0.0, 10) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson_p_value(1.0, 10) == 0.0);

    // r = sqrt(3)/2, n = 3 -> p = 1/3 exactly (I_x(1/2,1/2) closed form)
    double p = pearson_p_value(std::sqrt(3.0) / 2.0, 3);
    CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

    // independent quadrature oracle at several (r, n)
    for (auto [r, n] : {std::pair{0.3, 12}, {0.6, 8}, {-0.45, 25}}) {
        double df = n - 2;
        double t = r * std::sqrt(df / (1.0 - r * r));
        CHECK(pearson_p_value(r, n) ==
              doctest::Approx(t_tail_by_quadrature(t, df)).epsilon(1e-6));
    }

    CHECK_THROWS_AS(pearson_p_value(0.5, 2), Error);
}

TEST_CASE("correlation matrix: structure and identical columns") {
    Eigen::MatrixXd values(5, 3);
    for (int i = 0; i < 5; ++i) {
        values(i, 0) = i + 1;
        values(i, 1) = i + 1;  // identical to column 0
        values(i, 2) = 10 - i;
    }
    PanelDataset ds = make_panel({col("a"), col("b"), col("target", ColumnKind::target)}, values);
    CorrelationReport report = correlation_matrix(ds, {"a", "b", "target"});
    CHECK(report.matrix.rows() == 3);
    CHECK(report.matrix(0, 0) == 1.0);
    CHECK(report.matrix(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((report.matrix - report.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(report.pairs.size() == 3);
}

TEST_CASE("correlation matrix: independent noise decorrelates") {
    RandomStream rng(123);
    Eigen::MatrixXd values(10000, 2);
    for (int i = 0; i < 10000; ++i) {
        values(i, 0) = rng.normal();
        values(i, 1) = rng.normal();
    }
    PanelDataset ds;
    ds.columns = {col("a"), col("target", ColumnKind::target)};
    ds.target = "target";
    ds.values = values;
    for (int i = 0; i < 10000; ++i) {
        ds.row_region.push_back("R0");
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-01-01", 1000 + i);  // distinct dates
        ds.row_date.push_back(buf);
    }
    CorrelationReport report = correlation_matrix(ds, {"a", "target"});
    CHECK(std::fabs(report.matrix(0, 1)) < 0.05);
}

TEST_CASE("correlation matrix: constant column marked undefined") {
    Eigen::MatrixXd values(4, 2);
    values << 1, 5, 1, 6, 1, 7, 1, 8;
    PanelDataset ds = make_panel({col("const_col"), col("target", ColumnKind::target)}, values);
    CorrelationReport report = correlation_matrix(ds, {"const_col", "target"});
    REQUIRE(report.pairs.size() == 1);
    CHECK_FALSE(report.pairs[0].defined);
    CHECK_FALSE(report.pairs[0].flagged);
}

TEST_CASE("f_regression: hand-evaluated F = 3.0") {
    Eigen::MatrixXd values(3, 2);
    values << 1, 1, 2, 2, 3, 2;
    PanelDataset ds = make_panel({col("x"), col("target", ColumnKind::target)}, values);
    FeatureRanking ranking = f_regression(ds, {"x"}, "target");
    REQUIRE(ranking.entries.size() == 1);
    CHECK(ranking.entries[0].f_stat == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("f_regression: perfect copy of target gets the sentinel and rank 1") {
    Eigen::MatrixXd values(4, 3);
    values << 1, 9, 1, 2, 7, 2, 3, 8, 3, 4, 6, 4;
    PanelDataset ds =
        make_panel({col("copy"), col("noise"), col("target", ColumnKind::target)}, values);
    FeatureRanking ranking = f_regression(ds, {"copy", "noise"}, "target");
    CHECK(ranking.entries[0].name == "copy");
    CHECK(ranking.entries[0].rank == 1);
    CHECK(ranking.entries[0].f_stat == kPerfectFitF);
    CHECK(ranking.entries[0].perfect_fit);
}

TEST_CASE("f_regression: planted panel ranks signals by weight") {
    SyntheticSpec spec;
    spec.n_signals = 3;
    spec.planted_weights = {5.0, 1.0, 0.1};
    spec.noise_sigma = 0.01;
    spec.seed = 21;
    PanelDataset ds = generate_synthetic(spec);
    FeatureRanking ranking = f_regression(ds, ds.feature_names(), "target");

    // brute-force oracle: recompute F per feature from the definition
    int t = ds.target_index();
    for (const auto& entry : ranking.entries) {
        int c = ds.require_col(entry.name);
        double r = pearson(ds.values.col(c), ds.values.col(t));
        double expected = r * r / (1.0 - r * r) * (ds.n_rows() - 2);
        CHECK(entry.f_stat == doctest::Approx(expected).epsilon(1e-9));
    }
    CHECK(ranking.entries[0].name == "sig0");
    CHECK(ranking.entries[1].name == "sig1");
    CHECK(ranking.entries[2].name == "sig2");
}

TEST_CASE("f_regression: affine rescaling leaves F invariant") {
    SyntheticSpec spec;
    spec.seed = 31;
    PanelDataset ds = generate_synthetic(spec);
    FeatureRanking before = f_regression(ds, ds.feature_names(), "target");
    PanelDataset scaled = ds;
    scaled.values.col(0) = 3.7 * scaled.values.col(0).array() - 42.0;
    FeatureRanking after = f_regression(scaled, scaled.feature_names(), "target");
    for (std::size_t i = 0; i < before.entries.size(); ++i) {
        const auto& b = before.entries[i];
        for (const auto& a : after.entries)
            if (a.name == b.name)
                CHECK(a.f_stat ==
                      doctest::Approx(b.f_stat).epsilon(1e-9));
    }
}

TEST_CASE("f_regression: ranking is a permutation with consecutive ranks") {
    SyntheticSpec spec;
    spec.seed = 41;
    PanelDataset ds = generate_synthetic(spec);
    std::vector<std::string> features = ds.feature_names();
    FeatureRanking ranking = f_regression(ds, features, "target");
    REQUIRE(ranking.entries.size() == features.size());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        CHECK(ranking.entries[i].rank == static_cast<int>(i) + 1);
        CHECK(seen.insert(ranking.entries[i].name).second);
    }
    for (const auto& f : features) CHECK(seen.count(f) == 1);
}

TEST_CASE("f_regression: top-1 is the largest-weight signal over 10 seeds") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SyntheticSpec spec;
        spec.seed = seed;
        spec.noise_sigma = 0.01;  // <= 0.1 * smallest planted weight
        PanelDataset ds = generate_synthetic(spec);
        FeatureRanking ranking = f_regression(ds, ds.feature_names(), "target");
        CHECK(ranking.entries[0].name == "sig0");
    }
}
