#include <set>

#include "doctest.h"
#include "sympcast/panel.hpp"
#include "test_helpers.hpp"

using namespace sympcast;
using namespace sympcast::testing;

namespace {

SchemaConfig basic_schema() {
    SchemaConfig schema;
    schema.target = "target";
    return schema;
}

}  // namespace

TEST_CASE("ingest: minimal well-formed CSV") {
    std::string path = write_temp("ingest_min.csv",
                                  "region,date,sig_a_weighted,target\n"
                                  "R0,2020-04-01,1.5,2.0\n"
                                  "R0,2020-04-02,1.6,2.1\n"
                                  "R0,2020-04-03,1.7,2.2\n");
    std::vector<AuditEntry> audit;
    PanelDataset ds = ingest_csv(path, basic_schema(), &audit);
    CHECK(ds.n_rows() == 3);
    CHECK(ds.n_cols() == 2);
    CHECK(ds.columns[0].kind == ColumnKind::weighted_signal);
    CHECK(ds.columns[1].kind == ColumnKind::target);
    CHECK(audit.empty());
}

TEST_CASE("ingest: bad date row is excluded and audited") {
    std::string path = write_temp("ingest_baddate.csv",
                                  "region,date,sig_a_weighted,target\n"
                                  "R0,2020-04-01,1.5,2.0\n"
                                  "R0,not-a-date,1.6,2.1\n"
                                  "R0,2020-04-03,1.7,2.2\n");
    std::vector<AuditEntry> audit;
    PanelDataset ds = ingest_csv(path, basic_schema(), &audit);
    CHECK(ds.n_rows() == 2);
    REQUIRE(audit.size() == 1);
    CHECK(audit[0].reason.find("unparseable date") != std::string::npos);
}

TEST_CASE("ingest: absent target column is an error") {
    std::string path = write_temp("ingest_notarget.csv",
                                  "region,date,sig_a_weighted\n"
                                  "R0,2020-04-01,1.5\n");
    try {
        ingest_csv(path, basic_schema());
        FAIL("expected UnknownTargetColumn");
    } catch (const Error& e) {
        CHECK(e.code() == errc::unknown_target_column);
    }
}

TEST_CASE("ingest: non-numeric cell excludes the row") {
    std::string path = write_temp("ingest_nonnum.csv",
                                  "region,date,sig_a_weighted,target\n"
                                  "R0,2020-04-01,oops,2.0\n"
                                  "R0,2020-04-02,1.6,2.1\n");
    std::vector<AuditEntry> audit;
    PanelDataset ds = ingest_csv(path, basic_schema(), &audit);
    CHECK(ds.n_rows() == 1);
    CHECK(audit.size() == 1);
}

TEST_CASE("ingest after write is identity on admitted rows") {
    SyntheticSpec spec;
    spec.seed = 11;
    PanelDataset ds = generate_synthetic(spec);
    std::string first = "/tmp/sympcast_test_roundtrip1.csv";
    write_csv(ds, first);
    SchemaConfig schema = basic_schema();
    PanelDataset back = ingest_csv(first, schema);
    std::string second = "/tmp/sympcast_test_roundtrip2.csv";
    write_csv(back, second);
    CHECK(slurp(first) == slurp(second));
}

TEST_CASE("prune: demographic and unweighted twins dropped") {
    Eigen::MatrixXd values(3, 4);
    values << 30, 1.0, 1.1, 5.0, 40, 2.0, 2.1, 6.0, 50, 3.0, 3.1, 7.0;
    PanelDataset ds = make_panel({col("age", ColumnKind::demographic), col("cough"),
                                  col("cough_weighted", ColumnKind::weighted_signal),
                                  col("target", ColumnKind::target)},
                                 values);
    auto [pruned, audit] = prune_features(ds, PruneConfig{});
    REQUIRE(pruned.n_cols() == 2);
    CHECK(pruned.columns[0].name == "cough_weighted");
    CHECK(pruned.columns[1].name == "target");
    CHECK(audit.size() == 2);
}

TEST_CASE("prune: pathological magnitude column dropped") {
    Eigen::MatrixXd values(2, 2);
    values << 1e52, 5.0, 2.0, 6.0;
    PanelDataset ds = make_panel({col("mean_hh_cli"), col("target", ColumnKind::target)}, values);
    auto [pruned, audit] = prune_features(ds, PruneConfig{});
    CHECK(pruned.n_cols() == 1);
    REQUIRE(audit.size() == 1);
    CHECK(audit[0].subject == "mean_hh_cli");
    CHECK(audit[0].reason == "magnitude");
}

TEST_CASE("prune: target-only dataset is untouched") {
    Eigen::MatrixXd values(2, 1);
    values << 5.0, 6.0;
    PanelDataset ds = make_panel({col("target", ColumnKind::target)}, values);
    auto [pruned, audit] = prune_features(ds, PruneConfig{});
    CHECK(pruned.n_cols() == 1);
    CHECK(audit.empty());
}

TEST_CASE("prune: rule matching the target aborts") {
    Eigen::MatrixXd values(2, 2);
    values << 1.0, 5.0, 2.0, 6.0;
    PanelDataset ds = make_panel({col("x", ColumnKind::other),
                                  col("target", ColumnKind::demographic)},
                                 values);
    CHECK_THROWS_AS(prune_features(ds, PruneConfig{}), Error);
}

TEST_CASE("prune is idempotent") {
    SyntheticSpec spec;
    spec.seed = 3;
    PanelDataset ds = generate_synthetic(spec);
    auto [once, audit1] = prune_features(ds, PruneConfig{});
    auto [twice, audit2] = prune_features(once, PruneConfig{});
    CHECK(audit2.empty());
    CHECK(once.n_cols() == twice.n_cols());
    CHECK(once.values == twice.values);
}

TEST_CASE("split: random 80/20 partitions") {
    SyntheticSpec spec;
    spec.n_regions = 1;
    spec.n_days = 10;
    spec.seed = 5;
    PanelDataset ds = generate_synthetic(spec);
    SplitSpec split_spec;
    split_spec.seed = 42;
    auto [train, test] = split(ds, split_spec);
    CHECK(train.n_rows() == 8);
    CHECK(test.n_rows() == 2);

    // disjoint and union = all, by date since the region is unique
    std::set<std::string> seen;
    for (const auto& d : train.row_date) seen.insert(d);
    for (const auto& d : test.row_date) CHECK(seen.insert(d).second);
    CHECK(seen.size() == 10);

    auto [train2, test2] = split(ds, split_spec);
    CHECK(train.row_date == train2.row_date);
    CHECK(test.row_date == test2.row_date);
}

TEST_CASE("split: chronological tail holds out the last horizon days") {
    SyntheticSpec spec;
    spec.n_regions = 1;
    spec.n_days = 100;
    spec.seed = 5;
    PanelDataset ds = generate_synthetic(spec);
    SplitSpec split_spec;
    split_spec.mode = SplitMode::chronological_tail;
    split_spec.horizon = 30;
    auto [train, test] = split(ds, split_spec);
    CHECK(train.n_rows() == 70);
    CHECK(test.n_rows() == 30);
    CHECK(train.row_date.back() < test.row_date.front());
}

TEST_CASE("split: too few rows") {
    Eigen::MatrixXd values(1, 1);
    values << 5.0;
    PanelDataset ds = make_panel({col("target", ColumnKind::target)}, values);
    SplitSpec split_spec;
    CHECK_THROWS_AS(split(ds, split_spec), Error);
}

TEST_CASE("synthetic: zero noise with a single unit weight reproduces the signal") {
    SyntheticSpec spec;
    spec.n_signals = 1;
    spec.planted_weights = {1.0};
    spec.noise_sigma = 0.0;
    spec.n_regions = 2;
    spec.n_days = 40;
    spec.seed = 9;
    PanelDataset ds = generate_synthetic(spec);
    CHECK(ds.values.col(0) == ds.values.col(1));
}

TEST_CASE("synthetic: same seed yields byte-identical datasets") {
    SyntheticSpec spec;
    spec.seed = 77;
    PanelDataset a = generate_synthetic(spec);
    PanelDataset b = generate_synthetic(spec);
    std::string pa = "/tmp/sympcast_test_det_a.csv", pb = "/tmp/sympcast_test_det_b.csv";
    write_csv(a, pa);
    write_csv(b, pb);
    CHECK(slurp(pa) == slurp(pb));
}

TEST_CASE("synthetic: zero-noise target is affine in the planted signals") {
    SyntheticSpec spec;
    spec.noise_sigma = 0.0;
    spec.seed = 13;
    PanelDataset ds = generate_synthetic(spec);
    // least-squares refit of target on planted signals has ~zero residual
    Eigen::MatrixXd X(ds.n_rows(), spec.planted_weights.size() + 1);
    X.col(0).setOnes();
    for (std::size_t j = 0; j < spec.planted_weights.size(); ++j)
        X.col(j + 1) = ds.values.col(j);
    Eigen::VectorXd y = ds.values.col(ds.target_index());
    Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    CHECK((X * beta - y).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("group_filter: matching, identity, and empty cases") {
    Eigen::MatrixXd values(4, 2);
    values << 0, 5, 1, 6, 0, 7, 1, 8;
    PanelDataset ds = make_panel({col("gender"), col("target", ColumnKind::target)}, values);

    PanelDataset females = group_filter(ds, "gender", "1");
    CHECK(females.n_rows() == 2);

    PanelDataset all = group_filter(ds, "gender", "*");
    CHECK(all.n_rows() == 4);

    CHECK_THROWS_AS(group_filter(ds, "gender", "2"), Error);
    CHECK_THROWS_AS(group_filter(ds, "nope", "1"), Error);
}
