// Python bindings for the core operations: synthetic panels, ingestion,
// feature ranking, regression, time-series analysis, clustering, and the
// evaluation harness.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sympcast/evalharness.hpp"
#include "sympcast/panel.hpp"
#include "sympcast/rankcorr.hpp"
#include "sympcast/regress.hpp"
#include "sympcast/shapecluster.hpp"
#include "sympcast/tseries.hpp"

namespace py = pybind11;
using namespace sympcast;

namespace {

py::dict adf_dict(const AdfResult& r) {
    py::dict d;
    d["statistic"] = r.statistic;
    d["lags_used"] = r.lags_used;
    d["n_effective"] = r.n_effective;
    d["crit_5pct"] = r.crit_5pct;
    d["reject_at_5pct"] = r.reject_at_5pct;
    return d;
}

py::dict eval_dict(const RepeatedEval& e) {
    py::dict d;
    d["mean_mae"] = e.mean_mae;
    d["mean_mre"] = e.mean_mre;
    d["mre_ci"] = py::make_tuple(e.mre_ci_low, e.mre_ci_high);
    d["degenerate_ci"] = e.degenerate_ci;
    py::list runs;
    for (const auto& r : e.runs) {
        py::dict run;
        run["mae"] = r.mae;
        run["mre"] = r.mre_percent;
        run["n"] = r.n;
        runs.append(run);
    }
    d["runs"] = runs;
    return d;
}

ModelSpec make_model_spec(const std::string& kind, int tree_max_depth, int tree_min_leaf,
                          int gbt_stages, double gbt_learning_rate, std::uint64_t seed) {
    ModelSpec spec;
    spec.kind = parse_model_kind(kind);
    spec.tree_max_depth = tree_max_depth;
    spec.tree_min_leaf = tree_min_leaf;
    spec.gbt_stages = gbt_stages;
    spec.gbt_learning_rate = gbt_learning_rate;
    spec.seed = seed;
    return spec;
}

}  // namespace

PYBIND11_MODULE(_sympcast, m) {
    m.doc() = "survey-panel prevalence prediction and forecasting toolkit";

    py::register_exception<Error>(m, "SympcastError");

    py::class_<PanelDataset>(m, "PanelDataset")
        .def_property_readonly("values", [](const PanelDataset& ds) { return ds.values; })
        .def_property_readonly("target", [](const PanelDataset& ds) { return ds.target; })
        .def_property_readonly("column_names",
                               [](const PanelDataset& ds) {
                                   std::vector<std::string> names;
                                   for (const auto& c : ds.columns) names.push_back(c.name);
                                   return names;
                               })
        .def_property_readonly("row_region",
                               [](const PanelDataset& ds) { return ds.row_region; })
        .def_property_readonly("row_date", [](const PanelDataset& ds) { return ds.row_date; })
        .def("n_rows", &PanelDataset::n_rows)
        .def("n_cols", &PanelDataset::n_cols)
        .def("feature_names", &PanelDataset::feature_names)
        .def("regions", &PanelDataset::regions)
        .def("region_series", &PanelDataset::region_series, py::arg("region"), py::arg("cols"));

    m.def(
        "generate_synthetic",
        [](int n_regions, int n_days, int n_signals, const std::vector<double>& weights,
           double noise_sigma, double ar_coefficient, std::uint64_t seed) {
            SyntheticSpec spec;
            spec.n_regions = n_regions;
            spec.n_days = n_days;
            spec.n_signals = n_signals;
            spec.planted_weights = weights;
            spec.noise_sigma = noise_sigma;
            spec.ar_coefficient = ar_coefficient;
            spec.seed = seed;
            return generate_synthetic(spec);
        },
        py::arg("n_regions") = 4, py::arg("n_days") = 150, py::arg("n_signals") = 6,
        py::arg("weights") = std::vector<double>{5.0, 1.0, 0.1}, py::arg("noise_sigma") = 0.01,
        py::arg("ar_coefficient") = 0.7, py::arg("seed") = 0);

    m.def(
        "ingest_csv",
        [](const std::string& path, const std::string& target) {
            SchemaConfig schema;
            schema.target = target;
            std::vector<AuditEntry> audit;
            PanelDataset ds = ingest_csv(path, schema, &audit);
            py::list audit_list;
            for (const auto& e : audit) audit_list.append(py::make_tuple(e.subject, e.reason));
            return py::make_tuple(ds, audit_list);
        },
        py::arg("path"), py::arg("target") = "target");

    m.def("write_csv", &write_csv, py::arg("dataset"), py::arg("path"));

    m.def(
        "prune_features",
        [](const PanelDataset& ds) {
            auto [pruned, audit] = prune_features(ds, PruneConfig{});
            py::list audit_list;
            for (const auto& e : audit) audit_list.append(py::make_tuple(e.subject, e.reason));
            return py::make_tuple(pruned, audit_list);
        },
        py::arg("dataset"));

    m.def("pearson", &pearson, py::arg("x"), py::arg("y"));
    m.def("pearson_p_value", &pearson_p_value, py::arg("r"), py::arg("n"));

    m.def(
        "f_regression",
        [](const PanelDataset& ds, const std::vector<std::string>& features,
           const std::string& target) {
            std::vector<std::string> use = features.empty() ? ds.feature_names() : features;
            std::string tgt = target.empty() ? ds.target : target;
            FeatureRanking ranking = f_regression(ds, use, tgt);
            py::list out;
            for (const auto& e : ranking.entries)
                out.append(py::make_tuple(e.rank, e.name, e.f_stat));
            return out;
        },
        py::arg("dataset"), py::arg("features") = std::vector<std::string>{},
        py::arg("target") = "");

    py::class_<FittedModel>(m, "FittedModel")
        .def("predict", &FittedModel::predict, py::arg("X"))
        .def_property_readonly("coefficients",
                               [](const FittedModel& m_) { return m_.coefficients; })
        .def_property_readonly("intercept", [](const FittedModel& m_) { return m_.intercept; })
        .def_property_readonly("train_mse",
                               [](const FittedModel& m_) { return m_.train_diagnostics; });

    m.def(
        "fit",
        [](const std::string& kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
           int tree_max_depth, int tree_min_leaf, int gbt_stages, double gbt_learning_rate,
           std::uint64_t seed) {
            return fit(make_model_spec(kind, tree_max_depth, tree_min_leaf, gbt_stages,
                                       gbt_learning_rate, seed),
                       X, y);
        },
        py::arg("kind"), py::arg("X"), py::arg("y"), py::arg("tree_max_depth") = 3,
        py::arg("tree_min_leaf") = 5, py::arg("gbt_stages") = 100,
        py::arg("gbt_learning_rate") = 0.1, py::arg("seed") = 0);

    m.def("mae", &mae, py::arg("pred"), py::arg("actual"));
    m.def(
        "mre",
        [](const Eigen::VectorXd& pred, const Eigen::VectorXd& actual) {
            return mre(pred, actual);
        },
        py::arg("pred"), py::arg("actual"));

    m.def(
        "adf_test",
        [](const Eigen::VectorXd& y) { return adf_dict(adf_test(y)); }, py::arg("y"));

    m.def(
        "var_forecast",
        [](const Eigen::MatrixXd& Y, int horizon, int p_max) {
            VarModel model = var_fit(Y, p_max);
            ForecastResult r = var_forecast(model, Y, horizon);
            py::dict d;
            d["p"] = model.p;
            d["aic"] = model.aic;
            d["per_step"] = r.per_step;
            return d;
        },
        py::arg("Y"), py::arg("horizon"), py::arg("p_max") = 7);

    m.def(
        "dtw",
        [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
            DtwResult r = dtw(a, b);
            return py::make_tuple(r.distance, r.path);
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "agglomerate",
        [](const std::map<std::string, Eigen::VectorXd>& profiles, int k,
           const std::string& linkage) {
            ClusterAssignment assign = agglomerate(profiles, k, parse_linkage(linkage));
            py::dict labels;
            for (std::size_t i = 0; i < assign.items.size(); ++i)
                labels[py::str(assign.items[i])] = assign.labels[i];
            return labels;
        },
        py::arg("profiles"), py::arg("k"), py::arg("linkage") = "average");

    m.def(
        "repeated_eval",
        [](const PanelDataset& ds, const std::vector<std::string>& features,
           const std::string& model_kind, int runs, std::uint64_t base_seed, int threads) {
            ModelSpec spec;
            spec.kind = parse_model_kind(model_kind);
            spec.seed = base_seed;
            EvalConfig config;
            config.runs = runs;
            config.base_seed = base_seed;
            config.threads = threads;
            return eval_dict(repeated_eval(ds, features, spec, config));
        },
        py::arg("dataset"), py::arg("features"), py::arg("model_kind") = "gbt",
        py::arg("runs") = 20, py::arg("base_seed") = 0, py::arg("threads") = 1);

    m.def(
        "forecast_backtest",
        [](const PanelDataset& ds, const std::string& region,
           const std::vector<std::string>& features, const std::string& model, int horizon) {
            BacktestConfig config;
            config.horizon = horizon;
            ForecastModel kind =
                model == "lstm" ? ForecastModel::lstm : ForecastModel::var;
            ForecastResult r = forecast_backtest(ds, region, features, kind, config);
            py::dict d;
            d["per_step"] = r.per_step;
            if (r.mae) d["mae"] = *r.mae;
            if (r.mre) d["mre"] = *r.mre;
            if (r.dtw_distance) d["dtw_distance"] = *r.dtw_distance;
            d["stationarity_warning"] = r.stationarity_warning.has_value();
            return d;
        },
        py::arg("dataset"), py::arg("region"), py::arg("features"), py::arg("model") = "var",
        py::arg("horizon") = 30);
}
