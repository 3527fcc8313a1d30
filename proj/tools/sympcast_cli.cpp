// sympcast: survey-panel prevalence prediction and forecasting toolkit.
//
// Subcommands: synth, ingest, prune, rank, correlate, predict, forecast,
// ablate, adf, cluster, dtw. Structured reports are JSON, plot-ready
// trajectories are CSV. Exit codes: 0 success, 2 usage/validation error,
// 1 computation error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sympcast/evalharness.hpp"
#include "sympcast/panel.hpp"
#include "sympcast/rankcorr.hpp"
#include "sympcast/regress.hpp"
#include "sympcast/reports.hpp"
#include "sympcast/shapecluster.hpp"
#include "sympcast/tseries.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sympcast;

namespace {

// Config file values fill in flags the user did not pass on the command
// line: CLI flag > config file > built-in default.
struct ConfigFile {
    json data = json::object();

    template <typename T>
    void fill(const CLI::Option* opt, const std::string& key, T& value) const {
        if (opt && opt->count() > 0) return;
        if (data.contains(key)) value = data.at(key).get<T>();
    }
};

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int runs = 20;

    std::string data_path;
    std::string schema_path;
    bool no_prune = false;

    // synthetic generator knobs (used when no --data is given)
    int regions = 4;
    int days = 150;
    int signals = 6;
    std::vector<double> weights = {5.0, 1.0, 0.1};
    double noise = 0.01;
    double ar = 0.7;

    CLI::Option* opt_seed = nullptr;
    CLI::Option* opt_runs = nullptr;
    CLI::Option* opt_data = nullptr;
    CLI::Option* opt_schema = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_dataset = true) {
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--out", opts.out_dir, "output directory");
    opts.opt_seed = cmd->add_option("--seed", opts.seed, "base random seed");
    opts.opt_runs = cmd->add_option("--runs", opts.runs, "repeated-evaluation run count");
    if (with_dataset) {
        opts.opt_data = cmd->add_option("--data", opts.data_path, "input panel CSV");
        opts.opt_schema = cmd->add_option("--schema", opts.schema_path, "column-role schema JSON");
        cmd->add_flag("--no-prune", opts.no_prune, "skip feature pruning");
        cmd->add_option("--regions", opts.regions, "synthetic: region count");
        cmd->add_option("--days", opts.days, "synthetic: days per region");
        cmd->add_option("--signals", opts.signals, "synthetic: signal count");
        cmd->add_option("--weights", opts.weights, "synthetic: planted target weights");
        cmd->add_option("--noise", opts.noise, "synthetic: noise sigma");
        cmd->add_option("--ar", opts.ar, "synthetic: AR(1) coefficient");
    }
}

ConfigFile load_config(const CommonOpts& opts) {
    ConfigFile cfg;
    if (opts.config_path.empty()) return cfg;
    std::ifstream in(opts.config_path);
    if (!in) raise(errc::io_error, "cannot open config '" + opts.config_path + "'");
    try {
        in >> cfg.data;
    } catch (const std::exception& e) {
        raise(errc::bad_spec, std::string("config parse: ") + e.what());
    }
    return cfg;
}

void apply_config(CommonOpts& opts, const ConfigFile& cfg) {
    cfg.fill(opts.opt_seed, "seed", opts.seed);
    cfg.fill(opts.opt_runs, "runs", opts.runs);
    cfg.fill(opts.opt_data, "dataset", opts.data_path);
    cfg.fill(opts.opt_schema, "schema", opts.schema_path);
}

SyntheticSpec synthetic_spec(const CommonOpts& opts) {
    SyntheticSpec spec;
    spec.n_regions = opts.regions;
    spec.n_days = opts.days;
    spec.n_signals = opts.signals;
    spec.planted_weights = opts.weights;
    spec.noise_sigma = opts.noise;
    spec.ar_coefficient = opts.ar;
    spec.seed = opts.seed;
    return spec;
}

PanelDataset load_dataset(const CommonOpts& opts, std::vector<AuditEntry>* audit = nullptr) {
    PanelDataset ds;
    PruneConfig prune_rules;
    if (!opts.data_path.empty()) {
        SchemaConfig schema;
        if (!opts.schema_path.empty()) {
            schema = load_schema_config(opts.schema_path);
        } else {
            schema.target = "target";
        }
        ds = ingest_csv(opts.data_path, schema, audit);
        prune_rules.weighted_suffix = schema.weighted_suffix;
        prune_rules.unweighted_suffix = schema.unweighted_suffix;
        prune_rules.magnitude_threshold = schema.magnitude_threshold;
    } else {
        ds = generate_synthetic(synthetic_spec(opts));
    }
    if (!opts.no_prune) {
        auto [pruned, prune_audit] = prune_features(ds, prune_rules);
        if (audit)
            for (auto& e : prune_audit) audit->push_back(std::move(e));
        ds = std::move(pruned);
    }
    return ds;
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
    fs::create_directories(opts.out_dir);
    return (fs::path(opts.out_dir) / name).string();
}

void emit(const CommonOpts& opts, const std::string& name, const std::string& contents) {
    std::string path = out_path(opts, name);
    write_file_atomic(path, contents);
    std::cout << path << "\n";
}

std::string audit_jsonl(const std::vector<AuditEntry>& audit) {
    std::ostringstream out;
    for (const auto& e : audit)
        out << json({{"subject", e.subject}, {"reason", e.reason}}).dump() << "\n";
    return out.str();
}

ModelSpec model_spec_from(const std::string& model_name, const CommonOpts& opts,
                          const ConfigFile& cfg) {
    ModelSpec spec;
    spec.kind = parse_model_kind(model_name);
    spec.seed = opts.seed;
    if (cfg.data.contains("model_params")) {
        const json& p = cfg.data.at("model_params");
        spec.tree_max_depth = p.value("tree_max_depth", spec.tree_max_depth);
        spec.tree_min_leaf = p.value("tree_min_leaf", spec.tree_min_leaf);
        spec.gbt_stages = p.value("gbt_stages", spec.gbt_stages);
        spec.gbt_learning_rate = p.value("gbt_learning_rate", spec.gbt_learning_rate);
    }
    return spec;
}

EvalConfig eval_config_from(const CommonOpts& opts) {
    EvalConfig cfg;
    cfg.runs = opts.runs;
    cfg.base_seed = opts.seed;
    cfg.threads = 4;
    return cfg;
}

FeatureRanking rank_features(const PanelDataset& ds) {
    std::vector<std::string> features = ds.feature_names();
    if (features.empty()) raise(errc::bad_spec, "no features left after pruning");
    return f_regression(ds, features, ds.target);
}

Eigen::VectorXd read_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open '" + path + "'");
    std::string line;
    std::vector<double> values;
    int column = -1;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            first = false;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i] == "forecast") column = static_cast<int>(i);
                if (column < 0 && cells[i] == "actual") column = static_cast<int>(i);
            }
            if (column >= 0) continue;  // header consumed
            column = cells.size() > 1 ? 1 : 0;  // headerless: value column
        }
        if (static_cast<int>(cells.size()) <= column) continue;
        try {
            values.push_back(std::stod(cells[column]));
        } catch (const std::exception&) {
            // non-numeric line (e.g. a header when reading headerless)
        }
    }
    if (values.empty()) raise(errc::empty_series, "no numeric values in '" + path + "'");
    return Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
}

// ---- subcommands ----

int cmd_synth(const CommonOpts& opts) {
    PanelDataset ds = generate_synthetic(synthetic_spec(opts));
    std::string csv_path = out_path(opts, "panel.csv");
    write_csv(ds, csv_path);
    std::cout << csv_path << "\n";
    SyntheticSpec spec = synthetic_spec(opts);
    json echo = {{"schema", "sympcast/synth_spec/v1"},
                 {"n_regions", spec.n_regions},
                 {"n_days", spec.n_days},
                 {"n_signals", spec.n_signals},
                 {"planted_weights", spec.planted_weights},
                 {"noise_sigma", spec.noise_sigma},
                 {"ar_coefficient", spec.ar_coefficient},
                 {"seed", spec.seed}};
    emit(opts, "synth_spec.json", echo.dump(2) + "\n");
    return 0;
}

int cmd_ingest(const CommonOpts& opts) {
    if (opts.data_path.empty()) raise(errc::bad_spec, "ingest requires --data");
    std::vector<AuditEntry> audit;
    CommonOpts no_prune_opts = opts;
    no_prune_opts.no_prune = true;
    PanelDataset ds = load_dataset(no_prune_opts, &audit);
    std::string csv_path = out_path(opts, "panel.csv");
    write_csv(ds, csv_path);
    std::cout << csv_path << "\n";
    emit(opts, "audit.jsonl", audit_jsonl(audit));
    return 0;
}

int cmd_prune(const CommonOpts& opts) {
    std::vector<AuditEntry> audit;
    PanelDataset ds = load_dataset(opts, &audit);
    std::string csv_path = out_path(opts, "pruned.csv");
    write_csv(ds, csv_path);
    std::cout << csv_path << "\n";
    emit(opts, "prune_audit.jsonl", audit_jsonl(audit));
    return 0;
}

int cmd_rank(const CommonOpts& opts) {
    PanelDataset ds = load_dataset(opts);
    FeatureRanking ranking = rank_features(ds);
    emit(opts, "ranking.csv", ranking_to_csv(ranking));
    emit(opts, "ranking.json", ranking_to_json(ranking).dump(2) + "\n");
    return 0;
}

int cmd_correlate(const CommonOpts& opts, const std::vector<std::string>& cols,
                  double threshold) {
    PanelDataset ds = load_dataset(opts);
    std::vector<std::string> selected = cols;
    if (selected.empty()) {
        selected = ds.feature_names();
        selected.push_back(ds.target);
    }
    CorrelationReport report = correlation_matrix(ds, selected, threshold);
    emit(opts, "correlation.json", correlation_to_json(report).dump(2) + "\n");
    std::ostringstream flagged;
    flagged << "col_a,col_b,r,p_value\n";
    for (const auto& p : report.pairs)
        if (p.flagged)
            flagged << p.col_a << ',' << p.col_b << ',' << format_numeric(p.r) << ','
                    << format_numeric(p.p_value) << '\n';
    emit(opts, "flagged_pairs.csv", flagged.str());
    return 0;
}

int cmd_predict(const CommonOpts& opts, const ConfigFile& cfg, const std::string& model_name,
                bool sweep, int top_n, int n_min, int n_max, bool plot_data) {
    PanelDataset ds = load_dataset(opts);
    FeatureRanking ranking = rank_features(ds);
    ModelSpec model = model_spec_from(model_name, opts, cfg);
    EvalConfig eval_cfg = eval_config_from(opts);

    if (sweep) {
        SweepReport report = top_n_sweep(ds, ranking, model, eval_cfg, n_min, n_max);
        emit(opts, "sweep.json", sweep_to_json(report).dump(2) + "\n");
        emit(opts, "sweep.csv", sweep_to_csv(report));
        if (plot_data) emit(opts, "fig_error_vs_top_n.csv", sweep_to_csv(report));
    } else {
        if (top_n < 1 || top_n > static_cast<int>(ranking.entries.size()))
            raise(errc::bad_spec, "--top-n out of range 1.." +
                                      std::to_string(ranking.entries.size()));
        RepeatedEval eval = repeated_eval(ds, ranking.top(top_n), model, eval_cfg);
        json j = repeated_eval_to_json(eval);
        j["n_features"] = top_n;
        emit(opts, "predict.json", j.dump(2) + "\n");
    }
    return 0;
}

int cmd_forecast(const CommonOpts& opts, const std::string& model_name,
                 const std::string& region, int horizon, int top_n) {
    PanelDataset ds = load_dataset(opts);
    ForecastModel model;
    if (model_name == "var")
        model = ForecastModel::var;
    else if (model_name == "lstm")
        model = ForecastModel::lstm;
    else
        raise(errc::bad_spec, "unknown model '" + model_name + "', expected {var, lstm}");

    FeatureRanking ranking = rank_features(ds);
    std::vector<std::string> features =
        ranking.top(std::min<std::size_t>(top_n, ranking.entries.size()));

    BacktestConfig cfg;
    cfg.horizon = horizon;
    cfg.lstm.seed = opts.seed;

    std::vector<std::string> regions_to_run;
    if (region.empty())
        regions_to_run = ds.regions();
    else
        regions_to_run.push_back(region);

    for (const auto& r : regions_to_run) {
        std::vector<std::string> all_regions = ds.regions();
        if (std::find(all_regions.begin(), all_regions.end(), r) == all_regions.end())
            raise(errc::unknown_column, "unknown region '" + r + "'");
        ForecastResult result = forecast_backtest(ds, r, features, model, cfg);
        std::vector<int> rows = ds.region_rows(r);
        std::vector<std::string> dates;
        for (std::size_t i = rows.size() - result.horizon; i < rows.size(); ++i)
            dates.push_back(ds.row_date[rows[i]]);
        emit(opts, "forecast_" + r + ".json", forecast_to_json(result, r, dates).dump(2) + "\n");
        emit(opts, "forecast_" + r + ".csv", forecast_to_csv(result, dates));
    }
    return 0;
}

int cmd_ablate(const CommonOpts& opts, const ConfigFile& cfg, const std::string& model_name,
               const std::string& mode, int top_n, const std::string& order, bool plot_data) {
    PanelDataset ds = load_dataset(opts);
    FeatureRanking ranking = rank_features(ds);
    if (top_n > static_cast<int>(ranking.entries.size()))
        raise(errc::bad_spec, "--top exceeds available features");
    std::vector<std::string> features = ranking.top(top_n);
    ModelSpec model = model_spec_from(model_name, opts, cfg);
    EvalConfig eval_cfg = eval_config_from(opts);

    AblationReport report;
    std::string fig_name;
    if (mode == "all-but-one") {
        report = ablate_all_but_one(ds, features, model, eval_cfg);
        fig_name = "fig_all_but_one_mre.csv";
    } else if (mode == "cumulative") {
        DropOrder drop_order = order == "most-first" ? DropOrder::most_first
                                                     : DropOrder::least_first;
        report = ablate_cumulative(ds, features, model, eval_cfg, drop_order);
        fig_name = "fig_cumulative_drop_mre.csv";
    } else {
        raise(errc::bad_spec, "unknown mode '" + mode + "', expected {all-but-one, cumulative}");
    }
    emit(opts, "ablation.json", ablation_to_json(report).dump(2) + "\n");
    emit(opts, "ablation.csv", ablation_to_csv(report));
    if (plot_data) emit(opts, fig_name, ablation_to_csv(report));
    return 0;
}

int cmd_adf(const CommonOpts& opts, const std::string& column) {
    PanelDataset ds = load_dataset(opts);
    std::string col = column.empty() ? ds.target : column;
    json per_region = json::object();
    for (const auto& region : ds.regions()) {
        Eigen::MatrixXd series = ds.region_series(region, {col});
        per_region[region] = adf_to_json(adf_test(series.col(0)));
    }
    json j = {{"schema", "sympcast/adf_panel/v1"}, {"column", col}, {"regions", per_region}};
    emit(opts, "adf.json", j.dump(2) + "\n");
    return 0;
}

int cmd_cluster(const CommonOpts& opts, int k, const std::string& linkage_str, bool full_series) {
    PanelDataset ds = load_dataset(opts);
    Linkage linkage = parse_linkage(linkage_str);
    std::vector<std::string> features = ds.feature_names();

    std::map<std::string, Eigen::VectorXd> profiles;
    for (const auto& region : ds.regions()) {
        Eigen::MatrixXd series = ds.region_series(region, features);
        if (full_series) {
            profiles[region] =
                Eigen::Map<Eigen::VectorXd>(series.data(), series.size()).eval();
        } else {
            profiles[region] = series.colwise().mean().transpose();
        }
    }
    ClusterAssignment assign = agglomerate(profiles, k, linkage);
    emit(opts, "cluster.json", cluster_to_json(assign).dump(2) + "\n");
    return 0;
}

int cmd_dtw(const CommonOpts& opts, const std::string& file_a, const std::string& file_b) {
    Eigen::VectorXd a = read_series_file(file_a);
    Eigen::VectorXd b = read_series_file(file_b);
    DtwResult result = dtw(a, b);
    emit(opts, "dtw.json", dtw_to_json(result).dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sympcast: symptom-survey prevalence prediction and forecasting"};
    app.require_subcommand(1);

    CommonOpts synth_opts, ingest_opts, prune_opts, rank_opts, corr_opts, predict_opts,
        forecast_opts, ablate_opts, adf_opts, cluster_opts, dtw_opts;

    auto* synth = app.add_subcommand("synth", "generate a synthetic panel CSV");
    add_common(synth, synth_opts);

    auto* ingest = app.add_subcommand("ingest", "validate a panel CSV and emit an audit log");
    add_common(ingest, ingest_opts);

    auto* prune = app.add_subcommand("prune", "apply feature pruning rules");
    add_common(prune, prune_opts);
    prune_opts.no_prune = false;

    auto* rank = app.add_subcommand("rank", "univariate F-statistic feature ranking");
    add_common(rank, rank_opts);

    auto* correlate = app.add_subcommand("correlate", "pairwise correlation report");
    add_common(correlate, corr_opts);
    std::vector<std::string> corr_cols;
    double corr_threshold = 0.7;
    correlate->add_option("--cols", corr_cols, "columns to correlate (default: all)");
    correlate->add_option("--threshold", corr_threshold, "|r| highlight threshold");

    auto* predict = app.add_subcommand("predict", "top-n regression evaluation / sweep");
    add_common(predict, predict_opts);
    std::string predict_model = "gbt";
    bool predict_sweep = false, predict_plot = false;
    int predict_top_n = 1, predict_n_min = 1, predict_n_max = 0;
    predict->add_option("--model", predict_model, "regressor: linear, tree, gbt");
    predict->add_flag("--sweep", predict_sweep, "sweep n over the full ranking");
    predict->add_option("--top-n", predict_top_n, "evaluate a single top-n selection");
    predict->add_option("--n-min", predict_n_min, "sweep lower bound");
    predict->add_option("--n-max", predict_n_max, "sweep upper bound (0 = all)");
    predict->add_flag("--plot-data", predict_plot, "emit figure-reproduction CSVs");

    auto* forecast = app.add_subcommand("forecast", "multi-step chronological backtest");
    add_common(forecast, forecast_opts);
    std::string forecast_model = "var", forecast_region;
    int forecast_horizon = 30, forecast_top_n = 3;
    forecast->add_option("--model", forecast_model, "forecaster: var, lstm");
    forecast->add_option("--region", forecast_region, "region id (default: all regions)");
    forecast->add_option("--horizon", forecast_horizon, "forecast horizon in days");
    forecast->add_option("--top-n", forecast_top_n, "ranked features to include");

    auto* ablate = app.add_subcommand("ablate", "feature ablation experiments");
    add_common(ablate, ablate_opts);
    std::string ablate_model = "gbt", ablate_mode = "all-but-one", ablate_order = "least-first";
    int ablate_top = 10;
    bool ablate_plot = false;
    ablate->add_option("--model", ablate_model, "regressor: linear, tree, gbt");
    ablate->add_option("--mode", ablate_mode, "all-but-one or cumulative");
    ablate->add_option("--top", ablate_top, "top-N ranked features to ablate");
    ablate->add_option("--order", ablate_order, "cumulative order: least-first, most-first");
    ablate->add_flag("--plot-data", ablate_plot, "emit figure-reproduction CSVs");

    auto* adf = app.add_subcommand("adf", "per-region stationarity test");
    add_common(adf, adf_opts);
    std::string adf_column;
    adf->add_option("--column", adf_column, "column to test (default: target)");

    auto* cluster = app.add_subcommand("cluster", "agglomerative clustering of regions");
    add_common(cluster, cluster_opts);
    int cluster_k = 2;
    std::string cluster_linkage = "average";
    bool cluster_full = false;
    cluster->add_option("--k", cluster_k, "target cluster count");
    cluster->add_option("--linkage", cluster_linkage, "average, single, complete");
    cluster->add_flag("--full-series", cluster_full, "cluster on flattened series, not means");

    auto* dtw_cmd = app.add_subcommand("dtw", "dynamic time warping distance of two series");
    add_common(dtw_cmd, dtw_opts, /*with_dataset=*/false);
    std::string dtw_a, dtw_b;
    dtw_cmd->add_option("file_a", dtw_a, "forecast CSV or one-value-per-line series")->required();
    dtw_cmd->add_option("file_b", dtw_b, "actual CSV or one-value-per-line series")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*synth) {
            apply_config(synth_opts, load_config(synth_opts));
            return cmd_synth(synth_opts);
        }
        if (*ingest) {
            apply_config(ingest_opts, load_config(ingest_opts));
            return cmd_ingest(ingest_opts);
        }
        if (*prune) {
            apply_config(prune_opts, load_config(prune_opts));
            return cmd_prune(prune_opts);
        }
        if (*rank) {
            apply_config(rank_opts, load_config(rank_opts));
            return cmd_rank(rank_opts);
        }
        if (*correlate) {
            apply_config(corr_opts, load_config(corr_opts));
            return cmd_correlate(corr_opts, corr_cols, corr_threshold);
        }
        if (*predict) {
            ConfigFile cfg = load_config(predict_opts);
            apply_config(predict_opts, cfg);
            return cmd_predict(predict_opts, cfg, predict_model, predict_sweep, predict_top_n,
                               predict_n_min, predict_n_max, predict_plot);
        }
        if (*forecast) {
            apply_config(forecast_opts, load_config(forecast_opts));
            return cmd_forecast(forecast_opts, forecast_model, forecast_region, forecast_horizon,
                                forecast_top_n);
        }
        if (*ablate) {
            ConfigFile cfg = load_config(ablate_opts);
            apply_config(ablate_opts, cfg);
            return cmd_ablate(ablate_opts, cfg, ablate_model, ablate_mode, ablate_top,
                              ablate_order, ablate_plot);
        }
        if (*adf) {
            apply_config(adf_opts, load_config(adf_opts));
            return cmd_adf(adf_opts, adf_column);
        }
        if (*cluster) {
            apply_config(cluster_opts, load_config(cluster_opts));
            return cmd_cluster(cluster_opts, cluster_k, cluster_linkage, cluster_full);
        }
        if (*dtw_cmd) {
            apply_config(dtw_opts, load_config(dtw_opts));
            return cmd_dtw(dtw_opts, dtw_a, dtw_b);
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return errc_is_validation(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
