#include "sympcast/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "sympcast/shapecluster.hpp"

namespace sympcast {

double mae(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual) {
    if (pred.size() != actual.size()) raise(errc::shape_mismatch, "mae length mismatch");
    if (pred.size() == 0) raise(errc::empty_input, "mae on empty vectors");
    return (pred - actual).cwiseAbs().mean();
}

double mre(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual, bool* negative_actual) {
    if (pred.size() != actual.size()) raise(errc::shape_mismatch, "mre length mismatch");
    if (pred.size() == 0) raise(errc::empty_input, "mre on empty vectors");
    if (negative_actual) *negative_actual = (actual.array() < 0.0).any();
    return 100.0 * ((pred - actual).array().abs() / (actual.array() + 1.0)).abs().mean();
}

namespace {

// rows complete in every selected feature and the target; no imputation
std::vector<int> modeling_rows(const PanelDataset& ds, const std::vector<int>& cols) {
    std::vector<int> rows;
    for (Eigen::Index i = 0; i < ds.values.rows(); ++i) {
        bool ok = true;
        for (int c : cols)
            if (std::isnan(ds.values(i, c))) {
                ok = false;
                break;
            }
        if (ok) rows.push_back(static_cast<int>(i));
    }
    return rows;
}

void design_from(const PanelDataset& ds, const std::vector<int>& feature_cols, int target_col,
                 Eigen::MatrixXd* X, Eigen::VectorXd* y) {
    X->resize(ds.values.rows(), feature_cols.size());
    y->resize(ds.values.rows());
    for (std::size_t j = 0; j < feature_cols.size(); ++j) X->col(j) = ds.values.col(feature_cols[j]);
    *y = ds.values.col(target_col);
}

EvalMetrics one_run(const PanelDataset& modeling_ds, const std::vector<int>& feature_cols,
                    int target_col, const ModelSpec& model_spec, double train_fraction,
                    std::uint64_t seed) {
    SplitSpec split_spec;
    split_spec.mode = SplitMode::random_row;
    split_spec.train_fraction = train_fraction;
    split_spec.seed = seed;
    auto [train, test] = split(modeling_ds, split_spec);

    Eigen::MatrixXd x_train, x_test;
    Eigen::VectorXd y_train, y_test;
    design_from(train, feature_cols, target_col, &x_train, &y_train);
    design_from(test, feature_cols, target_col, &x_test, &y_test);

    FittedModel model = fit(model_spec, x_train, y_train);
    Eigen::VectorXd pred = model.predict(x_test);

    EvalMetrics metrics;
    metrics.mae = mae(pred, y_test);
    metrics.mre_percent = mre(pred, y_test);
    metrics.n = static_cast<std::size_t>(y_test.size());
    return metrics;
}

void finish_repeated(RepeatedEval& out, bool normal_ci) {
    std::size_t runs = out.runs.size();
    double sum_mae = 0.0, sum_mre = 0.0;
    for (const auto& r : out.runs) {
        sum_mae += r.mae;
        sum_mre += r.mre_percent;
    }
    out.mean_mae = sum_mae / runs;
    out.mean_mre = sum_mre / runs;
    if (runs < 2) {
        out.degenerate_ci = true;
        out.mre_ci_low = out.mre_ci_high = out.mean_mre;
        return;
    }
    double ss = 0.0;
    for (const auto& r : out.runs) ss += (r.mre_percent - out.mean_mre) * (r.mre_percent - out.mean_mre);
    double sd = std::sqrt(ss / (runs - 1));
    double crit = normal_ci ? 1.959963984540054
                            : student_t_quantile(0.975, static_cast<double>(runs - 1));
    double half = crit * sd / std::sqrt(static_cast<double>(runs));
    out.mre_ci_low = out.mean_mre - half;
    out.mre_ci_high = out.mean_mre + half;
}

}  // namespace

RepeatedEval repeated_eval(const PanelDataset& ds, const std::vector<std::string>& features,
                           const ModelSpec& model_spec, const EvalConfig& config) {
    if (config.runs < 1) raise(errc::bad_spec, "runs must be >= 1");
    if (features.empty()) raise(errc::bad_spec, "no features selected");

    std::vector<int> raw_cols;
    for (const auto& f : features) raw_cols.push_back(ds.require_col(f));
    int raw_target = ds.target_index();
    std::vector<int> all_cols = raw_cols;
    all_cols.push_back(raw_target);
    PanelDataset modeling_ds = ds.select_rows(modeling_rows(ds, all_cols));
    if (modeling_ds.n_rows() < 2) raise(errc::insufficient_rows, "too few complete rows");

    std::vector<int> feature_cols;
    for (const auto& f : features) feature_cols.push_back(modeling_ds.require_col(f));
    int target_col = modeling_ds.target_index();

    RepeatedEval out;
    out.base_seed = config.base_seed;
    out.runs.resize(config.runs);

    int n_threads = thread_budget(std::min(config.threads, config.runs));
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            try {
                out.runs[i] = one_run(modeling_ds, feature_cols, target_col, model_spec,
                                      config.train_fraction, config.base_seed + i);
            } catch (const Error& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::make_exception_ptr(
                        Error(e.code(), std::string(e.what()) + " (run " + std::to_string(i) + ")"));
                return;
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    if (n_threads <= 1) {
        worker(0, config.runs);
    } else {
        std::vector<std::thread> pool;
        int chunk = (config.runs + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back(worker, t * chunk, std::min(config.runs, (t + 1) * chunk));
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    finish_repeated(out, config.normal_ci);
    return out;
}

SweepReport top_n_sweep(const PanelDataset& ds, const FeatureRanking& ranking,
                        const ModelSpec& model_spec, const EvalConfig& config, int n_min,
                        int n_max) {
    if (ranking.entries.empty()) raise(errc::bad_spec, "empty ranking");
    int k = static_cast<int>(ranking.entries.size());
    if (n_max <= 0) n_max = k;
    n_max = std::min(n_max, k);
    n_min = std::max(n_min, 1);
    if (n_min > n_max) raise(errc::bad_spec, "empty sweep range");

    SweepReport report;
    for (int n = n_min; n <= n_max; ++n) {
        SweepEntry entry;
        entry.n_features = n;
        entry.eval = repeated_eval(ds, ranking.top(n), model_spec, config);
        report.per_n.push_back(std::move(entry));
    }
    report.best_n = report.per_n[0].n_features;
    double best = report.per_n[0].eval.mean_mre;
    for (const auto& entry : report.per_n)
        if (entry.eval.mean_mre < best) {
            best = entry.eval.mean_mre;
            report.best_n = entry.n_features;
        }
    return report;
}

AblationReport ablate_all_but_one(const PanelDataset& ds,
                                  const std::vector<std::string>& top_features,
                                  const ModelSpec& model_spec, const EvalConfig& config) {
    if (top_features.size() < 2) raise(errc::bad_spec, "all-but-one needs N >= 2 features");
    AblationReport report;
    report.mode = AblationMode::all_but_one;
    report.baseline = repeated_eval(ds, top_features, model_spec, config);
    for (std::size_t drop = 0; drop < top_features.size(); ++drop) {
        std::vector<std::string> remaining;
        for (std::size_t j = 0; j < top_features.size(); ++j)
            if (j != drop) remaining.push_back(top_features[j]);
        AblationStep step;
        step.dropped = {top_features[drop]};
        step.eval = repeated_eval(ds, remaining, model_spec, config);
        report.steps.push_back(std::move(step));
    }
    return report;
}

AblationReport ablate_cumulative(const PanelDataset& ds,
                                 const std::vector<std::string>& top_features,
                                 const ModelSpec& model_spec, const EvalConfig& config,
                                 DropOrder order) {
    std::size_t n = top_features.size();
    if (n < 2) raise(errc::bad_spec, "cumulative drop needs N >= 2 features");
    AblationReport report;
    report.mode = AblationMode::cumulative;
    report.baseline = repeated_eval(ds, top_features, model_spec, config);

    // drop sequence: least_first walks up from the bottom of the ranking
    std::vector<std::string> drop_sequence = top_features;
    if (order == DropOrder::least_first) std::reverse(drop_sequence.begin(), drop_sequence.end());

    for (std::size_t i = 1; i <= n - 1; ++i) {
        std::vector<std::string> dropped(drop_sequence.begin(), drop_sequence.begin() + i);
        std::vector<std::string> remaining;
        for (const auto& f : top_features)
            if (std::find(dropped.begin(), dropped.end(), f) == dropped.end())
                remaining.push_back(f);
        AblationStep step;
        step.dropped = dropped;
        step.eval = repeated_eval(ds, remaining, model_spec, config);
        report.steps.push_back(std::move(step));
    }
    return report;
}

ForecastResult forecast_backtest(const PanelDataset& ds, const std::string& region,
                                 const std::vector<std::string>& features, ForecastModel model,
                                 const BacktestConfig& config) {
    std::vector<std::string> regions = ds.regions();
    if (std::find(regions.begin(), regions.end(), region) == regions.end())
        raise(errc::unknown_column, "unknown region '" + region + "'");
    if (config.horizon < 0) raise(errc::bad_spec, "horizon must be nonnegative");

    std::vector<std::string> cols = features;
    cols.erase(std::remove(cols.begin(), cols.end(), ds.target), cols.end());
    cols.push_back(ds.target);
    int target_idx = static_cast<int>(cols.size()) - 1;

    Eigen::MatrixXd series = ds.region_series(region, cols);
    if (!series.allFinite())
        raise(errc::bad_spec, "region series has missing cells in the selected columns");
    if (series.rows() <= config.horizon)
        raise(errc::insufficient_rows, "region series not longer than horizon");

    int t_train = static_cast<int>(series.rows()) - config.horizon;
    Eigen::MatrixXd train = series.topRows(t_train);
    Eigen::VectorXd actual_target = series.col(target_idx).tail(config.horizon);

    ForecastResult result;
    if (config.horizon == 0) {
        result.horizon = 0;
        result.per_step.resize(0, cols.size());
        result.target_column = target_idx;
        return result;  // metrics undefined, left unset
    }

    if (model == ForecastModel::var) {
        VarModel var = var_fit(train, config.var_p_max);
        result = var_forecast(var, train, config.horizon);
    } else {
        LstmModel lstm = lstm_fit(train, config.lstm);
        result = lstm_forecast(lstm, train, config.horizon);
    }
    result.target_column = target_idx;
    result.actuals = actual_target;

    // percentage targets are reported clipped to [0,100]; model output itself
    // is left untouched elsewhere
    Eigen::VectorXd pred_target = result.per_step.col(target_idx);
    int col = ds.col_index(ds.target);
    if (col >= 0 && ds.columns[col].units == Units::percent)
        pred_target = pred_target.cwiseMax(0.0).cwiseMin(100.0);
    result.mae = mae(pred_target, actual_target);
    result.mre = mre(pred_target, actual_target);
    result.dtw_distance = dtw(pred_target, actual_target).distance;

    try {
        AdfResult adf = adf_test(train.col(target_idx));
        if (!adf.reject_at_5pct) result.stationarity_warning = adf;
    } catch (const Error&) {
        // series too short or constant: no stationarity verdict attached
    }
    return result;
}

}  // namespace sympcast
