#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sympcast/panel.hpp"
#include "sympcast/rankcorr.hpp"
#include "sympcast/regress.hpp"
#include "sympcast/tseries.hpp"

namespace sympcast {

struct EvalMetrics {
    double mae = 0.0;
    double mre_percent = 0.0;
    std::size_t n = 0;
};

double mae(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual);

/// Mean relative error in percent: 100/n * sum |pred-actual| / (actual+1).
/// Sets *negative_actual when the percent-domain assumption actual >= 0 is
/// broken; the value is still computed.
double mre(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual,
           bool* negative_actual = nullptr);

struct RepeatedEval {
    std::vector<EvalMetrics> runs;
    double mean_mae = 0.0;
    double mean_mre = 0.0;
    double mre_ci_low = 0.0;
    double mre_ci_high = 0.0;
    bool degenerate_ci = false;  // runs == 1
    std::uint64_t base_seed = 0;
};

struct EvalConfig {
    int runs = 20;
    std::uint64_t base_seed = 0;
    double train_fraction = 0.8;
    bool normal_ci = false;  // normal approximation instead of Student-t
    int threads = 1;
};

RepeatedEval repeated_eval(const PanelDataset& ds, const std::vector<std::string>& features,
                           const ModelSpec& model_spec, const EvalConfig& config);

struct SweepEntry {
    int n_features = 0;
    RepeatedEval eval;
};

struct SweepReport {
    std::vector<SweepEntry> per_n;
    int best_n = 0;  // argmin mean MRE, ties toward smaller n
};

SweepReport top_n_sweep(const PanelDataset& ds, const FeatureRanking& ranking,
                        const ModelSpec& model_spec, const EvalConfig& config,
                        int n_min = 1, int n_max = 0 /* 0 = ranking size */);

enum class AblationMode { all_but_one, cumulative };
enum class DropOrder { least_first, most_first };

struct AblationStep {
    std::vector<std::string> dropped;
    RepeatedEval eval;
};

struct AblationReport {
    AblationMode mode = AblationMode::all_but_one;
    RepeatedEval baseline;  // all N features
    std::vector<AblationStep> steps;
};

AblationReport ablate_all_but_one(const PanelDataset& ds,
                                  const std::vector<std::string>& top_features,
                                  const ModelSpec& model_spec, const EvalConfig& config);

AblationReport ablate_cumulative(const PanelDataset& ds,
                                 const std::vector<std::string>& top_features,
                                 const ModelSpec& model_spec, const EvalConfig& config,
                                 DropOrder order = DropOrder::least_first);

enum class ForecastModel { var, lstm };

struct BacktestConfig {
    int horizon = 30;
    int var_p_max = 7;
    LstmConfig lstm;
};

/// Chronological backtest of one region: hold out the last `horizon` days,
/// fit VAR or LSTM on the rest of (features..., target), roll the forecast
/// out, and score the target column. An ADF failure to reject on the
/// training target is attached as a warning.
ForecastResult forecast_backtest(const PanelDataset& ds, const std::string& region,
                                 const std::vector<std::string>& features,
                                 ForecastModel model, const BacktestConfig& config);

}  // namespace sympcast
