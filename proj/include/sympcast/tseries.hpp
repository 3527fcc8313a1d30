#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sympcast/common.hpp"

namespace sympcast {

struct AdfResult {
    double statistic = 0.0;
    int lags_used = 0;
    int n_effective = 0;
    double crit_1pct = -3.43;
    double crit_5pct = -2.86;
    double crit_10pct = -2.57;
    bool reject_at_5pct = false;
};

/// ADF regression with constant, no trend; lag order chosen by AIC over
/// 0..max_lag (default: Schwert rule floor(12*(n/100)^(1/4))). Critical
/// values are the MacKinnon large-n constant-only constants.
AdfResult adf_test(const Eigen::VectorXd& y, std::optional<int> max_lag = std::nullopt);

struct VarModel {
    int p = 0;  // lag order
    int k = 0;  // series count
    Eigen::VectorXd intercept;               // k
    std::vector<Eigen::MatrixXd> coefficients;  // p matrices, each k x k
    double aic = 0.0;
};

VarModel var_fit(const Eigen::MatrixXd& Y, int p_max = 7);

struct ForecastResult {
    int horizon = 0;
    Eigen::MatrixXd per_step;  // horizon x k
    int target_column = 0;
    std::optional<Eigen::VectorXd> actuals;
    std::optional<double> mae;
    std::optional<double> mre;
    std::optional<double> dtw_distance;
    std::optional<AdfResult> stationarity_warning;  // set when ADF fails to reject
};

ForecastResult var_forecast(const VarModel& m, const Eigen::MatrixXd& history, int horizon);

struct LstmConfig {
    int hidden_size = 32;
    int window = 14;
    int epochs = 500;
    double step_size = 1e-2;
    std::uint64_t seed = 0;
};

struct LstmModel {
    LstmConfig config;
    int n_features = 0;

    // gate order within the stacked 4H rows: input, forget, cell, output
    Eigen::MatrixXd w_input;   // 4H x k
    Eigen::MatrixXd w_hidden;  // 4H x H
    Eigen::VectorXd bias;      // 4H
    Eigen::MatrixXd w_out;     // k x H
    Eigen::VectorXd b_out;     // k

    Eigen::VectorXd feat_min;  // per-feature normalization, from training data
    Eigen::VectorXd feat_max;

    std::vector<double> epoch_loss;
};

LstmModel lstm_init(const LstmConfig& config, int n_features);
LstmModel lstm_fit(const Eigen::MatrixXd& Y, const LstmConfig& config);
ForecastResult lstm_forecast(const LstmModel& m, const Eigen::MatrixXd& history, int horizon);

/// Gradient container matching LstmModel parameter tensors; used by training
/// and exposed for finite-difference verification.
struct LstmGradients {
    Eigen::MatrixXd w_input, w_hidden, w_out;
    Eigen::VectorXd bias, b_out;
};

/// Full-batch MSE loss and analytic BPTT gradients over sliding windows of
/// the normalized series (rows of Yn in [0,1]).
double lstm_loss_and_gradients(const LstmModel& m, const Eigen::MatrixXd& Yn,
                               LstmGradients* grads);

}  // namespace sympcast
