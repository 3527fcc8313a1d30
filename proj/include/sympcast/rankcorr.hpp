#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sympcast/panel.hpp"

namespace sympcast {

struct RankingEntry {
    std::string name;
    double f_stat = 0.0;
    int rank = 0;  // 1-based
    bool perfect_fit = false;
    bool constant = false;
};

struct FeatureRanking {
    std::vector<RankingEntry> entries;  // sorted by f_stat descending, ties by name

    std::vector<std::string> top(std::size_t n) const;
};

struct CorrelationPair {
    std::string col_a;
    std::string col_b;
    double r = 0.0;
    double p_value = 1.0;
    bool defined = true;
    bool flagged = false;
};

struct CorrelationReport {
    std::vector<std::string> names;
    Eigen::MatrixXd matrix;  // symmetric, unit diagonal; NaN where undefined
    std::vector<CorrelationPair> pairs;
    std::size_t n = 0;  // complete-row sample count
};

// Finite stand-in for F at |r| = 1.
inline constexpr double kPerfectFitF = 1e308;

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

double pearson_p_value(double r, std::size_t n);

CorrelationReport correlation_matrix(const PanelDataset& ds,
                                     const std::vector<std::string>& cols,
                                     double highlight_threshold = 0.7);

FeatureRanking f_regression(const PanelDataset& ds,
                            const std::vector<std::string>& features,
                            const std::string& target);

}  // namespace sympcast
