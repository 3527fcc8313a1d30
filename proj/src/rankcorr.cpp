#include "sympcast/rankcorr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sympcast {

std::vector<std::string> FeatureRanking::top(std::size_t n) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < entries.size() && i < n; ++i) out.push_back(entries[i].name);
    return out;
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) raise(errc::shape_mismatch, "pearson inputs differ in length");
    Eigen::Index n = x.size();
    if (n < 2) raise(errc::degenerate_sample, "pearson needs n >= 2");
    double mx = x.mean(), my = y.mean();
    Eigen::VectorXd dx = x.array() - mx;
    Eigen::VectorXd dy = y.array() - my;
    double sxx = dx.squaredNorm(), syy = dy.squaredNorm();
    if (sxx == 0.0 || syy == 0.0)
        raise(errc::constant_input, sxx == 0.0 ? "x is constant" : "y is constant");
    double r = dx.dot(dy) / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

double pearson_p_value(double r, std::size_t n) {
    if (n < 3) raise(errc::degenerate_sample, "p-value needs n >= 3");
    if (std::fabs(r) > 1.0) raise(errc::bad_spec, "|r| must be <= 1");
    if (std::fabs(r) >= 1.0) return 0.0;
    double df = static_cast<double>(n - 2);
    double t = r * std::sqrt(df / (1.0 - r * r));
    return student_t_two_sided_p(t, df);
}

namespace {

std::vector<int> complete_rows(const PanelDataset& ds, const std::vector<int>& cols) {
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

Eigen::VectorXd gather(const PanelDataset& ds, const std::vector<int>& rows, int col) {
    Eigen::VectorXd v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v(i) = ds.values(rows[i], col);
    return v;
}

}  // namespace

CorrelationReport correlation_matrix(const PanelDataset& ds,
                                     const std::vector<std::string>& cols,
                                     double highlight_threshold) {
    std::vector<int> indices;
    for (const auto& name : cols) indices.push_back(ds.require_col(name));
    std::vector<int> rows = complete_rows(ds, indices);
    if (rows.size() < 2) raise(errc::degenerate_sample, "need >= 2 complete rows");

    std::size_t k = cols.size();
    CorrelationReport report;
    report.names = cols;
    report.n = rows.size();
    report.matrix = Eigen::MatrixXd::Constant(k, k, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t a = 0; a < k; ++a) report.matrix(a, a) = 1.0;

    for (std::size_t a = 0; a < k; ++a) {
        Eigen::VectorXd va = gather(ds, rows, indices[a]);
        for (std::size_t b = a + 1; b < k; ++b) {
            Eigen::VectorXd vb = gather(ds, rows, indices[b]);
            CorrelationPair pair;
            pair.col_a = cols[a];
            pair.col_b = cols[b];
            try {
                pair.r = pearson(va, vb);
                pair.p_value = rows.size() >= 3 ? pearson_p_value(pair.r, rows.size()) : 1.0;
                pair.flagged = std::fabs(pair.r) >= highlight_threshold;
                report.matrix(a, b) = report.matrix(b, a) = pair.r;
            } catch (const Error& e) {
                if (e.code() != errc::constant_input) throw;
                pair.defined = false;
            }
            report.pairs.push_back(pair);
        }
    }
    return report;
}

FeatureRanking f_regression(const PanelDataset& ds,
                            const std::vector<std::string>& features,
                            const std::string& target) {
    int target_col = ds.require_col(target);
    std::vector<int> feature_cols;
    for (const auto& name : features) feature_cols.push_back(ds.require_col(name));

    FeatureRanking ranking;
    for (std::size_t j = 0; j < features.size(); ++j) {
        std::vector<int> rows = complete_rows(ds, {feature_cols[j], target_col});
        if (rows.size() < 3)
            raise(errc::degenerate_sample, "feature '" + features[j] + "' has < 3 complete rows");
        Eigen::VectorXd x = gather(ds, rows, feature_cols[j]);
        Eigen::VectorXd y = gather(ds, rows, target_col);
        RankingEntry entry;
        entry.name = features[j];
        try {
            double r = pearson(x, y);
            double r2 = r * r;
            if (r2 >= 1.0) {
                entry.f_stat = kPerfectFitF;
                entry.perfect_fit = true;
            } else {
                entry.f_stat = r2 / (1.0 - r2) * static_cast<double>(rows.size() - 2);
            }
        } catch (const Error& e) {
            if (e.code() != errc::constant_input) throw;
            entry.f_stat = 0.0;
            entry.constant = true;
        }
        ranking.entries.push_back(entry);
    }

    std::sort(ranking.entries.begin(), ranking.entries.end(),
              [](const RankingEntry& a, const RankingEntry& b) {
                  if (a.f_stat != b.f_stat) return a.f_stat > b.f_stat;
                  return a.name < b.name;
              });
    for (std::size_t i = 0; i < ranking.entries.size(); ++i)
        ranking.entries[i].rank = static_cast<int>(i) + 1;
    return ranking;
}

}  // namespace sympcast
