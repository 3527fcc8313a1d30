#include "sympcast/reports.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sympcast {

namespace {

nlohmann::json metrics_to_json(const EvalMetrics& m) {
    return {{"mae", m.mae}, {"mre_percent", m.mre_percent}, {"n", m.n}};
}

nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

nlohmann::json ranking_to_json(const FeatureRanking& ranking) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : ranking.entries) {
        nlohmann::json entry = {{"rank", e.rank}, {"signal", e.name}, {"f_statistic", e.f_stat}};
        if (e.perfect_fit) entry["warning"] = "perfect fit";
        if (e.constant) entry["warning"] = "constant feature";
        entries.push_back(entry);
    }
    return {{"schema", "sympcast/ranking/v1"}, {"entries", entries}};
}

nlohmann::json correlation_to_json(const CorrelationReport& report) {
    nlohmann::json matrix = nlohmann::json::array();
    for (Eigen::Index i = 0; i < report.matrix.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < report.matrix.cols(); ++j)
            row.push_back(std::isnan(report.matrix(i, j)) ? nlohmann::json(nullptr)
                                                          : nlohmann::json(report.matrix(i, j)));
        matrix.push_back(row);
    }
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : report.pairs)
        pairs.push_back({{"col_a", p.col_a},
                         {"col_b", p.col_b},
                         {"r", p.defined ? nlohmann::json(p.r) : nlohmann::json(nullptr)},
                         {"p_value", p.defined ? nlohmann::json(p.p_value) : nlohmann::json(nullptr)},
                         {"flagged", p.flagged}});
    return {{"schema", "sympcast/correlation/v1"},
            {"columns", report.names},
            {"n", report.n},
            {"matrix", matrix},
            {"pairs", pairs}};
}

nlohmann::json repeated_eval_to_json(const RepeatedEval& eval) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : eval.runs) runs.push_back(metrics_to_json(r));
    return {{"schema", "sympcast/repeated_eval/v1"},
            {"runs", runs},
            {"mean_mae", eval.mean_mae},
            {"mean_mre", eval.mean_mre},
            {"mre_ci_95", {eval.mre_ci_low, eval.mre_ci_high}},
            {"degenerate_ci", eval.degenerate_ci},
            {"base_seed", eval.base_seed}};
}

nlohmann::json sweep_to_json(const SweepReport& report) {
    nlohmann::json per_n = nlohmann::json::array();
    for (const auto& e : report.per_n)
        per_n.push_back({{"n", e.n_features}, {"eval", repeated_eval_to_json(e.eval)}});
    return {{"schema", "sympcast/sweep/v1"}, {"per_n", per_n}, {"best_n", report.best_n}};
}

nlohmann::json ablation_to_json(const AblationReport& report) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : report.steps)
        steps.push_back({{"dropped", s.dropped}, {"eval", repeated_eval_to_json(s.eval)}});
    return {{"schema", "sympcast/ablation/v1"},
            {"mode", report.mode == AblationMode::all_but_one ? "all_but_one" : "cumulative"},
            {"baseline", repeated_eval_to_json(report.baseline)},
            {"steps", steps}};
}

nlohmann::json adf_to_json(const AdfResult& result) {
    return {{"schema", "sympcast/adf/v1"},
            {"statistic", result.statistic},
            {"lags_used", result.lags_used},
            {"n_effective", result.n_effective},
            {"critical_values",
             {{"1%", result.crit_1pct}, {"5%", result.crit_5pct}, {"10%", result.crit_10pct}}},
            {"reject_at_5pct", result.reject_at_5pct}};
}

nlohmann::json forecast_to_json(const ForecastResult& result, const std::string& region,
                                const std::vector<std::string>& dates) {
    nlohmann::json per_step = nlohmann::json::array();
    for (Eigen::Index i = 0; i < result.per_step.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < result.per_step.cols(); ++j)
            row.push_back(result.per_step(i, j));
        per_step.push_back(row);
    }
    nlohmann::json j = {{"schema", "sympcast/forecast/v1"},
                        {"region", region},
                        {"horizon", result.horizon},
                        {"target_column", result.target_column},
                        {"per_step", per_step},
                        {"mae", result.mae ? finite_or_null(*result.mae) : nlohmann::json(nullptr)},
                        {"mre", result.mre ? finite_or_null(*result.mre) : nlohmann::json(nullptr)},
                        {"dtw_distance", result.dtw_distance
                                             ? finite_or_null(*result.dtw_distance)
                                             : nlohmann::json(nullptr)}};
    if (result.actuals) {
        nlohmann::json actuals = nlohmann::json::array();
        for (Eigen::Index i = 0; i < result.actuals->size(); ++i)
            actuals.push_back((*result.actuals)(i));
        j["actuals"] = actuals;
    }
    if (!dates.empty()) j["dates"] = dates;
    if (result.stationarity_warning)
        j["stationarity_warning"] = adf_to_json(*result.stationarity_warning);
    return j;
}

nlohmann::json cluster_to_json(const ClusterAssignment& assign) {
    nlohmann::json labels = nlohmann::json::object();
    for (std::size_t i = 0; i < assign.items.size(); ++i)
        labels[assign.items[i]] = assign.labels[i];
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& m : assign.linkage_trace)
        trace.push_back({{"a", m.rep_a}, {"b", m.rep_b}, {"distance", m.distance}});
    return {{"schema", "sympcast/cluster/v1"}, {"k", assign.k}, {"labels", labels}, {"trace", trace}};
}

nlohmann::json dtw_to_json(const DtwResult& result) {
    nlohmann::json path = nlohmann::json::array();
    for (const auto& [i, j] : result.path) path.push_back({i, j});
    return {{"schema", "sympcast/dtw/v1"}, {"distance", result.distance}, {"path", path}};
}

std::string ranking_to_csv(const FeatureRanking& ranking) {
    std::ostringstream out;
    out << "rank,signal,f_statistic\n";
    for (const auto& e : ranking.entries)
        out << e.rank << ',' << e.name << ',' << format_numeric(e.f_stat) << '\n';
    return out.str();
}

namespace {

std::string trajectory_csv(const std::vector<std::pair<std::string, const RepeatedEval*>>& rows) {
    std::ostringstream out;
    out << "n_or_step,mean_mre,ci_low,ci_high\n";
    for (const auto& [label, eval] : rows)
        out << label << ',' << format_numeric(eval->mean_mre) << ','
            << format_numeric(eval->mre_ci_low) << ',' << format_numeric(eval->mre_ci_high) << '\n';
    return out.str();
}

}  // namespace

std::string sweep_to_csv(const SweepReport& report) {
    std::vector<std::pair<std::string, const RepeatedEval*>> rows;
    for (const auto& e : report.per_n) rows.push_back({std::to_string(e.n_features), &e.eval});
    return trajectory_csv(rows);
}

std::string ablation_to_csv(const AblationReport& report) {
    std::vector<std::pair<std::string, const RepeatedEval*>> rows;
    rows.push_back({"0", &report.baseline});
    for (std::size_t i = 0; i < report.steps.size(); ++i)
        rows.push_back({std::to_string(i + 1), &report.steps[i].eval});
    return trajectory_csv(rows);
}

std::string forecast_to_csv(const ForecastResult& result, const std::vector<std::string>& dates) {
    std::ostringstream out;
    out << "date,actual,forecast\n";
    for (Eigen::Index i = 0; i < result.per_step.rows(); ++i) {
        out << (i < static_cast<Eigen::Index>(dates.size()) ? dates[i] : std::to_string(i)) << ',';
        if (result.actuals && i < result.actuals->size())
            out << format_numeric((*result.actuals)(i));
        out << ',' << format_numeric(result.per_step(i, result.target_column)) << '\n';
    }
    return out.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) raise(errc::io_error, "cannot write '" + tmp + "'");
        out << contents;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        raise(errc::io_error, "cannot move report into place at '" + path + "'");
}

}  // namespace sympcast
