#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sympcast/evalharness.hpp"
#include "sympcast/shapecluster.hpp"

namespace sympcast {

nlohmann::json ranking_to_json(const FeatureRanking& ranking);
nlohmann::json correlation_to_json(const CorrelationReport& report);
nlohmann::json repeated_eval_to_json(const RepeatedEval& eval);
nlohmann::json sweep_to_json(const SweepReport& report);
nlohmann::json ablation_to_json(const AblationReport& report);
nlohmann::json adf_to_json(const AdfResult& result);
nlohmann::json forecast_to_json(const ForecastResult& result, const std::string& region,
                                const std::vector<std::string>& dates);
nlohmann::json cluster_to_json(const ClusterAssignment& assign);
nlohmann::json dtw_to_json(const DtwResult& result);

/// Appendix-table layout: header `rank,signal,f_statistic`.
std::string ranking_to_csv(const FeatureRanking& ranking);

/// Plot-ready trajectory: header `n_or_step,mean_mre,ci_low,ci_high`.
std::string sweep_to_csv(const SweepReport& report);
std::string ablation_to_csv(const AblationReport& report);

/// Plot-ready overlay: header `date,actual,forecast` for the target column.
std::string forecast_to_csv(const ForecastResult& result, const std::vector<std::string>& dates);

/// Writes via a temp file + rename so concurrent writers never interleave.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace sympcast
