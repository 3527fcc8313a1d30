#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sympcast/common.hpp"

namespace sympcast {

enum class ColumnKind {
    demographic,
    weighted_signal,
    unweighted_signal,
    testing_related,
    derived,
    mean_scale,
    target,
    other,
};

enum class Units { percent, count, unitless };

const char* column_kind_name(ColumnKind kind);
const char* units_name(Units units);

struct ColumnMeta {
    std::string name;
    ColumnKind kind = ColumnKind::other;
    Units units = Units::unitless;
};

/// Region x date x signal panel stored as a flat row table. Each row is one
/// (region, date) observation; missing cells are NaN. Rows of a region are
/// kept in strictly increasing date order.
class PanelDataset {
public:
    std::vector<ColumnMeta> columns;
    std::vector<std::string> row_region;  // one entry per row
    std::vector<std::string> row_date;    // ISO-8601, one entry per row
    Eigen::MatrixXd values;               // n_rows x n_columns
    std::string target;

    std::size_t n_rows() const { return row_region.size(); }
    std::size_t n_cols() const { return columns.size(); }

    int col_index(const std::string& name) const;       // -1 if absent
    int require_col(const std::string& name) const;     // throws UnknownColumn
    int target_index() const { return require_col(target); }

    std::vector<std::string> regions() const;           // distinct, first-seen order
    std::vector<int> region_rows(const std::string& region) const;

    Eigen::VectorXd column(int index) const { return values.col(index); }

    /// Feature column names: everything except the target.
    std::vector<std::string> feature_names() const;

    /// Per-region time-ordered matrix over the named columns.
    Eigen::MatrixXd region_series(const std::string& region,
                                  const std::vector<std::string>& cols) const;

    PanelDataset select_rows(const std::vector<int>& rows) const;
    PanelDataset select_columns(const std::vector<std::string>& keep) const;

    /// Enforces the structural invariants; throws on violation.
    void validate() const;
};

struct SchemaConfig {
    std::string region_column = "region";
    std::string date_column = "date";
    std::string target;
    std::vector<std::string> demographic;
    std::vector<std::string> testing_related;
    std::vector<std::string> derived;
    std::string weighted_suffix = "_weighted";
    std::string unweighted_suffix = "_unweighted";
    double magnitude_threshold = 1e6;
};

struct AuditEntry {
    std::string subject;  // column name or "row <i>"
    std::string reason;
};

enum class SplitMode { random_row, chronological_tail };

struct SplitSpec {
    SplitMode mode = SplitMode::random_row;
    double train_fraction = 0.8;
    int horizon = 30;
    std::uint64_t seed = 0;
};

struct SyntheticSpec {
    int n_regions = 4;
    int n_days = 150;
    int n_signals = 6;
    std::vector<double> planted_weights = {5.0, 1.0, 0.1};
    double noise_sigma = 0.01;
    double ar_coefficient = 0.7;
    std::uint64_t seed = 0;
};

struct PruneConfig {
    std::string weighted_suffix = "_weighted";
    std::string unweighted_suffix = "_unweighted";
    double magnitude_threshold = 1e6;
};

PanelDataset ingest_csv(const std::string& path, const SchemaConfig& schema,
                        std::vector<AuditEntry>* audit = nullptr);

void write_csv(const PanelDataset& ds, const std::string& path);

std::pair<PanelDataset, std::vector<AuditEntry>> prune_features(const PanelDataset& ds,
                                                                const PruneConfig& rules);

std::pair<PanelDataset, PanelDataset> split(const PanelDataset& ds, const SplitSpec& spec);

PanelDataset generate_synthetic(const SyntheticSpec& spec);

/// Keep rows whose cell in `column` equals `value` (string compare for the
/// region/date axes, numeric compare for signal columns).
PanelDataset group_filter(const PanelDataset& ds, const std::string& column,
                          const std::string& value);

SchemaConfig load_schema_config(const std::string& path);

bool parse_iso_date(const std::string& text, int* day_ordinal);

}  // namespace sympcast
