#include "sympcast/panel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sympcast {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const char* column_kind_name(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::demographic: return "demographic";
        case ColumnKind::weighted_signal: return "weighted_signal";
        case ColumnKind::unweighted_signal: return "unweighted_signal";
        case ColumnKind::testing_related: return "testing_related";
        case ColumnKind::derived: return "derived";
        case ColumnKind::mean_scale: return "mean_scale";
        case ColumnKind::target: return "target";
        case ColumnKind::other: return "other";
    }
    return "other";
}

const char* units_name(Units units) {
    switch (units) {
        case Units::percent: return "percent";
        case Units::count: return "count";
        case Units::unitless: return "unitless";
    }
    return "unitless";
}

bool parse_iso_date(const std::string& text, int* day_ordinal) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (text[i] < '0' || text[i] > '9') return false;
    int y = std::stoi(text.substr(0, 4));
    int m = std::stoi(text.substr(5, 2));
    int d = std::stoi(text.substr(8, 2));
    if (m < 1 || m > 12 || d < 1) return false;
    static const int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    int dmax = mdays[m - 1] + (m == 2 && leap ? 1 : 0);
    if (d > dmax) return false;
    if (day_ordinal) {
        // days since 1970-01-01 (Howard Hinnant's civil-days algorithm)
        int yy = y - (m <= 2);
        int era = (yy >= 0 ? yy : yy - 399) / 400;
        unsigned yoe = static_cast<unsigned>(yy - era * 400);
        unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
        unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        *day_ordinal = era * 146097 + static_cast<int>(doe) - 719468;
    }
    return true;
}

std::string ordinal_to_iso(int days) {
    int z = days + 719468;
    int era = (z >= 0 ? z : z - 146096) / 146097;
    unsigned doe = static_cast<unsigned>(z - era * 146097);
    unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    int y = static_cast<int>(yoe) + era * 400;
    unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    unsigned mp = (5 * doy + 2) / 153;
    unsigned d = doy - (153 * mp + 2) / 5 + 1;
    unsigned m = mp + (mp < 10 ? 3 : -9);
    y += (m <= 2);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
    return buf;
}

int PanelDataset::col_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return static_cast<int>(i);
    return -1;
}

int PanelDataset::require_col(const std::string& name) const {
    int idx = col_index(name);
    if (idx < 0) raise(errc::unknown_column, "column '" + name + "' not in dataset");
    return idx;
}

std::vector<std::string> PanelDataset::regions() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& r : row_region)
        if (seen.insert(r).second) out.push_back(r);
    return out;
}

std::vector<int> PanelDataset::region_rows(const std::string& region) const {
    std::vector<int> rows;
    for (std::size_t i = 0; i < row_region.size(); ++i)
        if (row_region[i] == region) rows.push_back(static_cast<int>(i));
    return rows;
}

std::vector<std::string> PanelDataset::feature_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns)
        if (c.name != target) out.push_back(c.name);
    return out;
}

Eigen::MatrixXd PanelDataset::region_series(const std::string& region,
                                            const std::vector<std::string>& cols) const {
    std::vector<int> rows = region_rows(region);
    if (rows.empty()) raise(errc::unknown_column, "region '" + region + "' not in dataset");
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        int c = require_col(cols[j]);
        for (std::size_t i = 0; i < rows.size(); ++i) out(i, j) = values(rows[i], c);
    }
    return out;
}

PanelDataset PanelDataset::select_rows(const std::vector<int>& rows) const {
    PanelDataset out;
    out.columns = columns;
    out.target = target;
    out.values.resize(rows.size(), values.cols());
    out.row_region.reserve(rows.size());
    out.row_date.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row_region.push_back(row_region[rows[i]]);
        out.row_date.push_back(row_date[rows[i]]);
        out.values.row(i) = values.row(rows[i]);
    }
    return out;
}

PanelDataset PanelDataset::select_columns(const std::vector<std::string>& keep) const {
    PanelDataset out;
    out.target = target;
    out.row_region = row_region;
    out.row_date = row_date;
    out.values.resize(values.rows(), keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) {
        int c = require_col(keep[j]);
        out.columns.push_back(columns[c]);
        out.values.col(j) = values.col(c);
    }
    return out;
}

void PanelDataset::validate() const {
    if (static_cast<std::size_t>(values.rows()) != row_region.size() ||
        row_region.size() != row_date.size() ||
        static_cast<std::size_t>(values.cols()) != columns.size())
        raise(errc::shape_mismatch, "row/column bookkeeping out of sync");
    std::set<std::string> names;
    for (const auto& c : columns)
        if (!names.insert(c.name).second)
            raise(errc::bad_spec, "duplicate column name '" + c.name + "'");
    if (col_index(target) < 0)
        raise(errc::unknown_target_column, "target '" + target + "' not among columns");
    std::map<std::string, int> last_day;
    for (std::size_t i = 0; i < row_date.size(); ++i) {
        int day = 0;
        if (!parse_iso_date(row_date[i], &day))
            raise(errc::bad_spec, "row " + std::to_string(i) + " has non-ISO date '" + row_date[i] + "'");
        auto it = last_day.find(row_region[i]);
        if (it != last_day.end() && day <= it->second)
            raise(errc::bad_spec, "dates not strictly increasing for region '" + row_region[i] + "'");
        last_day[row_region[i]] = day;
    }
    int t = col_index(target);
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        if (std::isnan(values(i, t)))
            raise(errc::bad_spec, "target missing in admitted row " + std::to_string(i));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return !suffix.empty() && s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

ColumnKind classify_column(const std::string& name, const SchemaConfig& schema) {
    if (name == schema.target) return ColumnKind::target;
    if (contains(schema.demographic, name)) return ColumnKind::demographic;
    if (contains(schema.testing_related, name)) return ColumnKind::testing_related;
    if (contains(schema.derived, name)) return ColumnKind::derived;
    if (ends_with(name, schema.weighted_suffix)) return ColumnKind::weighted_signal;
    if (ends_with(name, schema.unweighted_suffix)) return ColumnKind::unweighted_signal;
    return ColumnKind::other;
}

Units units_for(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::target:
        case ColumnKind::weighted_signal:
        case ColumnKind::unweighted_signal:
            return Units::percent;
        default:
            return Units::unitless;
    }
}

}  // namespace

PanelDataset ingest_csv(const std::string& path, const SchemaConfig& schema,
                        std::vector<AuditEntry>* audit) {
    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.empty())
        raise(errc::missing_header, "'" + path + "' has no header row");
    std::vector<std::string> header = split_csv_line(line);

    auto find_col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };
    int region_col = find_col(schema.region_column);
    int date_col = find_col(schema.date_column);
    if (region_col < 0 || date_col < 0)
        raise(errc::missing_header,
              "header must contain '" + schema.region_column + "' and '" + schema.date_column + "'");
    if (schema.target.empty() || find_col(schema.target) < 0)
        raise(errc::unknown_target_column, "target column '" + schema.target + "' absent from '" + path + "'");

    PanelDataset ds;
    ds.target = schema.target;
    std::vector<int> signal_cols;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (static_cast<int>(j) == region_col || static_cast<int>(j) == date_col) continue;
        ColumnKind kind = classify_column(header[j], schema);
        ds.columns.push_back({header[j], kind, units_for(kind)});
        signal_cols.push_back(static_cast<int>(j));
    }
    int target_idx = ds.col_index(schema.target);

    struct RawRow {
        std::string region, date;
        int day;
        std::vector<double> vals;
    };
    std::vector<RawRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        std::string where = "row " + std::to_string(line_no);
        if (cells.size() != header.size()) {
            if (audit) audit->push_back({where, "wrong field count"});
            continue;
        }
        RawRow row;
        row.region = cells[region_col];
        row.date = cells[date_col];
        if (!parse_iso_date(row.date, &row.day)) {
            if (audit) audit->push_back({where, "unparseable date '" + row.date + "'"});
            continue;
        }
        bool bad = false;
        row.vals.reserve(signal_cols.size());
        for (std::size_t j = 0; j < signal_cols.size(); ++j) {
            const std::string& cell = cells[signal_cols[j]];
            if (cell.empty()) {
                row.vals.push_back(kNaN);
                continue;
            }
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                if (audit) audit->push_back({where, "non-numeric cell in column '" + ds.columns[j].name + "'"});
                bad = true;
                break;
            }
            row.vals.push_back(v);
        }
        if (bad) continue;
        if (std::isnan(row.vals[target_idx])) {
            if (audit) audit->push_back({where, "missing target value"});
            continue;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) raise(errc::empty_dataset, "no admitted rows in '" + path + "'");

    // canonical order: region by first appearance, then date ascending
    std::map<std::string, int> region_order;
    for (const auto& r : rows)
        region_order.emplace(r.region, static_cast<int>(region_order.size()));
    std::stable_sort(rows.begin(), rows.end(), [&](const RawRow& a, const RawRow& b) {
        int ra = region_order[a.region], rb = region_order[b.region];
        return ra != rb ? ra < rb : a.day < b.day;
    });

    ds.values.resize(rows.size(), ds.columns.size());
    std::size_t out = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].region == rows[i - 1].region && rows[i].day == rows[i - 1].day) {
            if (audit) audit->push_back({"row " + rows[i].region + "/" + rows[i].date, "duplicate (region,date)"});
            continue;
        }
        ds.row_region.push_back(rows[i].region);
        ds.row_date.push_back(rows[i].date);
        for (std::size_t j = 0; j < rows[i].vals.size(); ++j) ds.values(out, j) = rows[i].vals[j];
        ++out;
    }
    ds.values.conservativeResize(out, Eigen::NoChange);

    // percentage range check: flag, do not clip
    if (audit) {
        for (std::size_t j = 0; j < ds.columns.size(); ++j) {
            if (ds.columns[j].units != Units::percent) continue;
            for (Eigen::Index i = 0; i < ds.values.rows(); ++i) {
                double v = ds.values(i, j);
                if (!std::isnan(v) && (v < 0.0 || v > 100.0))
                    audit->push_back({"row " + ds.row_region[i] + "/" + ds.row_date[i],
                                      "percent column '" + ds.columns[j].name + "' out of [0,100]"});
            }
        }
    }
    ds.validate();
    return ds;
}

void write_csv(const PanelDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(errc::io_error, "cannot write '" + path + "'");
    out << "region,date";
    for (const auto& c : ds.columns) out << ',' << c.name;
    out << '\n';
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        out << ds.row_region[i] << ',' << ds.row_date[i];
        for (Eigen::Index j = 0; j < ds.values.cols(); ++j) {
            out << ',';
            double v = ds.values(i, j);
            if (!std::isnan(v)) out << format_numeric(v);
        }
        out << '\n';
    }
}

std::pair<PanelDataset, std::vector<AuditEntry>> prune_features(const PanelDataset& ds,
                                                                const PruneConfig& rules) {
    std::vector<AuditEntry> audit;
    std::set<std::string> dropped;

    auto drop = [&](const std::string& name, const std::string& reason) {
        if (name == ds.target)
            raise(errc::target_would_be_dropped, "rule '" + reason + "' matches target '" + name + "'");
        if (dropped.insert(name).second) audit.push_back({name, reason});
    };

    // both "x_unweighted" and the bare stem "x" count as unweighted twins of
    // "x_weighted"
    auto has_weighted_twin = [&](const std::string& name) {
        if (ends_with(name, rules.weighted_suffix)) return false;
        std::string stem = name;
        if (ends_with(name, rules.unweighted_suffix))
            stem = name.substr(0, name.size() - rules.unweighted_suffix.size());
        return ds.col_index(stem + rules.weighted_suffix) >= 0;
    };

    for (const auto& c : ds.columns)
        if (c.kind == ColumnKind::demographic) drop(c.name, "demographic");
    for (const auto& c : ds.columns)
        if (c.name != ds.target && has_weighted_twin(c.name)) drop(c.name, "unweighted twin");
    for (const auto& c : ds.columns)
        if (c.kind == ColumnKind::testing_related) drop(c.name, "testing related");
    for (const auto& c : ds.columns)
        if (c.kind == ColumnKind::derived) drop(c.name, "derived");
    for (std::size_t j = 0; j < ds.columns.size(); ++j) {
        if (ds.columns[j].name == ds.target || dropped.count(ds.columns[j].name)) continue;
        double max_abs = 0.0;
        for (Eigen::Index i = 0; i < ds.values.rows(); ++i) {
            double v = ds.values(i, j);
            if (!std::isnan(v)) max_abs = std::max(max_abs, std::fabs(v));
        }
        if (max_abs > rules.magnitude_threshold) drop(ds.columns[j].name, "magnitude");
    }

    std::vector<std::string> keep;
    for (const auto& c : ds.columns)
        if (!dropped.count(c.name)) keep.push_back(c.name);
    return {ds.select_columns(keep), audit};
}

std::pair<PanelDataset, PanelDataset> split(const PanelDataset& ds, const SplitSpec& spec) {
    std::size_t n = ds.n_rows();
    if (spec.mode == SplitMode::random_row) {
        if (n < 2) raise(errc::insufficient_rows, "random split needs >= 2 rows");
        std::vector<int> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
        RandomStream rng(spec.seed);
        rng.shuffle(idx);
        std::size_t n_train = static_cast<std::size_t>(std::ceil(spec.train_fraction * n));
        if (n_train == 0 || n_train >= n)
            raise(errc::insufficient_rows, "train fraction leaves an empty side");
        std::vector<int> train(idx.begin(), idx.begin() + n_train);
        std::vector<int> test(idx.begin() + n_train, idx.end());
        std::sort(train.begin(), train.end());
        std::sort(test.begin(), test.end());
        return {ds.select_rows(train), ds.select_rows(test)};
    }
    // chronological_tail: last `horizon` dates of every region are test
    if (spec.horizon < 1) raise(errc::bad_spec, "horizon must be positive");
    std::vector<int> train, test;
    for (const auto& region : ds.regions()) {
        std::vector<int> rows = ds.region_rows(region);
        if (rows.size() <= static_cast<std::size_t>(spec.horizon))
            raise(errc::insufficient_rows,
                  "region '" + region + "' has " + std::to_string(rows.size()) +
                      " rows, need > horizon " + std::to_string(spec.horizon));
        std::size_t cut = rows.size() - spec.horizon;
        train.insert(train.end(), rows.begin(), rows.begin() + cut);
        test.insert(test.end(), rows.begin() + cut, rows.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {ds.select_rows(train), ds.select_rows(test)};
}

PanelDataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_regions < 1 || spec.n_days < 1 || spec.n_signals < 1)
        raise(errc::bad_spec, "n_regions, n_days, n_signals must be positive");
    if (static_cast<int>(spec.planted_weights.size()) > spec.n_signals)
        raise(errc::bad_spec, "more planted weights than signals");
    if (spec.noise_sigma < 0.0) raise(errc::bad_spec, "noise_sigma must be nonnegative");
    if (std::fabs(spec.ar_coefficient) >= 1.0)
        raise(errc::bad_spec, "ar_coefficient must lie in (-1,1)");

    PanelDataset ds;
    ds.target = "target";
    for (int j = 0; j < spec.n_signals; ++j)
        ds.columns.push_back({"sig" + std::to_string(j), ColumnKind::weighted_signal, Units::percent});
    ds.columns.push_back({"target", ColumnKind::target, Units::percent});

    int base_day = 0;
    parse_iso_date("2020-04-01", &base_day);

    double sum_w = 0.0;
    for (double w : spec.planted_weights) sum_w += w;

    RandomStream rng(spec.seed);
    std::size_t n_rows = static_cast<std::size_t>(spec.n_regions) * spec.n_days;
    ds.values.resize(n_rows, spec.n_signals + 1);
    std::size_t row = 0;
    double stat_sd = 1.0 / std::sqrt(1.0 - spec.ar_coefficient * spec.ar_coefficient);
    for (int r = 0; r < spec.n_regions; ++r) {
        std::string region = "R" + std::to_string(r);
        std::vector<double> latent(spec.n_signals);
        for (int j = 0; j < spec.n_signals; ++j) latent[j] = stat_sd * rng.normal();
        for (int t = 0; t < spec.n_days; ++t) {
            if (t > 0)
                for (int j = 0; j < spec.n_signals; ++j)
                    latent[j] = spec.ar_coefficient * latent[j] + rng.normal();
            ds.row_region.push_back(region);
            ds.row_date.push_back(ordinal_to_iso(base_day + t));
            double weighted = 0.0;
            for (int j = 0; j < spec.n_signals; ++j) {
                double sig = 50.0 + 10.0 * (latent[j] + spec.noise_sigma * rng.normal());
                sig = std::clamp(sig, 0.0, 100.0);
                ds.values(row, j) = sig;
                if (j < static_cast<int>(spec.planted_weights.size()))
                    weighted += spec.planted_weights[j] * sig;
            }
            double target = sum_w > 0.0
                                ? (weighted + spec.noise_sigma * rng.normal()) / sum_w
                                : 50.0 + spec.noise_sigma * rng.normal();
            ds.values(row, spec.n_signals) = std::clamp(target, 0.0, 100.0);
            ++row;
        }
    }
    ds.validate();
    return ds;
}

PanelDataset group_filter(const PanelDataset& ds, const std::string& column,
                          const std::string& value) {
    std::vector<int> rows;
    if (value == "*") {  // always-true predicate
        if (column != "region" && column != "date") ds.require_col(column);
        for (std::size_t i = 0; i < ds.n_rows(); ++i) rows.push_back(static_cast<int>(i));
        return ds.select_rows(rows);
    }
    if (column == "region" || column == "date") {
        const auto& axis = column == "region" ? ds.row_region : ds.row_date;
        for (std::size_t i = 0; i < axis.size(); ++i)
            if (axis[i] == value) rows.push_back(static_cast<int>(i));
    } else {
        int c = ds.require_col(column);
        char* end = nullptr;
        double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0')
            raise(errc::bad_spec, "filter value '" + value + "' is not numeric");
        for (Eigen::Index i = 0; i < ds.values.rows(); ++i)
            if (ds.values(i, c) == v) rows.push_back(static_cast<int>(i));
    }
    if (rows.empty())
        raise(errc::empty_dataset, "filter " + column + "=" + value + " matches no rows");
    return ds.select_rows(rows);
}

SchemaConfig load_schema_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open schema '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        raise(errc::bad_spec, std::string("schema parse: ") + e.what());
    }
    SchemaConfig cfg;
    cfg.target = j.value("target", "");
    cfg.region_column = j.value("region_column", cfg.region_column);
    cfg.date_column = j.value("date_column", cfg.date_column);
    cfg.weighted_suffix = j.value("weighted_suffix", cfg.weighted_suffix);
    cfg.unweighted_suffix = j.value("unweighted_suffix", cfg.unweighted_suffix);
    cfg.magnitude_threshold = j.value("magnitude_threshold", cfg.magnitude_threshold);
    for (const char* key : {"demographic", "testing_related", "derived"}) {
        if (!j.contains(key)) continue;
        auto& dst = std::string(key) == "demographic"   ? cfg.demographic
                    : std::string(key) == "testing_related" ? cfg.testing_related
                                                             : cfg.derived;
        for (const auto& v : j.at(key)) dst.push_back(v.get<std::string>());
    }
    if (cfg.target.empty()) raise(errc::unknown_target_column, "schema has no target");
    return cfg;
}

}  // namespace sympcast
