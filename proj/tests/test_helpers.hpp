#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <string>
#include <vector>

#include "sympcast/panel.hpp"

namespace sympcast::testing {

/// Builds an in-memory panel for one region with sequential dates.
inline PanelDataset make_panel(const std::vector<ColumnMeta>& columns,
                               const Eigen::MatrixXd& values,
                               const std::string& target = "target") {
    PanelDataset ds;
    ds.columns = columns;
    ds.target = target;
    ds.values = values;
    int day = 0;
    parse_iso_date("2020-04-01", &day);
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        ds.row_region.push_back("R0");
        char buf[32];
        int y = 2020, m = 4, d = 1 + static_cast<int>(i) % 28;
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m + static_cast<int>(i) / 28, d);
        ds.row_date.push_back(buf);
    }
    return ds;
}

inline ColumnMeta col(const std::string& name, ColumnKind kind = ColumnKind::other,
                      Units units = Units::unitless) {
    return {name, kind, units};
}

inline std::string write_temp(const std::string& name, const std::string& contents) {
    std::string path = std::string("/tmp/sympcast_test_") + name;
    std::ofstream out(path);
    out << contents;
    return path;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace sympcast::testing
