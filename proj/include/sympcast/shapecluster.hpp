#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sympcast/common.hpp"

namespace sympcast {

enum class Linkage { average, single, complete };

const char* linkage_name(Linkage linkage);
Linkage parse_linkage(const std::string& name);

struct MergeStep {
    std::string rep_a;  // smallest member id of each merged cluster
    std::string rep_b;
    double distance = 0.0;
};

struct ClusterAssignment {
    std::vector<std::string> items;  // region ids, sorted
    std::vector<int> labels;         // parallel to items, in [0, k)
    int k = 0;
    std::vector<MergeStep> linkage_trace;

    int label_of(const std::string& item) const;
};

ClusterAssignment agglomerate(const std::map<std::string, Eigen::VectorXd>& profiles, int k,
                              Linkage linkage = Linkage::average);

std::vector<std::string> sample_cross_cluster(const ClusterAssignment& assign, int count,
                                              std::uint64_t seed);

struct DtwResult {
    double distance = 0.0;
    std::vector<std::pair<int, int>> path;
};

DtwResult dtw(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace sympcast
