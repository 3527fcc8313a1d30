#include "sympcast/shapecluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace sympcast {

const char* linkage_name(Linkage linkage) {
    switch (linkage) {
        case Linkage::average: return "average";
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
    }
    return "average";
}

Linkage parse_linkage(const std::string& name) {
    if (name == "average") return Linkage::average;
    if (name == "single") return Linkage::single;
    if (name == "complete") return Linkage::complete;
    raise(errc::bad_spec, "unknown linkage '" + name + "', expected {average, single, complete}");
}

int ClusterAssignment::label_of(const std::string& item) const {
    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i] == item) return labels[i];
    raise(errc::unknown_column, "item '" + item + "' not clustered");
}

namespace {

double cluster_distance(const Eigen::MatrixXd& point_dist, const std::vector<int>& a,
                        const std::vector<int>& b, Linkage linkage) {
    double acc = linkage == Linkage::single ? std::numeric_limits<double>::infinity() : 0.0;
    for (int i : a)
        for (int j : b) {
            double d = point_dist(i, j);
            switch (linkage) {
                case Linkage::average: acc += d; break;
                case Linkage::single: acc = std::min(acc, d); break;
                case Linkage::complete: acc = std::max(acc, d); break;
            }
        }
    if (linkage == Linkage::average) acc /= static_cast<double>(a.size() * b.size());
    return acc;
}

}  // namespace

ClusterAssignment agglomerate(const std::map<std::string, Eigen::VectorXd>& profiles, int k,
                              Linkage linkage) {
    int n = static_cast<int>(profiles.size());
    if (k < 1 || k > n) raise(errc::k_too_large, "k must lie in [1, n]");

    ClusterAssignment out;
    out.k = k;
    std::vector<Eigen::VectorXd> points;
    for (const auto& [id, vec] : profiles) {  // std::map iterates in sorted id order
        out.items.push_back(id);
        points.push_back(vec);
    }
    Eigen::Index dim = points[0].size();
    for (const auto& p : points)
        if (p.size() != dim) raise(errc::dimension_mismatch, "profile vectors differ in length");

    Eigen::MatrixXd point_dist(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) point_dist(i, j) = (points[i] - points[j]).norm();

    struct Cluster {
        std::vector<int> members;  // point indices, ascending; members[0] is the rep
    };
    std::vector<Cluster> clusters(n);
    for (int i = 0; i < n; ++i) clusters[i].members = {i};

    while (static_cast<int>(clusters.size()) > k) {
        int best_a = -1, best_b = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < clusters.size(); ++a) {
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                double d = cluster_distance(point_dist, clusters[a].members,
                                            clusters[b].members, linkage);
                // tie-break: smallest (min rep id, max rep id) lexicographically
                bool better = d < best_d;
                if (d == best_d && best_a >= 0) {
                    const std::string& cand_min =
                        std::min(out.items[clusters[a].members[0]], out.items[clusters[b].members[0]]);
                    const std::string& cand_max =
                        std::max(out.items[clusters[a].members[0]], out.items[clusters[b].members[0]]);
                    const std::string& inc_min = std::min(out.items[clusters[best_a].members[0]],
                                                          out.items[clusters[best_b].members[0]]);
                    const std::string& inc_max = std::max(out.items[clusters[best_a].members[0]],
                                                          out.items[clusters[best_b].members[0]]);
                    better = std::tie(cand_min, cand_max) < std::tie(inc_min, inc_max);
                }
                if (better) {
                    best_d = d;
                    best_a = static_cast<int>(a);
                    best_b = static_cast<int>(b);
                }
            }
        }
        out.linkage_trace.push_back({out.items[clusters[best_a].members[0]],
                                     out.items[clusters[best_b].members[0]], best_d});
        auto& dst = clusters[best_a].members;
        auto& src = clusters[best_b].members;
        dst.insert(dst.end(), src.begin(), src.end());
        std::sort(dst.begin(), dst.end());
        clusters.erase(clusters.begin() + best_b);
    }

    // canonical labels: clusters ordered by smallest member id
    std::sort(clusters.begin(), clusters.end(),
              [&](const Cluster& a, const Cluster& b) { return a.members[0] < b.members[0]; });
    out.labels.assign(n, -1);
    for (std::size_t c = 0; c < clusters.size(); ++c)
        for (int i : clusters[c].members) out.labels[i] = static_cast<int>(c);
    return out;
}

std::vector<std::string> sample_cross_cluster(const ClusterAssignment& assign, int count,
                                              std::uint64_t seed) {
    if (count < 0 || count > assign.k)
        raise(errc::count_exceeds_clusters,
              "count " + std::to_string(count) + " exceeds cluster count " + std::to_string(assign.k));
    RandomStream rng(seed);
    std::vector<int> cluster_order(assign.k);
    for (int i = 0; i < assign.k; ++i) cluster_order[i] = i;
    rng.shuffle(cluster_order);

    std::vector<std::string> picked;
    for (int c = 0; c < count; ++c) {
        std::vector<std::string> members;
        for (std::size_t i = 0; i < assign.items.size(); ++i)
            if (assign.labels[i] == cluster_order[c]) members.push_back(assign.items[i]);
        picked.push_back(members[rng.uniform_index(members.size())]);
    }
    return picked;
}

DtwResult dtw(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    int n = static_cast<int>(a.size());
    int m = static_cast<int>(b.size());
    if (n == 0 || m == 0) raise(errc::empty_series, "DTW inputs must be nonempty");

    Eigen::MatrixXd acc(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double cost = std::fabs(a(i) - b(j));
            if (i == 0 && j == 0)
                acc(i, j) = cost;
            else if (i == 0)
                acc(i, j) = cost + acc(i, j - 1);
            else if (j == 0)
                acc(i, j) = cost + acc(i - 1, j);
            else
                acc(i, j) = cost + std::min({acc(i - 1, j - 1), acc(i - 1, j), acc(i, j - 1)});
        }
    }

    DtwResult result;
    result.distance = acc(n - 1, m - 1);
    int i = n - 1, j = m - 1;
    result.path.push_back({i, j});
    while (i > 0 || j > 0) {
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            double diag = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
            double best = std::min({diag, up, left});
            if (diag == best) {
                --i;
                --j;
            } else if (up == best) {
                --i;
            } else {
                --j;
            }
        }
        result.path.push_back({i, j});
    }
    std::reverse(result.path.begin(), result.path.end());
    return result;
}

}  // namespace sympcast
