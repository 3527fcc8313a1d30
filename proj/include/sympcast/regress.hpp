#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sympcast/common.hpp"

namespace sympcast {

enum class ModelKind { linear, tree, gbt };

const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);  // throws BadSpec

struct ModelSpec {
    ModelKind kind = ModelKind::gbt;
    int tree_max_depth = 3;
    int tree_min_leaf = 5;
    int gbt_stages = 100;
    double gbt_learning_rate = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Binary regression tree in flat-array form. node 0 is the root; leaves have
/// feature == -1 and carry the prediction in value.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict_row(const Eigen::RowVectorXd& x) const;
};

class FittedModel {
public:
    ModelSpec spec;
    std::vector<std::string> feature_names;  // optional; arity check uses n_features
    int n_features = 0;

    // linear
    Eigen::VectorXd coefficients;  // size n_features
    double intercept = 0.0;

    // tree
    RegressionTree tree;

    // gbt
    double gbt_base = 0.0;
    std::vector<RegressionTree> stages;
    std::vector<double> train_diagnostics;  // training MSE after each stage

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

FittedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

std::string serialize_model(const FittedModel& m);
FittedModel deserialize_model(const std::string& json_text);

}  // namespace sympcast
