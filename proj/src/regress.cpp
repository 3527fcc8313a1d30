#include "sympcast/regress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace sympcast {

const char* model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::linear: return "linear";
        case ModelKind::tree: return "tree";
        case ModelKind::gbt: return "gbt";
    }
    return "gbt";
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "linear") return ModelKind::linear;
    if (name == "tree") return ModelKind::tree;
    if (name == "gbt") return ModelKind::gbt;
    raise(errc::bad_spec, "unknown model '" + name + "', expected one of {linear, tree, gbt}");
}

void ModelSpec::validate() const {
    if (tree_max_depth < 1 || tree_min_leaf < 1 || gbt_stages < 1)
        raise(errc::bad_spec, "tree/gbt parameters must be positive");
    if (gbt_learning_rate <= 0.0 || gbt_learning_rate > 1.0)
        raise(errc::bad_spec, "learning rate must lie in (0,1]");
}

double RegressionTree::predict_row(const Eigen::RowVectorXd& x) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
        node = x(nodes[node].feature) < nodes[node].threshold ? nodes[node].left
                                                              : nodes[node].right;
    }
    return nodes[node].value;
}

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Best variance-reduction split over all features; ties go to the earlier
// feature index and the lower threshold (strict improvement required to
// replace the incumbent).
SplitChoice best_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const std::vector<int>& rows, int min_leaf) {
    SplitChoice best;
    std::size_t n = rows.size();
    double total_sum = 0.0;
    for (int i : rows) total_sum += y(i);

    std::vector<std::pair<double, double>> xy(n);
    for (int f = 0; f < X.cols(); ++f) {
        for (std::size_t i = 0; i < n; ++i) xy[i] = {X(rows[i], f), y(rows[i])};
        std::sort(xy.begin(), xy.end());
        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += xy[i].second;
            if (xy[i].first == xy[i + 1].first) continue;
            std::size_t nl = i + 1, nr = n - nl;
            if (nl < static_cast<std::size_t>(min_leaf) || nr < static_cast<std::size_t>(min_leaf))
                continue;
            double right_sum = total_sum - left_sum;
            // variance reduction up to constants: sum of squared means weighted by count
            double gain = left_sum * left_sum / nl + right_sum * right_sum / nr -
                          total_sum * total_sum / n;
            if (gain > best.gain + 1e-12 * std::max(1.0, std::fabs(best.gain))) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (xy[i].first + xy[i + 1].first);
                best.gain = gain;
            }
        }
    }
    return best;
}

int grow_tree(RegressionTree& tree, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
              std::vector<int> rows, int depth, const ModelSpec& spec) {
    double mean = 0.0;
    for (int i : rows) mean += y(i);
    mean /= rows.size();

    int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[node_id].value = mean;

    bool pure = std::all_of(rows.begin(), rows.end(), [&](int i) { return y(i) == y(rows[0]); });
    if (depth >= spec.tree_max_depth || pure ||
        rows.size() < 2 * static_cast<std::size_t>(spec.tree_min_leaf))
        return node_id;

    SplitChoice split = best_split(X, y, rows, spec.tree_min_leaf);
    if (!split.found) return node_id;

    std::vector<int> left_rows, right_rows;
    for (int i : rows)
        (X(i, split.feature) < split.threshold ? left_rows : right_rows).push_back(i);

    tree.nodes[node_id].feature = split.feature;
    tree.nodes[node_id].threshold = split.threshold;
    int left = grow_tree(tree, X, y, std::move(left_rows), depth + 1, spec);
    tree.nodes[node_id].left = left;
    int right = grow_tree(tree, X, y, std::move(right_rows), depth + 1, spec);
    tree.nodes[node_id].right = right;
    return node_id;
}

RegressionTree fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ModelSpec& spec) {
    RegressionTree tree;
    std::vector<int> rows(X.rows());
    std::iota(rows.begin(), rows.end(), 0);
    grow_tree(tree, X, y, std::move(rows), 0, spec);
    return tree;
}

void fit_linear(FittedModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::Index n = X.rows(), k = X.cols();
    if (n < k + 1) raise(errc::insufficient_rows, "OLS needs n >= k+1");
    Eigen::MatrixXd design(n, k + 1);
    design.col(0).setOnes();
    design.rightCols(k) = X;
    Eigen::MatrixXd gram = design.transpose() * design;
    Eigen::VectorXd rhs = design.transpose() * y;
    Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    Eigen::VectorXd beta;
    if (solver.info() == Eigen::Success && solver.isPositive()) {
        beta = solver.solve(rhs);
    } else {
        beta = Eigen::VectorXd::Zero(k + 1);
    }
    // singular Gram: refit with a ridge jitter
    double residual = (gram * beta - rhs).norm();
    if (!beta.allFinite() || residual > 1e-6 * std::max(1.0, rhs.norm())) {
        Eigen::MatrixXd jittered = gram + 1e-10 * Eigen::MatrixXd::Identity(k + 1, k + 1);
        beta = Eigen::LDLT<Eigen::MatrixXd>(jittered).solve(rhs);
    }
    model.intercept = beta(0);
    model.coefficients = beta.tail(k);
}

}  // namespace

FittedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    spec.validate();
    if (X.rows() == 0 || X.cols() == 0) raise(errc::empty_input, "empty design matrix");
    if (X.rows() != y.size()) raise(errc::shape_mismatch, "X rows != y length");
    if (!X.allFinite() || !y.allFinite())
        raise(errc::bad_spec, "fit requires finite inputs with no missing values");

    FittedModel model;
    model.spec = spec;
    model.n_features = static_cast<int>(X.cols());

    switch (spec.kind) {
        case ModelKind::linear:
            fit_linear(model, X, y);
            break;
        case ModelKind::tree:
            if (X.rows() < 2) raise(errc::insufficient_rows, "tree needs >= 2 rows");
            model.tree = fit_tree(X, y, spec);
            break;
        case ModelKind::gbt: {
            if (X.rows() < 2) raise(errc::insufficient_rows, "gbt needs >= 2 rows");
            model.gbt_base = y.mean();
            Eigen::VectorXd current = Eigen::VectorXd::Constant(y.size(), model.gbt_base);
            for (int s = 0; s < spec.gbt_stages; ++s) {
                Eigen::VectorXd residual = y - current;
                RegressionTree stage = fit_tree(X, residual, spec);
                for (Eigen::Index i = 0; i < X.rows(); ++i)
                    current(i) += spec.gbt_learning_rate * stage.predict_row(X.row(i));
                model.stages.push_back(std::move(stage));
                model.train_diagnostics.push_back((y - current).squaredNorm() / y.size());
            }
            break;
        }
    }
    return model;
}

Eigen::VectorXd FittedModel::predict(const Eigen::MatrixXd& X) const {
    if (X.cols() != n_features)
        raise(errc::shape_mismatch, "predict arity " + std::to_string(X.cols()) +
                                        " != training arity " + std::to_string(n_features));
    Eigen::VectorXd out(X.rows());
    switch (spec.kind) {
        case ModelKind::linear:
            out = (X * coefficients).array() + intercept;
            break;
        case ModelKind::tree:
            for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = tree.predict_row(X.row(i));
            break;
        case ModelKind::gbt:
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
                double v = gbt_base;
                for (const auto& stage : stages)
                    v += spec.gbt_learning_rate * stage.predict_row(X.row(i));
                out(i) = v;
            }
            break;
    }
    return out;
}

namespace {

nlohmann::json tree_to_json(const RegressionTree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes)
        nodes.push_back({{"f", n.feature}, {"t", n.threshold}, {"v", n.value},
                         {"l", n.left}, {"r", n.right}});
    return nodes;
}

RegressionTree tree_from_json(const nlohmann::json& j) {
    RegressionTree tree;
    for (const auto& n : j)
        tree.nodes.push_back({n.at("f"), n.at("t"), n.at("v"), n.at("l"), n.at("r")});
    return tree;
}

}  // namespace

std::string serialize_model(const FittedModel& m) {
    nlohmann::json j;
    j["schema"] = "sympcast/model/v1";
    j["kind"] = model_kind_name(m.spec.kind);
    j["params"] = {{"tree_max_depth", m.spec.tree_max_depth},
                   {"tree_min_leaf", m.spec.tree_min_leaf},
                   {"gbt_stages", m.spec.gbt_stages},
                   {"gbt_learning_rate", m.spec.gbt_learning_rate},
                   {"seed", m.spec.seed}};
    j["n_features"] = m.n_features;
    j["feature_names"] = m.feature_names;
    switch (m.spec.kind) {
        case ModelKind::linear: {
            std::vector<double> coef(m.coefficients.begin(), m.coefficients.end());
            j["coefficients"] = coef;
            j["intercept"] = m.intercept;
            break;
        }
        case ModelKind::tree:
            j["tree"] = tree_to_json(m.tree);
            break;
        case ModelKind::gbt: {
            j["base"] = m.gbt_base;
            nlohmann::json stages = nlohmann::json::array();
            for (const auto& s : m.stages) stages.push_back(tree_to_json(s));
            j["stages"] = stages;
            j["train_diagnostics"] = m.train_diagnostics;
            break;
        }
    }
    return j.dump();
}

FittedModel deserialize_model(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        raise(errc::bad_spec, std::string("model parse: ") + e.what());
    }
    if (j.value("schema", "") != "sympcast/model/v1")
        raise(errc::bad_spec, "unsupported model schema");
    FittedModel m;
    m.spec.kind = parse_model_kind(j.at("kind"));
    const auto& p = j.at("params");
    m.spec.tree_max_depth = p.at("tree_max_depth");
    m.spec.tree_min_leaf = p.at("tree_min_leaf");
    m.spec.gbt_stages = p.at("gbt_stages");
    m.spec.gbt_learning_rate = p.at("gbt_learning_rate");
    m.spec.seed = p.at("seed");
    m.n_features = j.at("n_features");
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    switch (m.spec.kind) {
        case ModelKind::linear: {
            auto coef = j.at("coefficients").get<std::vector<double>>();
            m.coefficients = Eigen::Map<Eigen::VectorXd>(coef.data(), coef.size());
            m.intercept = j.at("intercept");
            break;
        }
        case ModelKind::tree:
            m.tree = tree_from_json(j.at("tree"));
            break;
        case ModelKind::gbt:
            m.gbt_base = j.at("base");
            for (const auto& s : j.at("stages")) m.stages.push_back(tree_from_json(s));
            m.train_diagnostics = j.at("train_diagnostics").get<std::vector<double>>();
            break;
    }
    return m;
}

}  // namespace sympcast
