#include "sympcast/tseries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sympcast {

namespace {

bool is_constant(const Eigen::VectorXd& y) {
    return (y.array() == y(0)).all();
}

struct OlsFit {
    Eigen::VectorXd beta;
    double ssr = 0.0;
    Eigen::MatrixXd xtx_inv;
    int n = 0;
    int k = 0;
};

OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    OlsFit fit;
    fit.n = static_cast<int>(X.rows());
    fit.k = static_cast<int>(X.cols());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) raise(errc::singular_design, "collinear regressors");
    fit.beta = qr.solve(y);
    fit.ssr = (y - X * fit.beta).squaredNorm();
    fit.xtx_inv = (X.transpose() * X).inverse();
    return fit;
}

// ADF design for lag m over rows start..n-2 of the diff series:
// dy_t = alpha + gamma*y_{t-1} + sum beta_i dy_{t-i}
void adf_design(const Eigen::VectorXd& y, int m, int start, Eigen::MatrixXd* X,
                Eigen::VectorXd* dy_out) {
    int n = static_cast<int>(y.size());
    int n_obs = n - 1 - start;
    X->resize(n_obs, 2 + m);
    dy_out->resize(n_obs);
    for (int i = 0; i < n_obs; ++i) {
        int t = start + 1 + i;  // index into y; dy_t = y_t - y_{t-1}
        (*dy_out)(i) = y(t) - y(t - 1);
        (*X)(i, 0) = 1.0;
        (*X)(i, 1) = y(t - 1);
        for (int lag = 1; lag <= m; ++lag) (*X)(i, 2 + lag - 1) = y(t - lag) - y(t - lag - 1);
    }
}

}  // namespace

AdfResult adf_test(const Eigen::VectorXd& y, std::optional<int> max_lag) {
    int n = static_cast<int>(y.size());
    if (n < 4) raise(errc::series_too_short, "ADF needs a longer series");
    if (is_constant(y)) raise(errc::constant_series, "ADF is undefined on a constant series");

    int m_max = max_lag.value_or(
        static_cast<int>(std::floor(12.0 * std::pow(n / 100.0, 0.25))));
    if (m_max < 0) m_max = 0;
    // keep at least 20 usable observations after differencing and lagging
    if (n - 1 - m_max < 20) m_max = n - 1 - 20;
    if (m_max < 0) raise(errc::series_too_short, "ADF needs >= 21 observations");

    // lag selection by AIC on a common sample starting after m_max lags
    int best_m = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int m = 0; m <= m_max; ++m) {
        Eigen::MatrixXd X;
        Eigen::VectorXd dy;
        adf_design(y, m, m_max, &X, &dy);
        OlsFit fit = ols(X, dy);
        double sigma2 = std::max(fit.ssr / fit.n, 1e-300);
        double aic = fit.n * std::log(sigma2) + 2.0 * fit.k;
        if (aic < best_aic) {
            best_aic = aic;
            best_m = m;
        }
    }

    // refit at the selected lag on the maximal sample
    Eigen::MatrixXd X;
    Eigen::VectorXd dy;
    adf_design(y, best_m, best_m, &X, &dy);
    OlsFit fit = ols(X, dy);
    int dof = fit.n - fit.k;
    if (dof < 1) raise(errc::series_too_short, "no degrees of freedom left");
    double sigma2 = fit.ssr / dof;
    double se = std::sqrt(sigma2 * fit.xtx_inv(1, 1));

    AdfResult result;
    result.statistic = fit.beta(1) / se;
    result.lags_used = best_m;
    result.n_effective = fit.n;
    result.reject_at_5pct = result.statistic < result.crit_5pct;
    return result;
}

VarModel var_fit(const Eigen::MatrixXd& Y, int p_max) {
    int T = static_cast<int>(Y.rows());
    int k = static_cast<int>(Y.cols());
    if (p_max < 1) raise(errc::bad_spec, "p_max must be >= 1");
    if (T < k * p_max + p_max + 2)
        raise(errc::series_too_short, "VAR needs T >= k*p_max + p_max + 2");

    VarModel best;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= p_max; ++p) {
        int t_eff = T - p;
        Eigen::MatrixXd Z(t_eff, 1 + k * p);
        Eigen::MatrixXd target(t_eff, k);
        for (int i = 0; i < t_eff; ++i) {
            int t = p + i;
            Z(i, 0) = 1.0;
            for (int lag = 1; lag <= p; ++lag)
                Z.block(i, 1 + (lag - 1) * k, 1, k) = Y.row(t - lag);
            target.row(i) = Y.row(t);
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
        if (qr.rank() < Z.cols())
            raise(errc::singular_design, "collinear lag design at p=" + std::to_string(p));
        Eigen::MatrixXd B = qr.solve(target);  // (1+k*p) x k
        Eigen::MatrixXd U = target - Z * B;
        Eigen::MatrixXd sigma = U.transpose() * U / t_eff;
        // log det via eigenvalues with a floor against exact perfect fits
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
        double log_det = 0.0;
        for (int i = 0; i < k; ++i) log_det += std::log(std::max(es.eigenvalues()(i), 1e-300));
        double aic = log_det + 2.0 * (static_cast<double>(k) * k * p + k) / t_eff;
        if (aic < best_aic) {
            best_aic = aic;
            best.p = p;
            best.k = k;
            best.aic = aic;
            best.intercept = B.row(0).transpose();
            best.coefficients.clear();
            for (int lag = 1; lag <= p; ++lag)
                best.coefficients.push_back(B.middleRows(1 + (lag - 1) * k, k).transpose());
        }
    }
    return best;
}

ForecastResult var_forecast(const VarModel& m, const Eigen::MatrixXd& history, int horizon) {
    if (horizon < 0) raise(errc::bad_spec, "horizon must be nonnegative");
    if (history.rows() < m.p || history.cols() != m.k)
        raise(errc::insufficient_history,
              "need >= " + std::to_string(m.p) + " history rows of width " + std::to_string(m.k));

    ForecastResult result;
    result.horizon = horizon;
    result.per_step.resize(horizon, m.k);

    // rolling buffer of the last p observations, newest last
    Eigen::MatrixXd tail = history.bottomRows(m.p);
    for (int step = 0; step < horizon; ++step) {
        Eigen::VectorXd next = m.intercept;
        for (int lag = 1; lag <= m.p; ++lag)
            next += m.coefficients[lag - 1] * tail.row(m.p - lag).transpose();
        result.per_step.row(step) = next.transpose();
        if (m.p > 1) tail.topRows(m.p - 1) = tail.bottomRows(m.p - 1).eval();
        tail.row(m.p - 1) = next.transpose();
    }
    return result;
}

namespace {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void seeded_uniform_fill(Eigen::MatrixXd& m, RandomStream& rng, double bound) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
}

struct LstmState {
    // per time step activations kept for BPTT
    std::vector<Eigen::VectorXd> x, i, f, g, o, c, h, c_tanh;
};

Eigen::VectorXd lstm_forward_window(const LstmModel& m, const Eigen::MatrixXd& window,
                                    LstmState* state) {
    int H = m.config.hidden_size;
    Eigen::VectorXd h = Eigen::VectorXd::Zero(H);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(H);
    for (Eigen::Index t = 0; t < window.rows(); ++t) {
        Eigen::VectorXd x = window.row(t).transpose();
        Eigen::VectorXd z = m.w_input * x + m.w_hidden * h + m.bias;
        Eigen::VectorXd gi = z.segment(0, H).unaryExpr([](double v) { return sigmoid(v); });
        Eigen::VectorXd gf = z.segment(H, H).unaryExpr([](double v) { return sigmoid(v); });
        Eigen::VectorXd gg = z.segment(2 * H, H).array().tanh();
        Eigen::VectorXd go = z.segment(3 * H, H).unaryExpr([](double v) { return sigmoid(v); });
        c = gf.cwiseProduct(c) + gi.cwiseProduct(gg);
        Eigen::VectorXd ct = c.array().tanh();
        h = go.cwiseProduct(ct);
        if (state) {
            state->x.push_back(x);
            state->i.push_back(gi);
            state->f.push_back(gf);
            state->g.push_back(gg);
            state->o.push_back(go);
            state->c.push_back(c);
            state->h.push_back(h);
            state->c_tanh.push_back(ct);
        }
    }
    return m.w_out * h + m.b_out;
}

void zero_gradients(const LstmModel& m, LstmGradients* g) {
    g->w_input = Eigen::MatrixXd::Zero(m.w_input.rows(), m.w_input.cols());
    g->w_hidden = Eigen::MatrixXd::Zero(m.w_hidden.rows(), m.w_hidden.cols());
    g->bias = Eigen::VectorXd::Zero(m.bias.size());
    g->w_out = Eigen::MatrixXd::Zero(m.w_out.rows(), m.w_out.cols());
    g->b_out = Eigen::VectorXd::Zero(m.b_out.size());
}

Eigen::MatrixXd normalize(const LstmModel& m, const Eigen::MatrixXd& Y) {
    Eigen::MatrixXd out(Y.rows(), Y.cols());
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        double span = m.feat_max(j) - m.feat_min(j);
        if (span == 0.0) span = 1.0;
        out.col(j) = (Y.col(j).array() - m.feat_min(j)) / span;
    }
    return out;
}

Eigen::VectorXd denormalize_row(const LstmModel& m, const Eigen::VectorXd& row) {
    Eigen::VectorXd out(row.size());
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        double span = m.feat_max(j) - m.feat_min(j);
        if (span == 0.0) span = 1.0;
        out(j) = row(j) * span + m.feat_min(j);
    }
    return out;
}

}  // namespace

LstmModel lstm_init(const LstmConfig& config, int n_features) {
    if (config.hidden_size < 1 || config.window < 1 || config.epochs < 0)
        raise(errc::bad_spec, "invalid LSTM config");
    int H = config.hidden_size;
    LstmModel m;
    m.config = config;
    m.n_features = n_features;
    double bound = 1.0 / std::sqrt(static_cast<double>(H));
    RandomStream rng(config.seed);
    m.w_input.resize(4 * H, n_features);
    m.w_hidden.resize(4 * H, H);
    m.w_out.resize(n_features, H);
    seeded_uniform_fill(m.w_input, rng, bound);
    seeded_uniform_fill(m.w_hidden, rng, bound);
    seeded_uniform_fill(m.w_out, rng, bound);
    m.bias = Eigen::VectorXd::Zero(4 * H);
    m.bias.segment(H, H).setOnes();  // forget-gate bias +1
    m.b_out = Eigen::VectorXd::Zero(n_features);
    m.feat_min = Eigen::VectorXd::Zero(n_features);
    m.feat_max = Eigen::VectorXd::Ones(n_features);
    return m;
}

double lstm_loss_and_gradients(const LstmModel& m, const Eigen::MatrixXd& Yn,
                               LstmGradients* grads) {
    int W = m.config.window;
    int H = m.config.hidden_size;
    int k = m.n_features;
    int T = static_cast<int>(Yn.rows());
    int n_windows = T - W;
    if (n_windows < 1) raise(errc::series_too_short, "series shorter than window+1");
    if (grads) zero_gradients(m, grads);

    double loss = 0.0;
    double scale = 1.0 / (static_cast<double>(n_windows) * k);
    for (int w = 0; w < n_windows; ++w) {
        LstmState state;
        Eigen::VectorXd pred = lstm_forward_window(m, Yn.middleRows(w, W), &state);
        Eigen::VectorXd err = pred - Yn.row(w + W).transpose();
        loss += scale * err.squaredNorm();
        if (!grads) continue;

        Eigen::VectorXd d_pred = 2.0 * scale * err;
        grads->w_out += d_pred * state.h.back().transpose();
        grads->b_out += d_pred;
        Eigen::VectorXd dh = m.w_out.transpose() * d_pred;
        Eigen::VectorXd dc = Eigen::VectorXd::Zero(H);
        for (int t = W - 1; t >= 0; --t) {
            const Eigen::VectorXd& gi = state.i[t];
            const Eigen::VectorXd& gf = state.f[t];
            const Eigen::VectorXd& gg = state.g[t];
            const Eigen::VectorXd& go = state.o[t];
            const Eigen::VectorXd& ct = state.c_tanh[t];
            Eigen::VectorXd c_prev =
                t > 0 ? state.c[t - 1] : Eigen::VectorXd::Zero(H);

            Eigen::VectorXd d_o = dh.cwiseProduct(ct);
            dc += dh.cwiseProduct(go).cwiseProduct(
                (1.0 - ct.array().square()).matrix());
            Eigen::VectorXd d_i = dc.cwiseProduct(gg);
            Eigen::VectorXd d_f = dc.cwiseProduct(c_prev);
            Eigen::VectorXd d_g = dc.cwiseProduct(gi);

            Eigen::VectorXd dz(4 * H);
            dz.segment(0, H) = d_i.cwiseProduct(gi).cwiseProduct((1.0 - gi.array()).matrix());
            dz.segment(H, H) = d_f.cwiseProduct(gf).cwiseProduct((1.0 - gf.array()).matrix());
            dz.segment(2 * H, H) = d_g.cwiseProduct((1.0 - gg.array().square()).matrix());
            dz.segment(3 * H, H) = d_o.cwiseProduct(go).cwiseProduct((1.0 - go.array()).matrix());

            Eigen::VectorXd h_prev = t > 0 ? state.h[t - 1] : Eigen::VectorXd::Zero(H);
            grads->w_input += dz * state.x[t].transpose();
            grads->w_hidden += dz * h_prev.transpose();
            grads->bias += dz;

            dh = m.w_hidden.transpose() * dz;
            dc = dc.cwiseProduct(gf);
        }
    }
    return loss;
}

LstmModel lstm_fit(const Eigen::MatrixXd& Y, const LstmConfig& config) {
    int T = static_cast<int>(Y.rows());
    int k = static_cast<int>(Y.cols());
    if (T <= config.window + 1)
        raise(errc::series_too_short, "LSTM needs T > window + 1");

    LstmModel m = lstm_init(config, k);
    m.feat_min = Y.colwise().minCoeff();
    m.feat_max = Y.colwise().maxCoeff();
    Eigen::MatrixXd Yn = normalize(m, Y);

    // full-batch Adam
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    LstmGradients grad, mom, vel;
    zero_gradients(m, &mom);
    zero_gradients(m, &vel);

    auto adam_update = [&](Eigen::MatrixXd& param, Eigen::MatrixXd& mo, Eigen::MatrixXd& ve,
                           const Eigen::MatrixXd& g, double corr1, double corr2) {
        mo = beta1 * mo + (1.0 - beta1) * g;
        ve = beta2 * ve.array().matrix() + (1.0 - beta2) * g.cwiseProduct(g);
        param.array() -= config.step_size * (mo.array() / corr1) /
                         ((ve.array() / corr2).sqrt() + eps);
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double loss = lstm_loss_and_gradients(m, Yn, &grad);
        if (!std::isfinite(loss))
            raise(errc::non_finite_loss, "training diverged at epoch " + std::to_string(epoch));
        m.epoch_loss.push_back(loss);
        double corr1 = 1.0 - std::pow(beta1, epoch + 1);
        double corr2 = 1.0 - std::pow(beta2, epoch + 1);
        adam_update(m.w_input, mom.w_input, vel.w_input, grad.w_input, corr1, corr2);
        adam_update(m.w_hidden, mom.w_hidden, vel.w_hidden, grad.w_hidden, corr1, corr2);
        adam_update(m.w_out, mom.w_out, vel.w_out, grad.w_out, corr1, corr2);
        Eigen::MatrixXd b = m.bias, gb = grad.bias, mb = mom.bias, vb = vel.bias;
        adam_update(b, mb, vb, gb, corr1, corr2);
        m.bias = b;
        mom.bias = mb;
        vel.bias = vb;
        Eigen::MatrixXd bo = m.b_out, gbo = grad.b_out, mbo = mom.b_out, vbo = vel.b_out;
        adam_update(bo, mbo, vbo, gbo, corr1, corr2);
        m.b_out = bo;
        mom.b_out = mbo;
        vel.b_out = vbo;
    }
    return m;
}

ForecastResult lstm_forecast(const LstmModel& m, const Eigen::MatrixXd& history, int horizon) {
    if (horizon < 0) raise(errc::bad_spec, "horizon must be nonnegative");
    if (history.rows() < m.config.window || history.cols() != m.n_features)
        raise(errc::insufficient_history,
              "need >= " + std::to_string(m.config.window) + " history rows");

    ForecastResult result;
    result.horizon = horizon;
    result.per_step.resize(horizon, m.n_features);

    Eigen::MatrixXd window = normalize(m, history.bottomRows(m.config.window));
    for (int step = 0; step < horizon; ++step) {
        Eigen::VectorXd next = lstm_forward_window(m, window, nullptr);
        result.per_step.row(step) = denormalize_row(m, next).transpose();
        window.topRows(m.config.window - 1) = window.bottomRows(m.config.window - 1).eval();
        window.row(m.config.window - 1) = next.transpose();
    }
    return result;
}

}  // namespace sympcast
