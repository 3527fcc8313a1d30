#include "sympcast/common.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace sympcast {

const char* errc_name(errc code) {
    switch (code) {
        case errc::missing_header: return "MissingHeader";
        case errc::unknown_target_column: return "UnknownTargetColumn";
        case errc::empty_dataset: return "EmptyDataset";
        case errc::target_would_be_dropped: return "TargetWouldBeDropped";
        case errc::insufficient_rows: return "InsufficientRows";
        case errc::unknown_column: return "UnknownColumn";
        case errc::bad_spec: return "BadSpec";
        case errc::io_error: return "IoError";
        case errc::constant_input: return "ConstantInput";
        case errc::degenerate_sample: return "DegenerateSample";
        case errc::shape_mismatch: return "ShapeMismatch";
        case errc::empty_input: return "EmptyInput";
        case errc::series_too_short: return "SeriesTooShort";
        case errc::constant_series: return "ConstantSeries";
        case errc::singular_design: return "SingularDesign";
        case errc::insufficient_history: return "InsufficientHistory";
        case errc::non_finite_loss: return "NonFiniteLoss";
        case errc::dimension_mismatch: return "DimensionMismatch";
        case errc::k_too_large: return "KTooLarge";
        case errc::count_exceeds_clusters: return "CountExceedsClusters";
        case errc::empty_series: return "EmptySeries";
    }
    return "Error";
}

bool errc_is_validation(errc code) {
    switch (code) {
        case errc::missing_header:
        case errc::unknown_target_column:
        case errc::target_would_be_dropped:
        case errc::unknown_column:
        case errc::bad_spec:
        case errc::shape_mismatch:
        case errc::dimension_mismatch:
        case errc::k_too_large:
        case errc::count_exceeds_clusters:
            return true;
        default:
            return false;
    }
}

std::uint64_t RandomStream::uniform_index(std::uint64_t n) {
    if (n == 0) return 0;
    // rejection sampling to avoid modulo bias
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

double RandomStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1, u2;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

namespace {

// Continued fraction for the incomplete beta function (Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-15;
    constexpr double kFpMin = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log(1.0 - x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    double x = df / (df + t * t);
    return incomplete_beta(df / 2.0, 0.5, x);
}

double student_t_quantile(double q, double df) {
    if (q <= 0.5) raise(errc::bad_spec, "t quantile expects q > 0.5");
    double alpha = 2.0 * (1.0 - q);  // two-sided tail mass at the quantile
    double lo = 0.0, hi = 1.0;
    while (student_t_two_sided_p(hi, df) > alpha) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (student_t_two_sided_p(mid, df) > alpha)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

int thread_budget(int requested) {
    if (requested < 1) requested = 1;
    int cap = requested;
    if (const char* env = std::getenv("SYMPCAST_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) cap = v;
    }
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    return std::min(requested, std::min(cap, hw));
}

std::string format_numeric(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace sympcast
