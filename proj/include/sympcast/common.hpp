#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sympcast {

// Error codes surfaced through exceptions. The CLI maps validation codes to
// exit status 2 and computation codes to exit status 1.
enum class errc {
    // panel
    missing_header,
    unknown_target_column,
    empty_dataset,
    target_would_be_dropped,
    insufficient_rows,
    unknown_column,
    bad_spec,
    io_error,
    // rankcorr
    constant_input,
    degenerate_sample,
    // regress
    shape_mismatch,
    empty_input,
    // tseries
    series_too_short,
    constant_series,
    singular_design,
    insufficient_history,
    non_finite_loss,
    // shapecluster
    dimension_mismatch,
    k_too_large,
    count_exceeds_clusters,
    empty_series,
};

const char* errc_name(errc code);

// True for codes caused by bad user input rather than a failed computation.
bool errc_is_validation(errc code);

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
    throw Error(code, message);
}

// Deterministic random stream. Wraps mt19937_64 but generates uniforms and
// normals itself so output bytes do not depend on the standard library's
// distribution implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {
        // splitmix64 warmup so nearby seeds decorrelate
        for (int i = 0; i < 4; ++i) next_u64();
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n);

    double normal();  // standard normal via Box-Muller

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of a Student-t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Upper quantile t_{q, df} (e.g. q = 0.975) via bisection on the CDF.
double student_t_quantile(double q, double df);

// Number of worker threads to use: min(requested, SYMPCAST_THREADS if set).
// Returns at least 1.
int thread_budget(int requested);

// Format a double with 12 significant digits, shortest faithful text.
std::string format_numeric(double v);

}  // namespace sympcast
