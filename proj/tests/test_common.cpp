#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "sympcast/common.hpp"

using namespace sympcast;

TEST_CASE("random stream: deterministic and distributionally sane") {
    RandomStream a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        std::uint64_t va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        any_diff = any_diff || (va != c.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff);

    RandomStream rng(7);
    double sum = 0.0, sumsq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double z = rng.normal();
        sum += z;
        sumsq += z * z;
    }
    CHECK(std::fabs(sum / n) < 0.02);
    CHECK(std::fabs(sumsq / n - 1.0) < 0.02);

    for (int i = 0; i < 1000; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(rng.uniform_index(5) < 5);
    }
}

TEST_CASE("random stream: shuffle is a seeded permutation") {
    std::vector<int> v = {0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<int> w = v;
    RandomStream a(9), b(9);
    a.shuffle(v);
    b.shuffle(w);
    CHECK(v == w);
    std::sort(v.begin(), v.end());
    CHECK(v == std::vector<int>({0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST_CASE("incomplete beta: closed forms") {
    // I_x(1,1) = x
    for (double x : {0.0, 0.25, 0.5, 0.9, 1.0})
        CHECK(incomplete_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-12));
    // I_x(1/2,1/2) = (2/pi) asin(sqrt(x))
    for (double x : {0.1, 0.25, 0.5, 0.75})
        CHECK(incomplete_beta(0.5, 0.5, x) ==
              doctest::Approx(2.0 / M_PI * std::asin(std::sqrt(x))).epsilon(1e-10));
    // symmetry identity I_x(a,b) = 1 - I_{1-x}(b,a)
    CHECK(incomplete_beta(2.5, 1.5, 0.3) ==
          doctest::Approx(1.0 - incomplete_beta(1.5, 2.5, 0.7)).epsilon(1e-10));
}

TEST_CASE("student t: two-sided p and quantile agree") {
    // 97.5% quantile at 19 df is the classic 2.093 table value
    double t = student_t_quantile(0.975, 19);
    CHECK(t == doctest::Approx(2.093024).epsilon(1e-4));
    CHECK(student_t_two_sided_p(t, 19) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(student_t_two_sided_p(0.0, 5) == doctest::Approx(1.0).epsilon(1e-12));
    // monotone in |t|
    CHECK(student_t_two_sided_p(1.0, 10) > student_t_two_sided_p(2.0, 10));
    // symmetric
    CHECK(student_t_two_sided_p(-1.7, 8) ==
          doctest::Approx(student_t_two_sided_p(1.7, 8)).epsilon(1e-12));
}

TEST_CASE("thread budget honors the environment cap") {
    unsetenv("SYMPCAST_THREADS");
    int unbounded = thread_budget(4);
    CHECK(unbounded >= 1);
    CHECK(unbounded <= 4);
    CHECK(thread_budget(0) == 1);
    setenv("SYMPCAST_THREADS", "2", 1);
    CHECK(thread_budget(8) <= 2);  // also capped by hardware concurrency
    CHECK(thread_budget(8) >= 1);
    CHECK(thread_budget(1) == 1);
    setenv("SYMPCAST_THREADS", "1", 1);
    CHECK(thread_budget(8) == 1);
    setenv("SYMPCAST_THREADS", "bogus", 1);
    CHECK(thread_budget(3) <= 3);  // unparseable value leaves the cap at the request
    CHECK(thread_budget(3) >= 1);
    unsetenv("SYMPCAST_THREADS");
}

TEST_CASE("numeric formatting round-trips at 12 significant digits") {
    CHECK(format_numeric(0.0) == "0");
    CHECK(format_numeric(1.5) == "1.5");
    CHECK(std::stod(format_numeric(1.0 / 3.0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-11));
}

TEST_CASE("error codes: names and validation classification") {
    CHECK(std::string(errc_name(errc::shape_mismatch)) == "ShapeMismatch");
    CHECK(errc_is_validation(errc::bad_spec));
    CHECK(errc_is_validation(errc::unknown_target_column));
    CHECK_FALSE(errc_is_validation(errc::non_finite_loss));
    Error e(errc::bad_spec, "details");
    CHECK(e.code() == errc::bad_spec);
    CHECK(std::string(e.what()).find("details") != std::string::npos);
}
