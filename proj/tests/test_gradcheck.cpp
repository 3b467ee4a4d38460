#include <doctest.h>

#include "modno/errors.hpp"
#include "modno/gradcheck.hpp"

using namespace modno;

TEST_CASE("gradcheck: twenty random networks stay inside the tolerance") {
    GradCheckReport report = run_gradient_check(20, 7);
    CHECK(report.cases.size() == 20);
    CHECK(report.passed);
    CHECK(report.worst_rel_error < 1e-6);
    CHECK(report.worst_rel_error > 0.0);
    for (const GradCheckCase& c : report.cases) {
        CHECK(c.rel_error <= report.worst_rel_error);
        CHECK(c.layer_sizes.size() >= 3);
        CHECK(c.batch_rows >= 3);
    }
}

TEST_CASE("gradcheck: report is deterministic in the seed") {
    GradCheckReport a = run_gradient_check(6, 123);
    GradCheckReport b = run_gradient_check(6, 123);
    CHECK(a.worst_rel_error == b.worst_rel_error);
    for (std::size_t i = 0; i < a.cases.size(); ++i) {
        CHECK(a.cases[i].rel_error == b.cases[i].rel_error);
        CHECK(a.cases[i].layer_sizes == b.cases[i].layer_sizes);
    }
    GradCheckReport c = run_gradient_check(6, 124);
    CHECK(c.worst_rel_error != a.worst_rel_error);
}

TEST_CASE("gradcheck: verdict follows the tolerance") {
    // The oracle's own roundoff keeps the worst error above 1e-12, so an
    // absurdly tight tolerance must flip the verdict without changing the
    // measured errors.
    GradCheckReport loose = run_gradient_check(4, 9, 1e-6);
    GradCheckReport tight = run_gradient_check(4, 9, 1e-12);
    CHECK(loose.passed);
    CHECK_FALSE(tight.passed);
    CHECK(loose.worst_rel_error == tight.worst_rel_error);
}

TEST_CASE("gradcheck: rejects empty or degenerate requests") {
    CHECK_THROWS_AS(run_gradient_check(0, 1), ConfigError);
    CHECK_THROWS_AS(run_gradient_check(5, 1, 0.0), ConfigError);
    CHECK_THROWS_AS(run_gradient_check(5, 1, -1.0), ConfigError);
}
