#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "spinorforge/checks.hpp"

using namespace spinorforge;

namespace {
bool same(const SuiteReport& a, const SuiteReport& b) {
    if (a.checks.size() != b.checks.size()) return false;
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
        const auto &x = a.checks[i], &y = b.checks[i];
        if (x.name != y.name || x.pass != y.pass || x.max_residual != y.max_residual || x.samples != y.samples ||
            x.detail != y.detail)
            return false;
    }
    return true;
}
}  // namespace

TEST_CASE("every suite passes at a modest sample count") {
    for (const auto& s : suite_names()) {
        SuiteReport r = run_suite(s, 3, 60);
        INFO(s);
        CHECK(r.pass());
        for (const auto& c : r.checks) {
            INFO(c.name);
            CHECK(c.pass);
            CHECK(c.samples > 0);
        }
    }
}

TEST_CASE("a seed fixes the whole report") {
    CHECK(same(run_suite("all", 11, 30), run_suite("all", 11, 30)));
    CHECK_FALSE(same(run_suite("algebra", 11, 30), run_suite("algebra", 12, 30)));
}

TEST_CASE("all concatenates the suites in order") {
    std::size_t total = 0;
    for (const auto& s : suite_names()) total += run_suite(s, 5, 10).checks.size();
    CHECK(run_suite("all", 5, 10).checks.size() == total);
}

TEST_CASE("tolerance override reaches residual checks but not counting ones") {
    SuiteReport r = run_suite("clifford", 4, 30, 1e-300);
    CHECK_FALSE(r.pass());
    for (const auto& c : r.checks)
        if (c.name == "product_parity" || c.name == "spin_up_membership") CHECK(c.pass);
    CHECK_THROWS_AS(run_suite("unknown", 1, 1), std::invalid_argument);
}

TEST_CASE("oracle convergence reports every field group with an order where meaningful") {
    Sampler rng(9);
    Checks c = check_oracle_convergence(rng, {4, {}});
    REQUIRE(c.size() == 6);
    for (const auto& k : c) {
        INFO(k.name);
        CHECK(k.pass);
        CHECK(k.samples == 4);
    }
    CHECK(c[0].detail.find("exact") != std::string::npos);  // Theta is algebraic
    CHECK(c[2].detail.find("order") != std::string::npos);  // A is a stencil quantity
}
