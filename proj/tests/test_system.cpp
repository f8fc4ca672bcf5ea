#include <doctest.h>

#include "posfix/error.hpp"
#include "posfix/system.hpp"
#include "support.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace posfix;

TEST_CASE("state vectors reject non-positive or non-finite entries") {
    auto labels = make_labels({"a", "b"});
    CHECK_NOTHROW(StateVector(Vector::Ones(2), labels));
    CHECK_THROWS_AS(StateVector(Vector::Zero(2), labels), InvalidInputError);
    Vector bad(2);
    bad << 1.0, std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(StateVector(bad, labels), InvalidInputError);
    CHECK_THROWS_AS(StateVector(Vector::Ones(3), labels), InvalidInputError);

    Vector z(2);
    z << 0.3, -1.2;
    const auto x = StateVector::from_log(z, labels);
    CHECK(x[0] == doctest::Approx(std::exp(0.3)));
    CHECK((x.log() - z).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(x.labels()[1] == "b");
}

TEST_CASE("labels must be unique and non-empty") {
    CHECK_THROWS_AS(make_labels({"a", "a"}), InvalidInputError);
    CHECK_THROWS_AS(make_labels({"a", ""}), InvalidInputError);
    const auto sys = testing::swap_system();
    CHECK(sys.index_of("x2") == 1);
    CHECK_THROWS_AS(sys.index_of("nope"), InvalidInputError);
}

TEST_CASE("evaluation failures name the offending coordinate") {
    PositiveSystem sys("bad", {"good", "broken"}, [](const Vector& x) {
        Vector f = x;
        f(1) = x(0) - 2.0;
        return f;
    });
    CHECK_NOTHROW(sys.evaluate(Vector::Constant(2, 3.0)));
    try {
        sys.evaluate(Vector::Ones(2));
        FAIL("expected ModelEvaluationError");
    } catch (const ModelEvaluationError& e) {
        CHECK(e.label() == "broken");
    }
}

TEST_CASE("sum-of-monomials systems evaluate in both coordinates") {
    const auto sys = testing::mixed_sign_system();
    Vector x(2);
    x << 2.0, 3.0;
    const Vector f = sys.evaluate(x);
    CHECK(f(0) == doctest::Approx(2.0 + 9.0 / 2.0));
    CHECK(f(1) == doctest::Approx(std::sqrt(6.0)));
    const Vector g = log_transform(x.array().log().matrix(), sys);
    CHECK(g(0) == doctest::Approx(std::log(6.5)));
    CHECK(g(1) == doctest::Approx(0.5 * std::log(6.0)));
}

TEST_CASE("analytic elasticities match the hand-derived formula and central differences") {
    const auto sys = testing::mixed_sign_system();
    REQUIRE(sys.has_analytic_elasticity());
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Vector x(2);
        x << std::exp(testing::uniform(rng, -2, 2)), std::exp(testing::uniform(rng, -2, 2));
        const StateVector s(x, sys.shared_labels());
        const auto a = elasticity_at(sys, s);
        CHECK(a.method() == DiffMethod::analytic);
        const double x1 = x(0) * x(0), x2 = x(1) * x(1);
        CHECK(a(0, 0) == doctest::Approx((x1 - x2) / (x1 + x2)));
        CHECK(a(0, 1) == doctest::Approx(2 * x2 / (x1 + x2)));
        CHECK(a(1, 0) == doctest::Approx(0.5));
        CHECK(a(1, 1) == doctest::Approx(0.5));
        const auto n = numeric_elasticity_at(sys, s);
        CHECK(n.method() == DiffMethod::numeric);
        CHECK((a.entries() - n.entries()).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("exact zeros survive central differences") {
    const auto sys = testing::swap_system();
    const StateVector x(Vector::Constant(2, 1.7), sys.shared_labels());
    const auto d = numeric_elasticity_at(sys, x);
    CHECK(d(0, 0) == 0.0);
    CHECK(d(1, 1) == 0.0);
    CHECK(d(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("black-box systems fall back to numeric elasticities") {
    const auto sys = testing::mixed_sign_black_box();
    CHECK_FALSE(sys.has_analytic_elasticity());
    CHECK(sys.structure() == nullptr);
    const StateVector x(Vector::Constant(2, 1.0), sys.shared_labels());
    const auto d = elasticity_at(sys, x);
    CHECK(d.method() == DiffMethod::numeric);
    CHECK(d(0, 0) == doctest::Approx(0.0).epsilon(1e-8).scale(1.0));
    CHECK(d(0, 1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("non-finite differences raise DifferentiationError") {
    PositiveSystem sys("cliff", {"x"}, [](const Vector& x) {
        Vector f(1);
        f(0) = x(0) > 1.0 ? std::numeric_limits<double>::max() : 1.0;
        return f;
    });
    const auto cliff = sys.with_log_map([](const Vector& z) {
        Vector g(1);
        // finite values whose difference overflows
        g(0) = z(0) > 0.0 ? std::numeric_limits<double>::max() : -std::numeric_limits<double>::max();
        return g;
    });
    const StateVector x(Vector::Ones(1), sys.shared_labels());
    CHECK_THROWS_AS(numeric_elasticity_at(cliff, x), DifferentiationError);
}
