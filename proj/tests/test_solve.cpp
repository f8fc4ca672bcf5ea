#include <doctest.h>

#include "posfix/error.hpp"
#include "posfix/solve.hpp"
#include "support.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace posfix;

namespace {

SolveResult solve_one_sector(const trade::OneSectorParams& p, const std::optional<StateVector>& x0 = std::nullopt,
                             SolveOptions opts = {}) {
    const auto sys = trade::build_one_sector(p);
    const StateVector start = x0 ? *x0 : StateVector(Vector::Ones(sys.dimension()), sys.shared_labels());
    return iterate(sys, start, trade::one_sector_scaling_exponent(p), opts);
}

}  // namespace

TEST_CASE("single-country one-sector model matches its closed form") {
    trade::OneSectorParams p;
    p.countries = {"solo"};
    p.A = Vector::Constant(1, 1.3);
    p.tau = Matrix::Ones(1, 1);
    p.gamma = Vector::Constant(1, 0.6);
    p.L = Vector::Constant(1, 2.0);
    p.theta = 5.0;
    p.sigma = 2.5;
    const auto r = solve_one_sector(p);
    REQUIRE(r.status == SolveStatus::converged);
    // with OMEGA = 1: P = (kappa A (gamma/L)^(-theta gamma/d))^(d / (gamma (1 + theta))), d = 1 + theta gamma
    const double d = 1.0 + p.theta * p.gamma(0);
    const double base = trade::gamma_constant(p.theta, p.sigma) * p.A(0) *
                        std::pow(p.gamma(0) / p.L(0), -p.theta * p.gamma(0) / d);
    const double expected = std::pow(base, d / (p.gamma(0) * (1.0 + p.theta)));
    CHECK(r.x_star[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.x_star[1] == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("symmetric two-country model matches the symmetric reduction") {
    const auto cfg = cli::load_config(testing::fixture("symmetric"));
    const auto p = std::get<trade::OneSectorParams>(cli::load_parameters(cfg));
    const auto sys = trade::build_one_sector(p);
    // On the diagonal OMEGA_1 = OMEGA_2 = 1, P_1 = P_2 = P; solve F_P(P) = P by bisection.
    auto excess = [&](double P) {
        Vector x(4);
        x << 1.0, 1.0, P, P;
        return std::log(sys.evaluate(x)(2)) - std::log(P);
    };
    double lo = 1e-3, hi = 1e3;
    REQUIRE(excess(lo) * excess(hi) < 0.0);
    for (int k = 0; k < 200; ++k) {
        const double mid = std::sqrt(lo * hi);
        (excess(mid) * excess(lo) > 0.0 ? lo : hi) = mid;
    }
    const double P = std::sqrt(lo * hi);
    Vector x(4);
    x << 1.0, 1.0, P, P;
    CHECK(sys.evaluate(x)(0) == doctest::Approx(1.0).epsilon(1e-10));

    const auto r = iterate(sys, StateVector(Vector::Ones(4), sys.shared_labels()), trade::one_sector_scaling_exponent(p));
    REQUIRE(r.status == SolveStatus::converged);
    CHECK(r.x_star[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.x_star[2] == doctest::Approx(P).epsilon(1e-9));
    CHECK(r.x_star[3] == doctest::Approx(P).epsilon(1e-9));
}

TEST_CASE("converged states satisfy the raw fixed-point equation") {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 5; ++trial) {
        const auto p = testing::random_one_sector(rng, 3 + trial);
        const auto sys = trade::build_one_sector(p);
        const auto r = solve_one_sector(p);
        REQUIRE(r.status == SolveStatus::converged);
        CHECK(r.residual <= 1e-10);
        CHECK(fixed_point_residual(sys, r.x_star) <= 1e-10);
        CHECK(r.x_star[0] == doctest::Approx(1.0).epsilon(1e-14));
        REQUIRE(r.decay_rate);
        CHECK(*r.decay_rate > 0.0);
        CHECK(*r.decay_rate < 1.0);
        REQUIRE(!r.trace.empty());
        CHECK(r.trace.back().step_quotient <= 1e-10);
        CHECK(static_cast<int>(r.trace.size()) == r.iterations);
    }
}

TEST_CASE("random starts agree up to scale") {
    std::mt19937_64 rng(53);
    const auto p = testing::random_one_sector(rng, 5);
    const auto sys = trade::build_one_sector(p);
    const Vector u = trade::one_sector_scaling_exponent(p);
    const auto starts = draw_samples(sys, 6, 77);
    std::vector<StateVector> ends;
    for (const auto& x0 : starts) {
        const auto r = iterate(sys, x0, u);
        REQUIRE(r.status == SolveStatus::converged);
        ends.push_back(r.x_star);
    }
    for (std::size_t a = 0; a < ends.size(); ++a) {
        for (std::size_t b = a + 1; b < ends.size(); ++b) {
            CHECK(up_to_scale_distance(ends[a], ends[b], u) <= 1e-8);
            CHECK((ends[a].values() - ends[b].values()).cwiseQuotient(ends[a].values()).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("log map is non-expansive in the |u| gauge") {
    std::mt19937_64 rng(57);
    for (int trial = 0; trial < 4; ++trial) {
        const auto p = testing::random_one_sector(rng, 3 + trial);
        const auto sys = trade::build_one_sector(p);
        const GaugeVector v(trade::one_sector_scaling_exponent(p).cwiseAbs());
        for (int k = 0; k < 50; ++k) {
            Vector z(sys.dimension()), w(sys.dimension());
            for (Eigen::Index j = 0; j < z.size(); ++j) {
                z(j) = testing::uniform(rng, -3, 3);
                w(j) = testing::uniform(rng, -3, 3);
            }
            const double before = gauge_norm(z - w, v);
            const double after = gauge_norm(log_transform(z, sys) - log_transform(w, sys), v);
            CHECK(after <= before * (1.0 + 1e-10));
        }
    }
}

TEST_CASE("perturbed equilibria stay within their initial quotient distance") {
    std::mt19937_64 rng(59);
    const auto p = testing::random_one_sector(rng, 4);
    const auto sys = trade::build_one_sector(p);
    const Vector u = trade::one_sector_scaling_exponent(p);
    const auto star = solve_one_sector(p);
    REQUIRE(star.status == SolveStatus::converged);
    const GaugeVector v(u.cwiseAbs());
    const Vector zs = star.x_star.log();
    for (double eps : {1e-1, 1e-3}) {
        Vector z = zs;
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) += eps * testing::uniform(rng, -1, 1) * v.values()(j);
        // iterate the reference too, so its own 1e-10 error does not enter the comparison
        Vector ref = zs;
        const double d0 = quotient_norm(z - ref, u, v);
        double prev = d0;
        for (int n = 0; n < 200; ++n) {
            z = log_transform(z, sys);
            ref = log_transform(ref, sys);
            const double d = quotient_norm(z - ref, u, v);
            CHECK(d <= prev * (1.0 + 1e-10) + 1e-15);
            prev = d;
        }
        CHECK(prev < 1e-3 * d0);
    }
}

TEST_CASE("budget exhaustion and evaluation failure are reported as statuses") {
    std::mt19937_64 rng(61);
    const auto p = testing::random_one_sector(rng, 3);
    SolveOptions opts;
    opts.max_iter = 1;
    const auto r = solve_one_sector(p, std::nullopt, opts);
    CHECK(r.status == SolveStatus::budget_exhausted);
    CHECK(r.trace.size() == 1);
    CHECK(r.iterations == 1);

    PositiveSystem blowup("blowup", {"a", "b"}, [](const Vector& x) {
        Vector f = x.array().square();
        if (x(0) > 1e100) f(0) = 0.0;
        return f;
    });
    Vector x0(2);
    x0 << 2.0, 2.0;
    const auto b = iterate(blowup, StateVector(x0, blowup.shared_labels()), std::nullopt);
    CHECK(b.status == SolveStatus::evaluation_failed);
    CHECK(b.message.find("a") != std::string::npos);
}

TEST_CASE("damping changes the path but not the limit") {
    std::mt19937_64 rng(63);
    const auto p = testing::random_one_sector(rng, 3);
    SolveOptions damped;
    damped.damping = 0.5;
    const auto a = solve_one_sector(p);
    const auto b = solve_one_sector(p, std::nullopt, damped);
    REQUIRE(a.status == SolveStatus::converged);
    REQUIRE(b.status == SolveStatus::converged);
    CHECK(b.iterations != a.iterations);
    CHECK((a.x_star.values() - b.x_star.values()).cwiseQuotient(a.x_star.values()).cwiseAbs().maxCoeff() <= 1e-8);

    SolveOptions bad;
    bad.damping = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInputError);
    bad = {};
    bad.tol = -1;
    CHECK_THROWS_AS(bad.validate(), InvalidInputError);
}

TEST_CASE("numeraire rules pin the free scale") {
    auto labels = make_labels({"OMEGA[1][1]", "OMEGA[2][1]", "P[1][1]", "P[2][1]"});
    Vector x(4), u(4);
    x << 2.0, 3.0, 0.5, 0.7;
    u << 1.0, 1.0, -0.8, -0.8;
    const StateVector s(x, labels);

    const auto first = normalize(s, u, NumeraireRule::parse("first"));
    CHECK(first.x[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(up_to_scale_distance(s, first.x, u) <= 1e-14);

    const auto named = normalize(s, u, NumeraireRule::parse("label:P[2][1]"));
    CHECK(named.x[3] == doctest::Approx(1.0).epsilon(1e-15));

    const auto geo = normalize(s, u, NumeraireRule::parse("geomean:P"));
    CHECK(std::sqrt(geo.x[2] * geo.x[3]) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(geo.x[0] / geo.x[1] == doctest::Approx(2.0 / 3.0));

    const auto all = normalize(s, u, NumeraireRule::parse("geomean"));
    CHECK(up_to_scale_distance(s, all.x, u) <= 1e-14);

    Vector u0 = u;
    u0(0) = 0.0;
    CHECK_THROWS_AS(normalize(s, u0, NumeraireRule::parse("first")), ImpossibleNormalizationError);
    CHECK_THROWS_AS(NumeraireRule::parse("median"), InvalidInputError);
    CHECK_THROWS_AS(normalize(s, u, NumeraireRule::parse("label:W[9]")), InvalidInputError);
    CHECK(NumeraireRule::parse("geomean:P").to_string() == "geomean:P");
}

TEST_CASE("up-to-scale distance vanishes exactly along the scaling ray") {
    auto labels = make_labels({"a", "b", "c"});
    Vector x(3), u(3);
    x << 1.5, 0.2, 7.0;
    u << 1.0, -0.5, 0.25;
    const StateVector s(x, labels);
    for (double c : {0.1, 3.0, 40.0}) {
        const StateVector y(x.cwiseProduct(u.unaryExpr([c](double e) { return std::pow(c, e); })), labels);
        CHECK(up_to_scale_distance(s, y, u) <= 1e-13);
    }
    Vector bumped = x;
    bumped(1) *= 1.01;
    CHECK(up_to_scale_distance(s, StateVector(bumped, labels), u) > 1e-4);
}

TEST_CASE("trace table format") {
    std::ostringstream os;
    write_trace_csv(os, {{1, 0.5, 0.25}, {2, 0.125, 1e-17}});
    CHECK(os.str() == "iteration,step_gauge,step_quotient\n1,0.5,0.25\n2,0.125,1.0000000000000001e-17\n");
}
