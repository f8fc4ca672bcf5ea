#include <doctest.h>

#include "posfix/error.hpp"
#include "posfix/trade.hpp"
#include "support.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace posfix;
using namespace posfix::trade;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double abs_cos(const Vector& a, const Vector& b) {
    return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

double max_rel_diff(const Outcomes& a, const Outcomes& b) {
    const auto fa = a.flatten(), fb = b.flatten();
    REQUIRE(fa.size() == fb.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < fa.size(); ++k) {
        REQUIRE(fa[k].first == fb[k].first);
        // shares that vanish in one model and are ~1e-30 in the other count as equal
        const double scale = std::max(std::abs(fa[k].second), 1e-20);
        worst = std::max(worst, std::abs(fa[k].second - fb[k].second) / scale);
    }
    return worst;
}

ModelSolution solved(const TradeModel& m) {
    SolveOptions opts;
    opts.tol = 1e-12;
    auto s = solve_model(m, opts);
    REQUIRE(s.solve.status == SolveStatus::converged);
    REQUIRE(s.outcomes);
    return s;
}

}  // namespace

TEST_CASE("gamma constant against high-precision reference values") {
    // Gamma((theta + 1 - sigma) / theta)^(-theta / (1 - sigma)), evaluated at 30 digits
    CHECK(gamma_constant(4.0, 2.0) == doctest::Approx(2.2549409936695867445).epsilon(1e-13));
    CHECK(gamma_constant(6.53, 3.8) == doctest::Approx(2.8173311105570027824).epsilon(1e-13));
    CHECK(gamma_constant(8.0, 1.5) == doctest::Approx(1.8780883562829185983).epsilon(1e-13));
    CHECK(gamma_constant(2.0, 2.9) == doctest::Approx(22.762990674953048524).epsilon(1e-13));
}

TEST_CASE("gamma constant limit and branch continuity") {
    // sigma -> 1 gives exp(Euler-Mascheroni)
    CHECK(gamma_constant(4.0, 1.0 + 1e-12) == doctest::Approx(1.7810724179901979852).epsilon(1e-10));
    // the series branch hands over at (sigma - 1) / theta = 0.05
    const double theta = 4.0;
    CHECK(gamma_constant(theta, 1.0 + theta * (0.05 - 1e-12)) == doctest::Approx(1.8577682556474752233).epsilon(1e-13));
    CHECK(gamma_constant(theta, 1.0 + theta * (0.05 + 1e-12)) == doctest::Approx(1.8577682556506895923).epsilon(1e-13));
    CHECK(gamma_constant(theta, 1.0 + theta * 0.049) == doctest::Approx(1.8561634102869512295).epsilon(1e-13));
    CHECK(gamma_constant(theta, 1.0 + theta * 0.051) == doctest::Approx(1.8593761419602855623).epsilon(1e-13));
    CHECK_THROWS_AS(gamma_constant(4.0, 1.0), ParameterError);
    CHECK_THROWS_AS(gamma_constant(0.0, 2.0), ParameterError);
    CHECK_THROWS_AS(gamma_constant(1.0, 2.5), ParameterError);
}

TEST_CASE("parameter validation names the offending field") {
    std::mt19937_64 rng(71);
    auto m = testing::random_multi_sector(rng, 3, 2);
    CHECK_NOTHROW(m.validate());

    auto bad_alpha = m;
    bad_alpha.alpha(1, 0) -= 0.1;
    try {
        bad_alpha.validate();
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("alpha row 2") != std::string::npos);
        CHECK(msg.find("C2") != std::string::npos);
    }

    auto bad_tau = m;
    bad_tau.tau[1](0, 0) = kInf;
    CHECK_THROWS_AS(bad_tau.validate(), ParameterError);
    auto low_tau = m;
    low_tau.tau[0](0, 1) = 0.9;
    CHECK_THROWS_AS(low_tau.validate(), ParameterError);
    auto bad_theta = m;
    bad_theta.sigma(1) = bad_theta.theta(1) + 1.5;
    CHECK_THROWS_AS(bad_theta.validate(), ParameterError);

    auto one = testing::random_one_sector(rng, 3);
    one.gamma(2) = 1.2;
    CHECK_THROWS_AS(one.validate(), ParameterError);

    auto general = testing::general_from(m);
    general.gamma_labor(0, 1) = 0.7;
    CHECK_THROWS_AS(general.validate(), ParameterError);
    general.gamma_io[1](0, 0) = 0.3;
    CHECK_NOTHROW(general.validate());
}

TEST_CASE("disconnected trade graphs are rejected with the blocs listed") {
    std::mt19937_64 rng(73);
    auto p = testing::random_one_sector(rng, 4);
    for (Eigen::Index i : {0, 1})
        for (Eigen::Index j : {2, 3}) p.tau(i, j) = p.tau(j, i) = kInf;
    try {
        p.validate();
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("{C1,C2}") != std::string::npos);
        CHECK(msg.find("{C3,C4}") != std::string::npos);
    }
    CHECK_NOTHROW(p.validate(false));
    CHECK(trade_blocs(p.countries, {p.tau}).size() == 2);
    // one-way links make a single bloc only when they close a cycle
    p.tau(0, 2) = 2.0;
    CHECK(trade_blocs(p.countries, {p.tau}).size() == 2);
    p.tau(3, 1) = 2.0;
    CHECK(trade_blocs(p.countries, {p.tau}).size() == 1);
}

TEST_CASE("closed-form scaling exponents are eigenvectors of the elasticity matrix") {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 5; ++trial) {
        const auto p = testing::random_one_sector(rng, 3 + trial);
        const auto sys = build_one_sector(p);
        const auto samples = draw_samples(sys, 3, static_cast<std::uint64_t>(trial));
        const auto cert = find_scaling_exponent(sys, std::span<const StateVector>(samples));
        REQUIRE(cert);
        CHECK(abs_cos(cert->u, one_sector_scaling_exponent(p)) >= 1.0 - 1e-10);

        const auto q = testing::random_multi_sector(rng, 3, 1 + trial % 4);
        const auto msys = build_multi_sector(q);
        const auto ms = draw_samples(msys, 3, static_cast<std::uint64_t>(trial));
        const auto mcert = find_scaling_exponent(msys, std::span<const StateVector>(ms));
        REQUIRE(mcert);
        CHECK(abs_cos(mcert->u, multi_sector_scaling_exponent(q)) >= 1.0 - 1e-10);
    }
}

TEST_CASE("swapped one-sector exponent assignment is not a scaling law") {
    // OMEGA -> -theta / (1 + theta), P -> 1: the block values exchanged
    std::mt19937_64 rng(83);
    const auto p = testing::random_one_sector(rng, 3);
    const auto sys = build_one_sector(p);
    Vector swapped(6);
    swapped.head(3).setConstant(-p.theta / (1.0 + p.theta));
    swapped.tail(3).setConstant(1.0);
    const auto d = elasticity_at(sys, draw_samples(sys, 1, 0).front());
    CHECK((d.entries() * swapped - swapped).cwiseAbs().maxCoeff() > 1e-3);
    const Vector u = one_sector_scaling_exponent(p);
    CHECK((d.entries() * u - u).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("multi-sector exponent has the market-access and wage structure") {
    std::mt19937_64 rng(89);
    const auto p = testing::random_multi_sector(rng, 2, 3);
    const Vector u = multi_sector_scaling_exponent(p);
    const double Theta = p.Theta();
    // OMEGA_is ~ (1 + theta_s) / (1 + Theta), P_is ~ -theta_s / (1 + Theta), W ~ 1
    const double k = u(2 * 2 * 3);
    for (Eigen::Index i = 0; i < 2; ++i) {
        for (Eigen::Index s = 0; s < 3; ++s) {
            CHECK(u(i * 3 + s) == doctest::Approx(k * (1.0 + p.theta(s)) / (1.0 + Theta)));
            CHECK(u(6 + i * 3 + s) == doctest::Approx(-k * p.theta(s) / (1.0 + Theta)));
        }
        CHECK(u(12 + i) == doctest::Approx(k));
    }
    CHECK(u.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
}

TEST_CASE("equilibrium accounting identities") {
    std::mt19937_64 rng(97);
    for (int trial = 0; trial < 6; ++trial) {
        const TradeModel m = trial % 3 == 0   ? TradeModel(testing::random_one_sector(rng, 4))
                             : trial % 3 == 1 ? TradeModel(testing::random_multi_sector(rng, 3, 2))
                                              : TradeModel(testing::general_from(testing::random_multi_sector(rng, 3, 2)));
        const auto sol = solved(m);
        const Outcomes& o = *sol.outcomes;
        const Matrix gl = labor_shares(m);
        const Vector L = kind_of(m) == ModelKind::one_sector ? std::get<OneSectorParams>(m).L
                         : kind_of(m) == ModelKind::multi_sector ? std::get<MultiSectorParams>(m).L
                                                                 : std::get<GeneralParams>(m).base.L;
        for (Eigen::Index s = 0; s < o.S(); ++s) {
            const Matrix& pi = o.pi[static_cast<std::size_t>(s)];
            for (Eigen::Index j = 0; j < o.J(); ++j) CHECK(std::abs(pi.col(j).sum() - 1.0) <= 1e-12);
            const Vector sales = pi * o.E.col(s);
            for (Eigen::Index i = 0; i < o.J(); ++i) CHECK(sales(i) == doctest::Approx(o.R(i, s)).epsilon(1e-8));
        }
        for (Eigen::Index i = 0; i < o.J(); ++i) {
            double wage_bill = 0.0;
            for (Eigen::Index s = 0; s < o.S(); ++s) wage_bill += gl(i, s) * o.R(i, s);
            CHECK(o.w(i) * L(i) == doctest::Approx(wage_bill).epsilon(1e-8));
        }
        if (kind_of(m) == ModelKind::one_sector) {
            for (Eigen::Index i = 0; i < o.J(); ++i) CHECK(o.E(i, 0) == doctest::Approx(o.R(i, 0)).epsilon(1e-8));
        }
    }
}

TEST_CASE("single-sector multi-sector model reproduces the one-sector model with labor-only costs") {
    std::mt19937_64 rng(101);
    auto one = testing::random_one_sector(rng, 4);
    one.gamma.setOnes();
    MultiSectorParams multi;
    multi.countries = one.countries;
    multi.sectors = {"all"};
    multi.A = one.A;
    multi.tau = {one.tau};
    multi.alpha = Matrix::Ones(4, 1);
    multi.L = one.L;
    multi.theta = Vector::Constant(1, one.theta);
    multi.sigma = Vector::Constant(1, one.sigma);
    CHECK(max_rel_diff(*solved(one).outcomes, *solved(multi).outcomes) <= 1e-8);
}

TEST_CASE("general framework without intermediates reproduces the multi-sector model") {
    std::mt19937_64 rng(103);
    const auto multi = testing::random_multi_sector(rng, 3, 3);
    const auto a = solved(multi);
    const auto b = solved(testing::general_from(multi));
    CHECK(max_rel_diff(*a.outcomes, *b.outcomes) <= 1e-8);
    CHECK((a.solve.x_star.values() - b.solve.x_star.values()).cwiseQuotient(a.solve.x_star.values()).cwiseAbs().maxCoeff() <=
          1e-8);
}

TEST_CASE("intermediate inputs enter unit costs and expenditure") {
    std::mt19937_64 rng(107);
    auto g = testing::general_from(testing::random_multi_sector(rng, 3, 2));
    for (Eigen::Index i = 0; i < 3; ++i) {
        g.gamma_labor(i, 0) = 0.6;
        g.gamma_io[0](i, 1) = 0.4;
    }
    SolveOptions opts;
    opts.tol = 1e-12;
    const auto sol = solve_model(g, opts);
    // intermediates may break sign-consistency, so convergence is not guaranteed; when it converges the identities hold
    if (sol.solve.status == SolveStatus::converged) {
        const Outcomes& o = *sol.outcomes;
        for (Eigen::Index i = 0; i < 3; ++i) {
            CHECK(o.c(i, 0) == doctest::Approx(std::pow(o.w(i), 0.6) * std::pow(o.P(i, 1), 0.4)).epsilon(1e-12));
            CHECK(o.E(i, 1) == doctest::Approx(g.base.alpha(i, 1) * o.w(i) * g.base.L(i) + 0.4 * o.R(i, 0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("prohibitive trade costs approach the infinite-cost limit") {
    std::mt19937_64 rng(109);
    auto open = testing::random_one_sector(rng, 3);
    auto closed = open;
    auto huge = open;
    closed.tau(0, 2) = kInf;
    huge.tau(0, 2) = 1e8;
    const auto a = solved(closed);
    const auto b = solved(huge);
    CHECK(a.outcomes->pi[0](0, 2) == 0.0);
    CHECK(b.outcomes->pi[0](0, 2) < 1e-25);
    CHECK(max_rel_diff(*a.outcomes, *b.outcomes) <= 1e-8);
}

TEST_CASE("outcome recovery refuses stale states") {
    std::mt19937_64 rng(113);
    const auto p = testing::random_one_sector(rng, 3);
    const auto sys = build_one_sector(p);
    CHECK_THROWS_AS(recover_outcomes(p, StateVector(Vector::Ones(6), sys.shared_labels())), StaleStateError);
}

TEST_CASE("counterfactual edits") {
    const auto cfg = cli::load_config(testing::fixture("symmetric"));
    const TradeModel base = cli::load_parameters(cfg);

    SUBCASE("null shock leaves every outcome unchanged") {
        const auto r = counterfactual(base, {});
        REQUIRE(!r.changes.empty());
        for (const auto& c : r.changes) CHECK(c.relative_change == 0.0);
    }
    SUBCASE("uniform productivity doubling leaves trade shares unchanged") {
        Shock s{{{"A", {std::nullopt}, ParamEdit::Op::scale, 2.0}}};
        const auto r = counterfactual(base, s);
        bool welfare_up = true;
        for (const auto& c : r.changes) {
            if (c.key.rfind("pi", 0) == 0) CHECK(std::abs(c.relative_change) <= 1e-8);
            if (c.key.rfind("U", 0) == 0) welfare_up = welfare_up && c.relative_change > 0.0;
        }
        CHECK(welfare_up);
    }
    SUBCASE("higher cost of shipping from 1 to 2 lowers 2's import share from 1") {
        Shock s{{{"tau", {0, 1}, ParamEdit::Op::set, 1.8}}};
        const auto r = counterfactual(base, s);
        double d12 = 0.0, d11 = 0.0;
        for (const auto& c : r.changes) {
            if (c.key == "pi[1][2][1]") d12 = c.relative_change;
            if (c.key == "pi[2][2][1]") d11 = c.relative_change;
        }
        CHECK(d12 < 0.0);
        CHECK(d11 > 0.0);
    }
    SUBCASE("invalid edits are rejected before solving") {
        CHECK_THROWS_AS(apply_shock(base, {{{"gamma", {0}, ParamEdit::Op::set, 1.5}}}), ParameterError);
        CHECK_THROWS_AS(apply_shock(base, {{{"A", {5}, ParamEdit::Op::set, 1.0}}}), ParameterError);
        CHECK_THROWS_AS(apply_shock(base, {{{"alpha", {0}, ParamEdit::Op::set, 1.0}}}), ParameterError);
        CHECK_THROWS_AS(apply_shock(base, {{{"tau", {0}, ParamEdit::Op::set, 1.0}}}), ParameterError);
        CHECK_THROWS_AS(apply_shock(base, {{{"tau", {0, 1}, ParamEdit::Op::set, kInf}, {"tau", {1, 0}, ParamEdit::Op::set, kInf}}}),
                        ParameterError);
    }
    SUBCASE("wildcards reach every entry") {
        const auto shocked = apply_shock(base, {{{"tau", {0, std::nullopt}, ParamEdit::Op::scale, 1.0}, {"L", {std::nullopt}, ParamEdit::Op::set, 3.0}}});
        CHECK(std::get<OneSectorParams>(shocked).L.isApproxToConstant(3.0));
        const auto doubled = apply_shock(base, {{{"tau", {std::nullopt, std::nullopt}, ParamEdit::Op::scale, 2.0}}});
        CHECK(std::get<OneSectorParams>(doubled).tau(0, 0) == 2.0);
        CHECK(std::get<OneSectorParams>(doubled).tau(1, 0) == doctest::Approx(3.0));
    }
}

TEST_CASE("relative change conventions") {
    CHECK(relative_change(0.0, 0.0) == 0.0);
    CHECK(relative_change(2.0, 3.0) == doctest::Approx(0.5));
    CHECK(std::isinf(relative_change(0.0, 1.0)));
}
