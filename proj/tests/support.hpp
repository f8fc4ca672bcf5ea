#pragma once

// Shared generators and hand-built systems for the test suites.

#include "posfix/cli.hpp"
#include "posfix/trade.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace posfix::testing {

inline std::string fixture(const std::string& name) {
    return std::string(POSFIX_FIXTURES) + "/" + name + "/config.ini";
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("posfix_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::vector<std::string> country_names(Eigen::Index J) {
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < J; ++i) names.push_back("C" + std::to_string(i + 1));
    return names;
}

inline Matrix random_tau(std::mt19937_64& rng, Eigen::Index J) {
    Matrix tau(J, J);
    for (Eigen::Index i = 0; i < J; ++i) {
        for (Eigen::Index j = 0; j < J; ++j) tau(i, j) = i == j ? 1.0 : uniform(rng, 1.05, 3.0);
    }
    return tau;
}

inline trade::OneSectorParams random_one_sector(std::mt19937_64& rng, Eigen::Index J) {
    trade::OneSectorParams p;
    p.countries = country_names(J);
    p.A.resize(J);
    p.gamma.resize(J);
    p.L.resize(J);
    for (Eigen::Index i = 0; i < J; ++i) {
        p.A(i) = uniform(rng, 0.5, 2.0);
        p.gamma(i) = uniform(rng, 0.1, 0.9);
        p.L(i) = uniform(rng, 0.5, 2.0);
    }
    p.tau = random_tau(rng, J);
    p.theta = uniform(rng, 2.0, 8.0);
    p.sigma = uniform(rng, 1.2, std::min(4.0, p.theta + 0.9));
    return p;
}

inline trade::MultiSectorParams random_multi_sector(std::mt19937_64& rng, Eigen::Index J, Eigen::Index S) {
    trade::MultiSectorParams p;
    p.countries = country_names(J);
    for (Eigen::Index s = 0; s < S; ++s) p.sectors.push_back("S" + std::to_string(s + 1));
    p.A.resize(J, S);
    p.alpha.resize(J, S);
    p.L.resize(J);
    p.theta.resize(S);
    p.sigma.resize(S);
    for (Eigen::Index i = 0; i < J; ++i) {
        double total = 0.0;
        for (Eigen::Index s = 0; s < S; ++s) {
            p.A(i, s) = uniform(rng, 0.5, 2.0);
            p.alpha(i, s) = uniform(rng, 0.2, 1.0);
            total += p.alpha(i, s);
        }
        p.alpha.row(i) /= total;
        // exact unit row sums
        p.alpha(i, S - 1) = 1.0;
        for (Eigen::Index s = 0; s + 1 < S; ++s) p.alpha(i, S - 1) -= p.alpha(i, s);
        p.L(i) = uniform(rng, 0.5, 2.0);
    }
    for (Eigen::Index s = 0; s < S; ++s) {
        p.tau.push_back(random_tau(rng, J));
        p.theta(s) = uniform(rng, 2.0, 8.0);
        p.sigma(s) = uniform(rng, 1.2, std::min(4.0, p.theta(s) + 0.9));
    }
    return p;
}

/// Multi-sector model with every cost share on labor.
inline trade::GeneralParams general_from(const trade::MultiSectorParams& b) {
    trade::GeneralParams g;
    g.base = b;
    g.gamma_labor = Matrix::Ones(b.J(), b.S());
    for (Eigen::Index s = 0; s < b.S(); ++s) g.gamma_io.push_back(Matrix::Zero(b.J(), b.S()));
    return g;
}

/// F(x) = (x2, x1): scaling u = (1, 1), no self-interaction.
inline PositiveSystem swap_system() {
    MonomialStructure st;
    st.rows = {{MonomialTerm{0.0, {{1, 1.0}}}}, {MonomialTerm{0.0, {{0, 1.0}}}}};
    return PositiveSystem::from_monomials("swap", {"x1", "x2"}, st);
}

/// F1 = x1 + x2^2 / x1, F2 = sqrt(x1 x2). Scaling u = (1, 1); the elasticity
/// of F1 in x1 is (x1^2 - x2^2) / (x1^2 + x2^2), which changes sign at x1 = x2.
inline PositiveSystem mixed_sign_system() {
    MonomialStructure st;
    st.rows = {{MonomialTerm{0.0, {{0, 1.0}}}, MonomialTerm{0.0, {{0, -1.0}, {1, 2.0}}}},
               {MonomialTerm{0.0, {{0, 0.5}, {1, 0.5}}}}};
    return PositiveSystem::from_monomials("mixed-sign", {"x1", "x2"}, st);
}

/// Same map without the monomial structure, so certification stays sampled.
inline PositiveSystem mixed_sign_black_box() {
    return PositiveSystem("mixed-sign-black-box", {"x1", "x2"}, [](const Vector& x) {
        Vector f(2);
        f << x(0) + x(1) * x(1) / x(0), std::sqrt(x(0) * x(1));
        return f;
    });
}

/// F = (sqrt(x2), sqrt(x1)): a contraction in log space with no scaling law.
inline PositiveSystem contraction_system() {
    MonomialStructure st;
    st.rows = {{MonomialTerm{0.0, {{1, 0.5}}}}, {MonomialTerm{0.0, {{0, 0.5}}}}};
    return PositiveSystem::from_monomials("contraction", {"x1", "x2"}, st);
}

}  // namespace posfix::testing
