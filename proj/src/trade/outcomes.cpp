#include "posfix/error.hpp"
#include "posfix/trade.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace posfix::trade {

namespace {

// Import shares from log unit costs; tau = inf contributes an exact zero.
std::vector<Matrix> import_shares(const Matrix& A, const Matrix& log_c, const std::vector<Matrix>& tau,
                                  const Vector& theta) {
    const Eigen::Index J = A.rows(), S = A.cols();
    std::vector<Matrix> pi;
    for (Eigen::Index s = 0; s < S; ++s) {
        Matrix share = Matrix::Zero(J, J);
        const Matrix& t = tau[static_cast<std::size_t>(s)];
        for (Eigen::Index j = 0; j < J; ++j) {
            Vector logs = Vector::Constant(J, -std::numeric_limits<double>::infinity());
            double top = -std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < J; ++i) {
                if (!std::isfinite(t(i, j))) continue;
                logs(i) = std::log(A(i, s)) - theta(s) * (log_c(i, s) + std::log(t(i, j)));
                top = std::max(top, logs(i));
            }
            double sum = 0.0;
            for (Eigen::Index i = 0; i < J; ++i) {
                if (std::isfinite(logs(i))) {
                    share(i, j) = std::exp(logs(i) - top);
                    sum += share(i, j);
                }
            }
            share.col(j) /= sum;
        }
        pi.push_back(std::move(share));
    }
    return pi;
}

Vector welfare(const Vector& w, const Vector& L, const Matrix& P, const Matrix& alpha) {
    // U_i = prod_s (Q_is / alpha_is)^alpha_is with Q_is = alpha_is w_i L_i / P_is.
    Vector U(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        double log_deflator = 0.0;
        for (Eigen::Index s = 0; s < P.cols(); ++s) {
            if (alpha(i, s) > 0.0) log_deflator += alpha(i, s) * std::log(P(i, s));
        }
        U(i) = w(i) * L(i) * std::exp(-log_deflator);
    }
    return U;
}

}  // namespace

double relative_change(double a, double b) noexcept {
    if (a == b) return 0.0;
    if (a == 0.0) return b > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    return (b - a) / a;
}

std::vector<std::pair<std::string, double>> Outcomes::flatten() const {
    std::vector<std::pair<std::string, double>> out;
    const Eigen::Index nJ = J(), nS = S();
    for (Eigen::Index i = 0; i < nJ; ++i) out.emplace_back(fmt::format("w[{}]", i + 1), w(i));
    auto block = [&](const char* name, const Matrix& m) {
        for (Eigen::Index i = 0; i < nJ; ++i)
            for (Eigen::Index s = 0; s < nS; ++s) out.emplace_back(fmt::format("{}[{}][{}]", name, i + 1, s + 1), m(i, s));
    };
    block("c", c);
    block("R", R);
    block("E", E);
    block("P", P);
    for (Eigen::Index i = 0; i < nJ; ++i)
        for (Eigen::Index j = 0; j < nJ; ++j)
            for (Eigen::Index s = 0; s < nS; ++s)
                out.emplace_back(fmt::format("pi[{}][{}][{}]", i + 1, j + 1, s + 1), pi[static_cast<std::size_t>(s)](i, j));
    for (Eigen::Index i = 0; i < nJ; ++i) out.emplace_back(fmt::format("U[{}]", i + 1), U(i));
    return out;
}

Matrix labor_shares(const TradeModel& m) {
    switch (kind_of(m)) {
        case ModelKind::one_sector: return std::get<OneSectorParams>(m).gamma;
        case ModelKind::multi_sector: {
            const auto& p = std::get<MultiSectorParams>(m);
            return Matrix::Ones(p.J(), p.S());
        }
        case ModelKind::general: return std::get<GeneralParams>(m).gamma_labor;
    }
    throw Error("unknown model kind");
}

Outcomes recover_outcomes(const TradeModel& m, const StateVector& x_star, double tol) {
    const PositiveSystem sys = build_system(m);
    if (x_star.size() != sys.dimension()) throw InvalidInputError("recover_outcomes: state has the wrong dimension");
    const double residual = fixed_point_residual(sys, x_star);
    if (!(residual <= tol)) {
        throw StaleStateError(fmt::format("recover_outcomes: fixed-point residual {:.3e} exceeds {:.3e}", residual, tol));
    }
    const Vector& x = x_star.values();
    Outcomes o;

    if (kind_of(m) == ModelKind::one_sector) {
        const auto& p = std::get<OneSectorParams>(m);
        const Eigen::Index J = p.J();
        const double th = p.theta;
        o.w.resize(J);
        o.c.resize(J, 1);
        o.R.resize(J, 1);
        o.P.resize(J, 1);
        Matrix log_c(J, 1);
        for (Eigen::Index i = 0; i < J; ++i) {
            const double g = p.gamma(i);
            const double den = 1.0 + th * g;
            const double log_labor = g == 0.0 ? 0.0 : -(th * g / den) * std::log(g / p.L(i));
            const double log_r = log_labor + std::log(x(i)) / den + (1.0 - g) / den * std::log(x(J + i));
            const double log_p = -std::log(x(J + i)) / th;
            o.R(i, 0) = std::exp(log_r);
            o.P(i, 0) = std::exp(log_p);
            o.w(i) = g * o.R(i, 0) / p.L(i);
            // c_i = w_i^g P_i^(1-g); equivalently (Omega_i / R_i)^(1/theta)
            log_c(i, 0) = (std::log(x(i)) - log_r) / th;
            o.c(i, 0) = std::exp(log_c(i, 0));
        }
        o.E = o.R;
        o.pi = import_shares(p.A, log_c, {p.tau}, Vector::Constant(1, th));
        o.U = welfare(o.w, p.L, o.P, Matrix::Ones(J, 1));
        return o;
    }

    const MultiSectorParams& b =
        kind_of(m) == ModelKind::multi_sector ? std::get<MultiSectorParams>(m) : std::get<GeneralParams>(m).base;
    const Eigen::Index J = b.J(), S = b.S();
    const double Theta = b.Theta();
    const Matrix gl = labor_shares(m);
    o.w.resize(J);
    o.c.resize(J, S);
    o.R.resize(J, S);
    o.E.resize(J, S);
    o.P.resize(J, S);
    Matrix log_c(J, S);
    for (Eigen::Index i = 0; i < J; ++i) o.w(i) = std::exp(std::log(x(2 * J * S + i)) / (1.0 + Theta));
    for (Eigen::Index i = 0; i < J; ++i)
        for (Eigen::Index s = 0; s < S; ++s) o.P(i, s) = std::exp(-std::log(x(J * S + i * S + s)) / b.theta(s));
    for (Eigen::Index i = 0; i < J; ++i) {
        for (Eigen::Index s = 0; s < S; ++s) {
            double lc = gl(i, s) * std::log(o.w(i));
            if (kind_of(m) == ModelKind::general) {
                const auto& io = std::get<GeneralParams>(m).gamma_io[static_cast<std::size_t>(s)];
                for (Eigen::Index r = 0; r < S; ++r)
                    if (io(i, r) != 0.0) lc += io(i, r) * std::log(o.P(i, r));
            }
            log_c(i, s) = lc;
            o.c(i, s) = std::exp(lc);
            o.R(i, s) = x(i * S + s) * std::exp(-b.theta(s) * lc);
        }
    }
    for (Eigen::Index i = 0; i < J; ++i) {
        for (Eigen::Index s = 0; s < S; ++s) {
            double e = b.alpha(i, s) * o.w(i) * b.L(i);
            if (kind_of(m) == ModelKind::general) {
                const auto& io = std::get<GeneralParams>(m).gamma_io;
                for (Eigen::Index r = 0; r < S; ++r) e += io[static_cast<std::size_t>(r)](i, s) * o.R(i, r);
            }
            o.E(i, s) = e;
        }
    }
    o.pi = import_shares(b.A, log_c, b.tau, b.theta);
    o.U = welfare(o.w, b.L, o.P, b.alpha);
    return o;
}

}  // namespace posfix::trade
