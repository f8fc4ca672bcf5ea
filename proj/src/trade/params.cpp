#include "posfix/error.hpp"
#include "posfix/trade.hpp"

#include <fmt/format.h>

#include <cmath>

namespace posfix::trade {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw ParameterError(message);
}

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

void check_names(const std::vector<std::string>& names, Eigen::Index n, const char* what) {
    require(static_cast<Eigen::Index>(names.size()) == n,
            fmt::format("{}: expected {} names, got {}", what, n, names.size()));
}

void check_tau(const Matrix& tau, Eigen::Index J, const std::string& field) {
    require(tau.rows() == J && tau.cols() == J, fmt::format("{}: expected a {}x{} matrix", field, J, J));
    for (Eigen::Index i = 0; i < J; ++i) {
        for (Eigen::Index j = 0; j < J; ++j) {
            const double t = tau(i, j);
            const bool ok = i == j ? (std::isfinite(t) && t >= 1.0) : (t >= 1.0);  // +inf passes t >= 1
            require(ok, fmt::format("{}[{}][{}] = {} must be >= 1{}", field, i + 1, j + 1, t,
                                    i == j ? " and finite on the diagonal" : " or inf"));
        }
    }
}

void check_connected(const std::vector<std::string>& countries, const std::vector<Matrix>& tau) {
    const auto blocs = trade_blocs(countries, tau);
    if (blocs.size() <= 1) return;
    std::string listing;
    for (const auto& b : blocs) {
        listing += " {";
        for (std::size_t k = 0; k < b.size(); ++k) listing += (k ? "," : "") + b[k];
        listing += "}";
    }
    throw ParameterError("tau: trade graph is not strongly connected; blocs:" + listing);
}

void check_elasticities(double theta, double sigma, const std::string& suffix) {
    require(positive_finite(theta), "theta" + suffix + " must be positive");
    require(sigma > 1.0 && std::isfinite(sigma), "sigma" + suffix + " must exceed 1");
    require(theta > sigma - 1.0, "theta" + suffix + " must exceed sigma" + suffix + " - 1");
}

}  // namespace

std::vector<std::vector<std::string>> trade_blocs(const std::vector<std::string>& countries,
                                                  const std::vector<Matrix>& tau) {
    const auto J = static_cast<Eigen::Index>(countries.size());
    Matrix adj = Matrix::Zero(J, J);
    for (const auto& t : tau) {
        for (Eigen::Index i = 0; i < J; ++i) {
            for (Eigen::Index j = 0; j < J; ++j) {
                if (std::isfinite(t(i, j))) adj(j, i) = 1.0;
            }
        }
    }
    std::vector<std::vector<std::string>> out;
    for (const auto& comp : strongly_connected_components(NonnegMatrix(adj))) {
        std::vector<std::string> names;
        for (auto k : comp) names.push_back(countries[k]);
        out.push_back(std::move(names));
    }
    return out;
}

void OneSectorParams::validate(bool require_connected) const {
    const Eigen::Index n = J();
    require(n >= 1, "A: at least one country is required");
    check_names(countries, n, "countries");
    for (Eigen::Index i = 0; i < n; ++i) require(positive_finite(A(i)), fmt::format("A[{}] must be positive", i + 1));
    require(gamma.size() == n, fmt::format("gamma: expected {} entries", n));
    require(L.size() == n, fmt::format("L: expected {} entries", n));
    for (Eigen::Index i = 0; i < n; ++i) {
        require(gamma(i) >= 0.0 && gamma(i) <= 1.0, fmt::format("gamma[{}] = {} must lie in [0, 1]", i + 1, gamma(i)));
        require(positive_finite(L(i)), fmt::format("L[{}] must be positive", i + 1));
    }
    check_elasticities(theta, sigma, "");
    check_tau(tau, n, "tau");
    if (require_connected) check_connected(countries, {tau});
}

void MultiSectorParams::validate(bool require_connected) const {
    const Eigen::Index n = J();
    const Eigen::Index s_count = S();
    require(n >= 1 && s_count >= 1, "A: at least one country and one sector are required");
    check_names(countries, n, "countries");
    check_names(sectors, s_count, "sectors");
    require(alpha.rows() == n && alpha.cols() == s_count, fmt::format("alpha: expected a {}x{} matrix", n, s_count));
    require(L.size() == n, fmt::format("L: expected {} entries", n));
    require(theta.size() == s_count && sigma.size() == s_count,
            fmt::format("theta/sigma: expected {} sector values", s_count));
    require(static_cast<Eigen::Index>(tau.size()) == s_count, fmt::format("tau: expected {} sector files", s_count));
    for (Eigen::Index s = 0; s < s_count; ++s) {
        check_elasticities(theta(s), sigma(s), fmt::format(".{}", s + 1));
        check_tau(tau[static_cast<std::size_t>(s)], n, fmt::format("tau.s{}", s + 1));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        require(positive_finite(L(i)), fmt::format("L[{}] must be positive", i + 1));
        double row = 0.0;
        for (Eigen::Index s = 0; s < s_count; ++s) {
            require(positive_finite(A(i, s)), fmt::format("A[{}][{}] must be positive", i + 1, s + 1));
            require(alpha(i, s) >= 0.0 && alpha(i, s) <= 1.0,
                    fmt::format("alpha[{}][{}] = {} must lie in [0, 1]", i + 1, s + 1, alpha(i, s)));
            row += alpha(i, s);
        }
        require(std::abs(row - 1.0) <= 1e-12,
                fmt::format("alpha row {} ({}) sums to {:.17g}, expected 1", i + 1, countries[static_cast<std::size_t>(i)], row));
    }
    if (require_connected) check_connected(countries, tau);
    // Every market-access term needs at least one buyer.
    for (Eigen::Index s = 0; s < s_count; ++s) {
        for (Eigen::Index i = 0; i < n; ++i) {
            bool buyer = false;
            for (Eigen::Index j = 0; j < n && !buyer; ++j) {
                buyer = std::isfinite(tau[static_cast<std::size_t>(s)](i, j)) && alpha(j, s) > 0.0;
            }
            require(buyer, fmt::format("alpha: sector {} output of country {} has no reachable buyer", s + 1, i + 1));
        }
    }
}

void GeneralParams::validate(bool require_connected) const {
    base.validate(require_connected);
    const Eigen::Index n = J();
    const Eigen::Index s_count = S();
    require(gamma_labor.rows() == n && gamma_labor.cols() == s_count,
            fmt::format("gamma_labor: expected a {}x{} matrix", n, s_count));
    require(static_cast<Eigen::Index>(gamma_io.size()) == s_count,
            fmt::format("gamma_io: expected {} sector files", s_count));
    for (Eigen::Index s = 0; s < s_count; ++s) {
        const Matrix& g = gamma_io[static_cast<std::size_t>(s)];
        require(g.rows() == n && g.cols() == s_count, fmt::format("gamma_io.s{}: expected a {}x{} matrix", s + 1, n, s_count));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        bool any_labor = false;
        for (Eigen::Index s = 0; s < s_count; ++s) {
            const double gl = gamma_labor(i, s);
            require(gl >= 0.0 && gl <= 1.0, fmt::format("gamma_labor[{}][{}] = {} must lie in [0, 1]", i + 1, s + 1, gl));
            any_labor = any_labor || gl > 0.0;
            double total = gl;
            for (Eigen::Index r = 0; r < s_count; ++r) {
                const double gi = gamma_io[static_cast<std::size_t>(s)](i, r);
                require(gi >= 0.0 && gi <= 1.0,
                        fmt::format("gamma_io.s{}[{}][{}] = {} must lie in [0, 1]", s + 1, i + 1, r + 1, gi));
                total += gi;
            }
            require(std::abs(total - 1.0) <= 1e-12,
                    fmt::format("cost shares of country {} sector {} sum to {:.17g}, expected 1", i + 1, s + 1, total));
        }
        require(any_labor, fmt::format("gamma_labor: country {} employs no labor in any sector", i + 1));
    }
}

ModelKind kind_of(const TradeModel& m) noexcept {
    return static_cast<ModelKind>(m.index());
}

const char* to_string(ModelKind k) noexcept {
    switch (k) {
        case ModelKind::one_sector: return "one-sector";
        case ModelKind::multi_sector: return "multi-sector";
        case ModelKind::general: return "general";
    }
    return "?";
}

void validate(const TradeModel& m, bool require_connected) {
    std::visit([require_connected](const auto& p) { p.validate(require_connected); }, m);
}

}  // namespace posfix::trade
