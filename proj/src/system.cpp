#include "posfix/system.hpp"

#include "posfix/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string_view>
#include <limits>

namespace posfix {

Labels make_labels(std::vector<std::string> names) {
    std::set<std::string_view> seen;
    for (const auto& n : names) {
        if (n.empty()) throw InvalidInputError("labels must be non-empty");
        if (!seen.insert(n).second) throw InvalidInputError("duplicate label " + n);
    }
    return std::make_shared<const std::vector<std::string>>(std::move(names));
}

StateVector::StateVector(Vector values, Labels labels) : x_(std::move(values)), labels_(std::move(labels)) {
    if (!labels_ || static_cast<Eigen::Index>(labels_->size()) != x_.size()) {
        throw InvalidInputError("state vector: label count does not match dimension");
    }
    for (Eigen::Index j = 0; j < x_.size(); ++j) {
        if (!(x_(j) > 0.0) || !std::isfinite(x_(j))) {
            throw InvalidInputError("state vector: coordinate " + (*labels_)[static_cast<std::size_t>(j)] +
                                    " is not strictly positive and finite");
        }
    }
}

StateVector StateVector::from_log(const Vector& z, Labels labels) {
    return StateVector(z.array().exp().matrix(), std::move(labels));
}

const char* to_string(DiffMethod m) noexcept {
    return m == DiffMethod::analytic ? "analytic" : "numeric";
}

PositiveSystem::PositiveSystem(std::string name, std::vector<std::string> labels, Map evaluate)
    : name_(std::move(name)), labels_(make_labels(std::move(labels))), evaluate_(std::move(evaluate)) {
    if (labels_->empty()) throw InvalidInputError("positive system needs at least one coordinate");
    if (!evaluate_) throw InvalidInputError("positive system needs an evaluator");
}

PositiveSystem PositiveSystem::with_log_map(Map g) const {
    PositiveSystem copy = *this;
    copy.log_map_ = std::move(g);
    return copy;
}

PositiveSystem PositiveSystem::with_elasticity(ElasticityProvider e) const {
    PositiveSystem copy = *this;
    copy.elasticity_ = std::move(e);
    return copy;
}

Eigen::Index PositiveSystem::index_of(const std::string& label) const {
    const auto it = std::find(labels_->begin(), labels_->end(), label);
    if (it == labels_->end()) throw InvalidInputError("unknown coordinate label '" + label + "'");
    return static_cast<Eigen::Index>(it - labels_->begin());
}

Vector PositiveSystem::evaluate(const Vector& x) const {
    if (x.size() != dimension()) throw InvalidInputError(name_ + ": evaluate called with wrong dimension");
    Vector f = evaluate_(x);
    if (f.size() != dimension()) throw ModelEvaluationError(name_ + ": evaluator returned wrong dimension", "");
    for (Eigen::Index j = 0; j < f.size(); ++j) {
        if (!(f(j) > 0.0) || !std::isfinite(f(j))) {
            const auto& label = (*labels_)[static_cast<std::size_t>(j)];
            throw ModelEvaluationError(name_ + ": F produced a non-positive or non-finite value at " + label,
                                       label);
        }
    }
    return f;
}

StateVector PositiveSystem::evaluate(const StateVector& x) const {
    return StateVector(evaluate(x.values()), labels_);
}

Vector log_transform(const Vector& z, const PositiveSystem& sys) {
    if (z.size() != sys.dimension()) throw InvalidInputError(sys.name() + ": log_transform dimension mismatch");
    if (!sys.log_map_) return sys.evaluate(Vector(z.array().exp())).array().log().matrix();

    Vector g = sys.log_map_(z);
    for (Eigen::Index j = 0; j < g.size(); ++j) {
        if (!std::isfinite(g(j))) {
            const auto& label = sys.labels()[static_cast<std::size_t>(j)];
            throw ModelEvaluationError(
                sys.name() + ": F produced a non-positive or non-finite value at " + label, label);
        }
    }
    return g;
}

namespace {

// log sum_t exp(log_coef_t + e_t . z) for each row, plus the softmax weights
// when requested.
double row_log_value(const std::vector<MonomialTerm>& row, const Vector& z, std::vector<double>* weights) {
    if (row.empty()) return -std::numeric_limits<double>::infinity();
    std::vector<double> logs(row.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < row.size(); ++t) {
        double s = row[t].log_coef;
        for (const auto& [k, e] : row[t].exponents) s += e * z(k);
        logs[t] = s;
        top = std::max(top, s);
    }
    double sum = 0.0;
    for (double& l : logs) {
        l = std::exp(l - top);
        sum += l;
    }
    if (weights) {
        weights->resize(row.size());
        for (std::size_t t = 0; t < row.size(); ++t) (*weights)[t] = logs[t] / sum;
    }
    return top + std::log(sum);
}

}  // namespace

PositiveSystem PositiveSystem::from_monomials(std::string name, std::vector<std::string> labels,
                                              MonomialStructure structure) {
    if (structure.rows.size() != labels.size()) {
        throw InvalidInputError(name + ": monomial structure has " + std::to_string(structure.rows.size()) +
                                " rows for " + std::to_string(labels.size()) + " labels");
    }
    auto shared = std::make_shared<const MonomialStructure>(std::move(structure));

    auto g = [shared](const Vector& z) {
        Vector out(static_cast<Eigen::Index>(shared->rows.size()));
        for (std::size_t j = 0; j < shared->rows.size(); ++j) {
            out(static_cast<Eigen::Index>(j)) = row_log_value(shared->rows[j], z, nullptr);
        }
        return out;
    };
    auto f = [g](const Vector& x) { return Vector(g(Vector(x.array().log())).array().exp()); };
    auto e = [shared](const Vector& x) {
        const Eigen::Index n = static_cast<Eigen::Index>(shared->rows.size());
        const Vector z = x.array().log().matrix();
        Matrix d = Matrix::Zero(n, n);
        std::vector<double> w;
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto& row = shared->rows[static_cast<std::size_t>(j)];
            row_log_value(row, z, &w);
            for (std::size_t t = 0; t < row.size(); ++t) {
                for (const auto& [k, ex] : row[t].exponents) d(j, k) += w[t] * ex;
            }
        }
        return d;
    };

    PositiveSystem sys(std::move(name), std::move(labels), f);
    sys.log_map_ = g;
    sys.elasticity_ = e;
    sys.structure_ = std::move(shared);
    return sys;
}

ElasticityMatrix numeric_elasticity_at(const PositiveSystem& sys, const StateVector& x, double step) {
    const Eigen::Index n = sys.dimension();
    if (x.size() != n) throw InvalidInputError("elasticity_at: dimension mismatch");
    const Vector z = x.log();
    Matrix d(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        Vector zp = z, zm = z;
        zp(k) += step;
        zm(k) -= step;
        const Vector col = (log_transform(zp, sys) - log_transform(zm, sys)) / (2.0 * step);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!std::isfinite(col(j))) {
                throw DifferentiationError("elasticity of " + sys.labels()[static_cast<std::size_t>(j)] +
                                           " with respect to " + sys.labels()[static_cast<std::size_t>(k)] +
                                           " is not finite");
            }
        }
        d.col(k) = col;
    }
    return ElasticityMatrix(std::move(d), x, DiffMethod::numeric);
}

ElasticityMatrix elasticity_at(const PositiveSystem& sys, const StateVector& x) {
    if (!sys.has_analytic_elasticity()) return numeric_elasticity_at(sys, x);
    if (x.size() != sys.dimension()) throw InvalidInputError("elasticity_at: dimension mismatch");
    Matrix d = sys.analytic_elasticity()(x.values());
    if (!d.allFinite()) throw DifferentiationError(sys.name() + ": analytic elasticity is not finite");
    return ElasticityMatrix(std::move(d), x, DiffMethod::analytic);
}

}  // namespace posfix
