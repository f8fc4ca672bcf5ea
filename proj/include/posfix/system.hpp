#pragma once

// Positive fixed-point systems x = F(x) and their log-coordinate form
// G = log o F o exp, whose Jacobian is the elasticity matrix of F.

#include "posfix/pf_core.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace posfix {

using Labels = std::shared_ptr<const std::vector<std::string>>;

Labels make_labels(std::vector<std::string> names);

/// Strictly positive, finite vector with coordinate labels.
class StateVector {
public:
    StateVector(Vector values, Labels labels);

    static StateVector from_log(const Vector& z, Labels labels);

    const Vector& values() const noexcept { return x_; }
    const std::vector<std::string>& labels() const noexcept { return *labels_; }
    const Labels& shared_labels() const noexcept { return labels_; }
    Eigen::Index size() const noexcept { return x_.size(); }
    double operator[](Eigen::Index j) const { return x_(j); }
    Vector log() const { return x_.array().log().matrix(); }

private:
    Vector x_;
    Labels labels_;
};

/// One term c * prod_k x_k^{e_k} of a sum-of-monomials row, stored in logs.
struct MonomialTerm {
    double log_coef = 0.0;
    std::vector<std::pair<Eigen::Index, double>> exponents;  // (coordinate, exponent), sparse
};

/// F_j(x) = sum over rows[j] of the terms; all coefficients strictly positive.
struct MonomialStructure {
    std::vector<std::vector<MonomialTerm>> rows;
};

enum class DiffMethod { analytic, numeric };

const char* to_string(DiffMethod m) noexcept;

class ElasticityMatrix {
public:
    ElasticityMatrix(Matrix entries, StateVector point, DiffMethod method)
        : entries_(std::move(entries)), point_(std::move(point)), method_(method) {}

    const Matrix& entries() const noexcept { return entries_; }
    const StateVector& point() const noexcept { return point_; }
    DiffMethod method() const noexcept { return method_; }
    double operator()(Eigen::Index j, Eigen::Index k) const { return entries_(j, k); }
    Matrix modulus() const { return entries_.cwiseAbs(); }

private:
    Matrix entries_;
    StateVector point_;
    DiffMethod method_;
};

/// An evaluatable map on the positive orthant. Immutable once built; copies
/// share the underlying callables.
class PositiveSystem {
public:
    using Map = std::function<Vector(const Vector&)>;
    using ElasticityProvider = std::function<Matrix(const Vector& x)>;

    PositiveSystem(std::string name, std::vector<std::string> labels, Map evaluate);

    /// Builds evaluate, the log map and analytic elasticities from a
    /// sum-of-monomials description.
    static PositiveSystem from_monomials(std::string name, std::vector<std::string> labels,
                                         MonomialStructure structure);

    PositiveSystem with_log_map(Map g) const;
    PositiveSystem with_elasticity(ElasticityProvider e) const;

    const std::string& name() const noexcept { return name_; }
    Eigen::Index dimension() const noexcept { return static_cast<Eigen::Index>(labels_->size()); }
    const std::vector<std::string>& labels() const noexcept { return *labels_; }
    const Labels& shared_labels() const noexcept { return labels_; }
    Eigen::Index index_of(const std::string& label) const;

    /// F(x); throws ModelEvaluationError naming the offending coordinate.
    Vector evaluate(const Vector& x) const;
    StateVector evaluate(const StateVector& x) const;

    bool has_analytic_elasticity() const noexcept { return static_cast<bool>(elasticity_); }
    const ElasticityProvider& analytic_elasticity() const noexcept { return elasticity_; }
    const MonomialStructure* structure() const noexcept { return structure_.get(); }

private:
    friend Vector log_transform(const Vector& z, const PositiveSystem& sys);

    std::string name_;
    Labels labels_;
    Map evaluate_;
    Map log_map_;
    ElasticityProvider elasticity_;
    std::shared_ptr<const MonomialStructure> structure_;
};

/// G(z) = log F(exp z).
Vector log_transform(const Vector& z, const PositiveSystem& sys);

/// Relative step in log coordinates for central differences.
inline constexpr double kLogStep = 1e-6;

/// Elasticity matrix (x_k / F_j) dF_j/dx_k at x: analytic provider when
/// present, otherwise central differences of G.
ElasticityMatrix elasticity_at(const PositiveSystem& sys, const StateVector& x);
ElasticityMatrix numeric_elasticity_at(const PositiveSystem& sys, const StateVector& x,
                                       double step = kLogStep);

}  // namespace posfix
