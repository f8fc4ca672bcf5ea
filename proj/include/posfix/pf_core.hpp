#pragma once

// Spectral utilities for nonnegative matrices: irreducibility and primitivity
// tests, Perron root by power iteration with Collatz-Wielandt bounds, and the
// weighted sup-norms (gauge and quotient) used by the solver.

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <vector>

namespace posfix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Square matrix with every entry >= 0. Construction validates.
class NonnegMatrix {
public:
    explicit NonnegMatrix(Matrix entries);

    const Matrix& matrix() const noexcept { return m_; }
    Eigen::Index size() const noexcept { return m_.rows(); }
    double operator()(Eigen::Index j, Eigen::Index k) const { return m_(j, k); }

private:
    Matrix m_;
};

/// Strictly positive weight vector defining the gauge norm.
class GaugeVector {
public:
    explicit GaugeVector(Vector values);
    static GaugeVector ones(Eigen::Index n) { return GaugeVector(Vector::Ones(n)); }

    const Vector& values() const noexcept { return v_; }
    Eigen::Index size() const noexcept { return v_.size(); }

private:
    Vector v_;
};

struct SpectralResult {
    double rho = 0.0;
    Vector right_eigvec;   // max entry normalized to 1
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    int iterations = 0;
    bool shifted = false;  // a diagonal shift was needed to break periodicity
};

struct SpectralOptions {
    double tol = 1e-10;
    int max_iter = 0;  // 0 selects 100 * N
};

/// Called after every power-iteration step with (iteration, lower, upper).
using SpectralObserver = std::function<void(int, double, double)>;

/// Strongly connected components of the graph with an edge k -> j whenever
/// M(j, k) > 0. Components are listed in discovery order, each sorted.
std::vector<std::vector<std::size_t>> strongly_connected_components(const NonnegMatrix& m);

/// A 1x1 matrix counts as irreducible iff its entry is positive.
bool is_irreducible(const NonnegMatrix& m);

/// Irreducible with at least one positive diagonal entry. Sufficient for
/// primitivity, not necessary; see period() for the exact test.
bool is_primitive(const NonnegMatrix& m);

/// gcd of cycle lengths of an irreducible matrix; 1 means primitive.
/// Throws InvalidInputError on reducible input.
long period(const NonnegMatrix& m);

/// Perron root of an irreducible nonnegative matrix. Stops once the
/// Collatz-Wielandt bounds satisfy upper - lower <= tol * max(1, rho).
/// Throws InvalidInputError on reducible input and BudgetExceededError
/// (carrying the last bounds) when the iteration cap is hit.
SpectralResult spectral_radius(const NonnegMatrix& m, SpectralOptions opts = {},
                               const SpectralObserver& observer = {});

/// max_j |z_j| / v_j
double gauge_norm(const Vector& z, const GaugeVector& v);

/// min over real lambda of gauge_norm(z - lambda * u, v), computed exactly.
double quotient_norm(const Vector& z, const Vector& u, const GaugeVector& v);

}  // namespace posfix
