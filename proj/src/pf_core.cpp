#include "posfix/pf_core.hpp"

#include "posfix/error.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <limits>
#include <string>

namespace posfix {

NonnegMatrix::NonnegMatrix(Matrix entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1) {
        throw InvalidInputError("nonnegative matrix must be square with N >= 1");
    }
    for (Eigen::Index j = 0; j < m_.rows(); ++j) {
        for (Eigen::Index k = 0; k < m_.cols(); ++k) {
            const double x = m_(j, k);
            if (!(x >= 0.0) || !std::isfinite(x)) {
                throw InvalidInputError("entry (" + std::to_string(j) + "," + std::to_string(k) +
                                        ") is negative or not finite");
            }
        }
    }
}

GaugeVector::GaugeVector(Vector values) : v_(std::move(values)) {
    for (Eigen::Index j = 0; j < v_.size(); ++j) {
        if (!(v_(j) > 0.0) || !std::isfinite(v_(j))) {
            throw InvalidInputError("gauge vector entry " + std::to_string(j) + " is not strictly positive");
        }
    }
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const NonnegMatrix& m) {
    // Iterative Tarjan over edges k -> j for m(j, k) > 0.
    const auto n = static_cast<std::size_t>(m.size());
    const Matrix& a = m.matrix();
    constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();

    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> components;
    std::size_t counter = 0;

    struct Frame {
        std::size_t node;
        std::size_t next;  // next candidate successor
    };

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;

        while (!call.empty()) {
            Frame& f = call.back();
            const std::size_t k = f.node;
            bool descended = false;
            while (f.next < n) {
                const std::size_t j = f.next++;
                if (!(a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) > 0.0)) continue;
                if (index[j] == unvisited) {
                    index[j] = low[j] = counter++;
                    stack.push_back(j);
                    on_stack[j] = true;
                    call.push_back({j, 0});
                    descended = true;
                    break;
                }
                if (on_stack[j]) low[k] = std::min(low[k], index[j]);
            }
            if (descended) continue;

            if (low[k] == index[k]) {
                std::vector<std::size_t> comp;
                std::size_t w = 0;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != k);
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
            call.pop_back();
            if (!call.empty()) {
                const std::size_t parent = call.back().node;
                low[parent] = std::min(low[parent], low[k]);
            }
        }
    }
    std::reverse(components.begin(), components.end());
    return components;
}

bool is_irreducible(const NonnegMatrix& m) {
    if (m.size() == 1) return m(0, 0) > 0.0;
    return strongly_connected_components(m).size() == 1;
}

bool is_primitive(const NonnegMatrix& m) {
    return is_irreducible(m) && (m.matrix().diagonal().array() > 0.0).any();
}

long period(const NonnegMatrix& m) {
    if (!is_irreducible(m)) throw InvalidInputError("period: matrix is reducible");
    const Matrix& a = m.matrix();
    // Period = gcd over edges k -> j of level(k) + 1 - level(j), BFS levels from node 0.
    const Eigen::Index n = m.size();
    std::vector<long> level(static_cast<std::size_t>(n), -1);
    std::vector<Eigen::Index> queue{0};
    level[0] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const Eigen::Index k = queue[head];
        for (Eigen::Index j = 0; j < n; ++j) {
            if (a(j, k) > 0.0 && level[static_cast<std::size_t>(j)] < 0) {
                level[static_cast<std::size_t>(j)] = level[static_cast<std::size_t>(k)] + 1;
                queue.push_back(j);
            }
        }
    }
    long period = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (a(j, k) > 0.0) {
                period = std::gcd(period, std::abs(level[static_cast<std::size_t>(k)] + 1 - level[static_cast<std::size_t>(j)]));
            }
        }
    }
    return period;
}

namespace {

struct CwBounds {
    double lower;
    double upper;
};

CwBounds collatz_wielandt(const Vector& mv, const Vector& v) {
    const Vector ratio = mv.cwiseQuotient(v);
    return {ratio.minCoeff(), ratio.maxCoeff()};
}

}  // namespace

SpectralResult spectral_radius(const NonnegMatrix& m, SpectralOptions opts,
                               const SpectralObserver& observer) {
    if (!(opts.tol > 0.0)) throw InvalidInputError("spectral_radius: tol must be positive");
    if (!is_irreducible(m)) {
        throw InvalidInputError("spectral_radius: matrix is reducible; Collatz-Wielandt bounds may not close");
    }
    const Eigen::Index n = m.size();
    const int cap = opts.max_iter > 0 ? opts.max_iter : static_cast<int>(100 * n);
    const bool has_diagonal = (m.matrix().diagonal().array() > 0.0).any();

    Matrix a = m.matrix();
    double shift = 0.0;
    Vector v = Vector::Ones(n);
    Vector mv = a * v;
    CwBounds b = collatz_wielandt(mv, v);

    // Stall detection: imprimitive matrices can leave the bounds oscillating
    // without closing; a diagonal shift equal to the current Perron estimate
    // removes the peripheral eigenvalues other than rho.
    const int window = std::max<int>(10, static_cast<int>(2 * n));
    double gap_at_window_start = b.upper - b.lower;

    int it = 0;
    for (; it < cap; ++it) {
        const double rho = 0.5 * (b.lower + b.upper) - shift;
        if ((b.upper - b.lower) <= opts.tol * std::max(1.0, rho)) break;

        v = mv / mv.maxCoeff();
        mv = a * v;
        b = collatz_wielandt(mv, v);
        if (observer) observer(it + 1, b.lower - shift, b.upper - shift);

        if (!has_diagonal && shift == 0.0 && (it + 1) % window == 0) {
            const double gap = b.upper - b.lower;
            if (gap > 0.99 * gap_at_window_start) {
                shift = 0.5 * (b.lower + b.upper);
                a.diagonal().array() += shift;
                mv = a * v;
                b = collatz_wielandt(mv, v);
            }
            gap_at_window_start = gap;
        }
    }

    SpectralResult r;
    r.lower_bound = b.lower - shift;
    r.upper_bound = b.upper - shift;
    r.rho = 0.5 * (r.lower_bound + r.upper_bound);
    r.iterations = it;
    r.shifted = shift != 0.0;
    if (it >= cap && (b.upper - b.lower) > opts.tol * std::max(1.0, r.rho)) {
        throw BudgetExceededError("spectral_radius: bounds did not close within " + std::to_string(cap) +
                                      " iterations",
                                  r.lower_bound, r.upper_bound);
    }
    r.right_eigvec = mv / mv.maxCoeff();
    return r;
}

double gauge_norm(const Vector& z, const GaugeVector& v) {
    if (z.size() != v.size()) throw InvalidInputError("gauge_norm: dimension mismatch");
    double best = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) best = std::max(best, std::abs(z(j)) / v.values()(j));
    return best;
}

double quotient_norm(const Vector& z, const Vector& u, const GaugeVector& v) {
    if (z.size() != v.size() || u.size() != v.size()) {
        throw InvalidInputError("quotient_norm: dimension mismatch");
    }
    if (u.isZero(0.0)) throw InvalidInputError("quotient_norm: u must be nonzero");

    // The minimand is the upper envelope of the 2N lines
    //   l(lambda) = +-(z_j - lambda u_j) / v_j.
    // By LP duality its minimum is attained on a pair of lines with slopes of
    // opposite sign (or a single flat line), so the optimum is the largest
    // value among those pairwise crossings.
    const Eigen::Index n = z.size();
    std::vector<double> up_a, up_b, down_a, down_b;
    double flat = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double a = z(j) / v.values()(j);
        const double b = u(j) / v.values()(j);
        if (b == 0.0) {
            flat = std::max(flat, std::abs(a));
            continue;
        }
        // Lines a - b*lambda and -a + b*lambda; store as intercept/slope with slope > 0 or < 0.
        const double s = std::abs(b);
        const double sign = b > 0.0 ? 1.0 : -1.0;
        up_a.push_back(-a * sign);   // slope +s
        up_b.push_back(s);
        down_a.push_back(a * sign);  // slope -s
        down_b.push_back(-s);
    }
    double best = flat;
    for (std::size_t i = 0; i < up_a.size(); ++i) {
        for (std::size_t k = 0; k < down_a.size(); ++k) {
            const double bi = up_b[i];
            const double bk = down_b[k];
            const double value = (-bk * up_a[i] + bi * down_a[k]) / (bi - bk);
            best = std::max(best, value);
        }
    }
    return std::max(best, 0.0);
}

}  // namespace posfix
