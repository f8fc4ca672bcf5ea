#pragma once

// Checks of the four structural conditions (connectedness, self-interaction,
// scaling, sign-consistent monotonicity) plus spectral evidence, assembled
// into a certification report.

#include "posfix/system.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace posfix {

inline constexpr double kSignTol = 1e-10;
inline constexpr double kDiagonalRelTol = 1e-10;
inline constexpr double kUnitEigenWindow = 1e-8;
inline constexpr double kScalingResidualTol = 1e-8;
inline constexpr double kSampleLogHalfWidth = 3.0;

enum class Verdict { pass, fail, evidence_only, absent };
enum class CertificationMode { exact, sampled };

const char* to_string(Verdict v) noexcept;
const char* to_string(CertificationMode m) noexcept;

struct CheckOutcome {
    Verdict verdict = Verdict::absent;
    std::string detail;
    std::optional<std::size_t> failing_sample;
    /// Connectedness failures: the strongly connected components, by label.
    std::vector<std::vector<std::string>> components;

    bool ok() const noexcept { return verdict == Verdict::pass || verdict == Verdict::evidence_only; }
};

struct SignPartition {
    std::vector<std::string> zeta_plus;
    std::vector<std::string> zeta_minus;
};

struct ScalingCertificate {
    Vector u;                        // max |u_j| = 1, first clearly nonzero entry positive
    double residual_fixed_eq = 0.0;  // max over samples of ||DG u - u||_inf
    double residual_direct = 0.0;    // max relative deviation of F(c^u x) from c^u F(x)
    bool verified = false;
};

struct SignWitness {
    std::string row;
    std::string column;
    std::size_t sample = 0;
    double elasticity = 0.0;
};

struct MonotonicityResult {
    CheckOutcome check;
    SignPartition partition;
    std::optional<SignWitness> witness;
};

struct SampleSpectral {
    double rho_abs = 0.0;          // rho(|DG(z)|)
    double eigvec_residual = 0.0;  // || |DG| |u| - |u| ||_inf
    std::optional<double> similarity_residual;
    std::optional<double> unit_gap;            // 1 - max modulus of the other eigenvalues
    std::optional<double> second_unit_distance;  // distance of the second-closest eigenvalue to 1
};

struct SpectralEvidence {
    std::vector<SampleSpectral> per_sample;
    double rho_max_deviation = 0.0;
    double eigvec_residual_max = 0.0;
    std::optional<double> similarity_residual_max;
    std::optional<double> unit_gap_min;
};

enum class ExponentSign { zero, positive, negative, mixed };

/// Sign of every elasticity entry implied by the exponent signs of the terms.
using SignTable = std::vector<std::vector<ExponentSign>>;

struct CertifyOptions {
    std::size_t samples = 8;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct CertificationReport {
    std::string system_name;
    std::vector<std::string> labels;
    CertificationMode mode = CertificationMode::sampled;
    DiffMethod diff_method = DiffMethod::numeric;
    std::uint64_t seed = 0;
    std::vector<StateVector> samples;

    CheckOutcome connectedness;
    CheckOutcome self_interaction;
    CheckOutcome scaling;
    CheckOutcome monotonicity;

    std::optional<ScalingCertificate> scaling_certificate;
    std::optional<SignPartition> partition;
    std::optional<SignWitness> monotonicity_witness;
    std::optional<SpectralEvidence> spectral;

    /// Scaling absent although rho(|DG|) = 1 at the samples.
    bool abs_spectral_radius_one_without_scaling = false;

    /// Conditions (a), (c), (d) hold: up-to-scale uniqueness.
    bool uniqueness_applies() const noexcept;
    /// Additionally (b): Lyapunov stability and global attractivity.
    bool convergence_applies() const noexcept;
};

/// Log-uniform samples over [e^-3, e^3] per coordinate, deterministic in seed.
std::vector<StateVector> draw_samples(const PositiveSystem& sys, std::size_t count, std::uint64_t seed);

std::vector<ElasticityMatrix> elasticities_at(const PositiveSystem& sys, std::span<const StateVector> samples,
                                              unsigned threads = 1);

CheckOutcome check_connectedness(const PositiveSystem& sys, std::span<const StateVector> samples);
CheckOutcome check_connectedness(const PositiveSystem& sys, std::span<const ElasticityMatrix> d);

CheckOutcome check_self_interaction(const PositiveSystem& sys, std::span<const StateVector> samples);
CheckOutcome check_self_interaction(const PositiveSystem& sys, std::span<const ElasticityMatrix> d);

/// Eigenvector of DG for eigenvalue 1 at the first sample, verified at the
/// rest. Empty when 1 is not an eigenvalue; throws AmbiguityError when the
/// eigenspace has dimension > 1.
std::optional<ScalingCertificate> find_scaling_exponent(const PositiveSystem& sys,
                                                        std::span<const StateVector> samples);
std::optional<ScalingCertificate> find_scaling_exponent(const PositiveSystem& sys,
                                                        std::span<const ElasticityMatrix> d);

/// Throws InvalidInputError when u has a zero entry.
MonotonicityResult check_monotonicity(const PositiveSystem& sys, const Vector& u,
                                      std::span<const StateVector> samples);
MonotonicityResult check_monotonicity(const PositiveSystem& sys, const Vector& u,
                                      std::span<const ElasticityMatrix> d);

SignPartition partition_from(const std::vector<std::string>& labels, const Vector& u);

SpectralEvidence check_spectral(const PositiveSystem& sys, const Vector& u, std::span<const StateVector> samples,
                                bool with_similarity = true);
SpectralEvidence check_spectral(const Vector& u, std::span<const ElasticityMatrix> d, bool with_similarity = true,
                                unsigned threads = 1);

/// Full spectrum of a dense matrix.
std::vector<std::complex<double>> eigenvalues(const Matrix& m);

/// Largest distance in a greedy nearest-neighbour matching of two spectra.
double spectrum_mismatch(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b);

// Symbolic checks for sum-of-monomials systems.
SignTable symbolic_sign_table(const MonomialStructure& s, Eigen::Index n);
CheckOutcome exact_connectedness(const PositiveSystem& sys, const SignTable& table);
CheckOutcome exact_self_interaction(const PositiveSystem& sys, const SignTable& table);
CheckOutcome exact_scaling(const MonomialStructure& s, const Vector& u);
MonotonicityResult exact_monotonicity(const PositiveSystem& sys, const SignTable& table, const Vector& u);

CertificationReport certify(const PositiveSystem& sys, const CertifyOptions& opts = {});

}  // namespace posfix
