#include "posfix/error.hpp"
#include "posfix/trade.hpp"

#include <array>
#include <cmath>

namespace posfix::trade {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

// zeta(2) .. zeta(20)
constexpr std::array<double, 19> kZeta = {
    1.6449340668482264365, 1.2020569031595942854, 1.0823232337111381915, 1.0369277551433699263,
    1.0173430619844491397, 1.0083492773819228268, 1.0040773561979443394, 1.0020083928260822144,
    1.0009945751278180853, 1.0004941886041194646, 1.0002460865533080483, 1.0001227133475784891,
    1.0000612481350587048, 1.0000305882363070205, 1.0000152822594086519, 1.0000076371976378998,
    1.0000038172932649998, 1.0000019082127165539, 1.0000009539620338728};

// ln Gamma(1 - d) / d for small d via
//   ln Gamma(1 - d) = euler * d + sum_{k >= 2} zeta(k) d^k / k.
double log_gamma_one_minus_over(double d) {
    double sum = kEulerGamma;
    double power = 1.0;
    for (std::size_t i = 0; i < kZeta.size(); ++i) {
        power *= d;
        sum += kZeta[i] * power / static_cast<double>(i + 2);
    }
    return sum;
}

}  // namespace

double gamma_constant(double theta, double sigma) {
    if (!(theta > 0.0) || !(sigma > 1.0) || !(theta > sigma - 1.0)) {
        throw ParameterError("gamma_constant: requires theta > sigma - 1 > 0 (got theta=" + std::to_string(theta) +
                             ", sigma=" + std::to_string(sigma) + ")");
    }
    // Base Gamma(1 - d) with d = (sigma - 1) / theta in (0, 1); exponent 1 / d.
    const double d = (sigma - 1.0) / theta;
    if (d < 0.05) return std::exp(log_gamma_one_minus_over(d));
    return std::pow(std::tgamma(1.0 - d), 1.0 / d);
}

}  // namespace posfix::trade
