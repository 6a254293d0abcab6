#pragma once

// Closed-form references used only by tests. Nothing here calls the library.

#include <algorithm>
#include <cmath>

namespace oracle {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Undiscounted Black call on a lognormal forward F with total variance s^2 T.
inline double black_call(double F, double K, double sigma, double T) {
    const double v = sigma * std::sqrt(T);
    const double d1 = (std::log(F / K) + 0.5 * v * v) / v;
    return F * norm_cdf(d1) - K * norm_cdf(d1 - v);
}

inline double bs_call(double S, double K, double r, double q, double sigma, double T) {
    return std::exp(-r * T) * black_call(S * std::exp((r - q) * T), K, sigma, T);
}

inline double bs_put(double S, double K, double r, double q, double sigma, double T) {
    return bs_call(S, K, r, q, sigma, T) - S * std::exp(-q * T) + K * std::exp(-r * T);
}

inline double bs_delta(double S, double K, double r, double q, double sigma, double T) {
    const double v = sigma * std::sqrt(T);
    const double d1 = (std::log(S / K) + (r - q + 0.5 * sigma * sigma) * T) / v;
    return std::exp(-q * T) * norm_cdf(d1);
}

// Call valued with forward drift mu and discount rate rho.
inline double drift_discount_call(double S, double K, double mu, double rho, double sigma, double T) {
    return std::exp(-rho * T) * black_call(S * std::exp(mu * T), K, sigma, T);
}

inline double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace oracle
