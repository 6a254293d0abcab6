#pragma once

#include "fundhedge/rates.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fundhedge {

/// Geometric Brownian motion with a deterministic dividend yield.
struct EquityModel {
    double spot = 100.0;          // S_0
    double volatility = 0.2;      // sigma, constant
    double drift = 0.0;           // real-world mu
    RateSpec dividend_yield;      // kappa

    void validate() const;
};

/// Drift of S^1 under the measure making the B^1-discounted cum-dividend
/// price a martingale: r^1 - kappa. r^1 is the rate financing a long position.
RateSpec martingale_drift(const AccountSet& accounts, const EquityModel& equity,
                          std::size_t asset = 0);

/// Recombining CRR tree with u = e^{sigma sqrt(dt)}, d = 1/u.
class Lattice {
public:
    Lattice(EquityModel equity, double maturity, std::size_t steps);

    std::size_t steps() const noexcept { return steps_; }
    double maturity() const noexcept { return maturity_; }
    double dt() const noexcept { return dt_; }
    double up() const noexcept { return up_; }
    double down() const noexcept { return down_; }
    const EquityModel& equity() const noexcept { return equity_; }

    double time(std::size_t n) const {
        return maturity_ * static_cast<double>(n) / static_cast<double>(steps_);
    }

    /// Spot at node (n, j), j = number of up moves, 0 <= j <= n.
    double spot(std::size_t n, std::size_t j) const;

    /// e^{kappa dt} on step n.
    double dividend_factor(std::size_t n) const;

    /// Risk-neutral-style weight of the up move on step n for the given drift.
    /// Throws StepSizeError when the weight falls outside (0,1).
    double weight(std::size_t n, const RateSpec& drift) const;

    /// Weights for every step; validates the whole grid at once.
    std::vector<double> weights(const RateSpec& drift) const;

    /// Same model and maturity on a different grid.
    Lattice with_steps(std::size_t steps) const { return Lattice(equity_, maturity_, steps); }

private:
    EquityModel equity_;
    double maturity_;
    std::size_t steps_;
    double dt_;
    double log_step_;
    double up_;
    double down_;
};

Lattice build_lattice(const EquityModel& equity, std::size_t steps, double maturity);

/// Simulated spot paths, stored row-major as paths x (steps + 1).
struct PathEnsemble {
    std::size_t paths = 0;
    std::size_t steps = 0;
    double maturity = 0.0;
    std::uint64_t seed = 0;
    std::string measure;
    std::vector<double> spots;

    double at(std::size_t path, std::size_t n) const { return spots[path * (steps + 1) + n]; }
    std::span<const double> path(std::size_t m) const {
        return {spots.data() + m * (steps + 1), steps + 1};
    }
    double time(std::size_t n) const {
        return maturity * static_cast<double>(n) / static_cast<double>(steps);
    }
};

/// Paths are generated in fixed blocks of kPathBlock paths. Block b draws from
/// its own mt19937_64 seeded with splitmix64(seed + b * golden), so the output
/// does not depend on how blocks are spread over threads.
inline constexpr std::size_t kPathBlock = 1024;

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block);

PathEnsemble simulate_paths(const EquityModel& equity, const RateSpec& drift, double maturity,
                            std::size_t steps, std::size_t paths, std::uint64_t seed,
                            std::string measure = "", unsigned threads = 0);

/// Paths [first_path, first_path + paths) of the ensemble simulate_paths would
/// produce with the same seed; first_path must be a multiple of kPathBlock.
PathEnsemble simulate_path_range(const EquityModel& equity, const RateSpec& drift, double maturity,
                                 std::size_t steps, std::size_t first_path, std::size_t paths,
                                 std::uint64_t seed, std::string measure = "", unsigned threads = 0);

}  // namespace fundhedge
