#include "fundhedge/market.hpp"

#include "fundhedge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

namespace fundhedge {

namespace {
constexpr const char* kModule = "market-model";
}

void EquityModel::validate() const {
    if (!(spot > 0.0) || !std::isfinite(spot)) throw DomainError(kModule, "spot must be positive");
    if (!(volatility > 0.0) || !std::isfinite(volatility)) {
        throw DomainError(kModule, "volatility must be positive");
    }
    if (dividend_yield.min_value() < 0.0) {
        throw DomainError(kModule, "dividend yield must be non-negative");
    }
}

RateSpec martingale_drift(const AccountSet& accounts, const EquityModel& equity,
                          std::size_t asset) {
    if (asset >= accounts.assets.size()) {
        throw DomainError(kModule, "no funding rate for asset " + std::to_string(asset + 1));
    }
    return accounts.assets[asset].borrow - equity.dividend_yield;
}

Lattice::Lattice(EquityModel equity, double maturity, std::size_t steps)
    : equity_(std::move(equity)), maturity_(maturity), steps_(steps) {
    equity_.validate();
    if (steps_ == 0) throw DomainError(kModule, "lattice needs at least one step");
    if (!(maturity_ > 0.0)) throw DomainError(kModule, "maturity must be positive");
    equity_.dividend_yield.check_covers(maturity_, "dividend_yield");
    equity_.dividend_yield.check_aligned(maturity_, steps_, "dividend_yield");
    dt_ = maturity_ / static_cast<double>(steps_);
    log_step_ = equity_.volatility * std::sqrt(dt_);
    up_ = std::exp(log_step_);
    down_ = std::exp(-log_step_);
}

double Lattice::spot(std::size_t n, std::size_t j) const {
    const double k = 2.0 * static_cast<double>(j) - static_cast<double>(n);
    return equity_.spot * std::exp(log_step_ * k);
}

double Lattice::dividend_factor(std::size_t n) const {
    return std::exp(equity_.dividend_yield.on_step(time(n), dt_) * dt_);
}

double Lattice::weight(std::size_t n, const RateSpec& drift) const {
    const double mu = drift.on_step(time(n), dt_);
    const double q = (std::exp(mu * dt_) - down_) / (up_ - down_);
    if (!(q > 0.0 && q < 1.0)) {
        std::ostringstream os;
        os.precision(10);
        os << "lattice weight q=" << q << " outside (0,1) at step " << n << " for drift " << mu
           << " (dt=" << dt_ << ", u=" << up_ << "); increase the number of steps";
        throw StepSizeError(kModule, os.str());
    }
    return q;
}

std::vector<double> Lattice::weights(const RateSpec& drift) const {
    drift.check_covers(maturity_, "measure drift");
    drift.check_aligned(maturity_, steps_, "measure drift");
    std::vector<double> q(steps_);
    for (std::size_t n = 0; n < steps_; ++n) q[n] = weight(n, drift);
    return q;
}

Lattice build_lattice(const EquityModel& equity, std::size_t steps, double maturity) {
    return Lattice(equity, maturity, steps);
}

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) {
    std::uint64_t z = seed + (block + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

PathEnsemble simulate_paths(const EquityModel& equity, const RateSpec& drift, double maturity,
                            std::size_t steps, std::size_t paths, std::uint64_t seed,
                            std::string measure, unsigned threads) {
    return simulate_path_range(equity, drift, maturity, steps, 0, paths, seed, std::move(measure), threads);
}

PathEnsemble simulate_path_range(const EquityModel& equity, const RateSpec& drift, double maturity,
                                 std::size_t steps, std::size_t first_path, std::size_t paths,
                                 std::uint64_t seed, std::string measure, unsigned threads) {
    equity.validate();
    if (steps == 0 || paths == 0) throw DomainError(kModule, "need at least one step and one path");
    if (first_path % kPathBlock != 0) {
        throw DomainError(kModule, "a path range must start on a block boundary");
    }
    const std::size_t block_offset = first_path / kPathBlock;
    drift.check_covers(maturity, "simulation drift");

    PathEnsemble ens;
    ens.paths = paths;
    ens.steps = steps;
    ens.maturity = maturity;
    ens.seed = seed;
    ens.measure = std::move(measure);
    ens.spots.resize(paths * (steps + 1));

    const double dt = maturity / static_cast<double>(steps);
    const double vol = equity.volatility;
    std::vector<double> increments(steps);
    for (std::size_t n = 0; n < steps; ++n) {
        const double t0 = maturity * static_cast<double>(n) / static_cast<double>(steps);
        const double t1 = maturity * static_cast<double>(n + 1) / static_cast<double>(steps);
        increments[n] = drift.integral(t0, t1) - 0.5 * vol * vol * dt;
    }
    const double diffusion = vol * std::sqrt(dt);

    const std::size_t blocks = (paths + kPathBlock - 1) / kPathBlock;
    auto run_block = [&](std::size_t b) {
        std::mt19937_64 engine(block_seed(seed, b + block_offset));
        std::normal_distribution<double> normal(0.0, 1.0);
        const std::size_t first = b * kPathBlock;
        const std::size_t last = std::min(paths, first + kPathBlock);
        for (std::size_t m = first; m < last; ++m) {
            double* row = ens.spots.data() + m * (steps + 1);
            double log_s = std::log(equity.spot);
            row[0] = equity.spot;
            for (std::size_t n = 0; n < steps; ++n) {
                log_s += increments[n] + diffusion * normal(engine);
                row[n + 1] = std::exp(log_s);
            }
        }
    };

    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, blocks));
    if (workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t b = w; b < blocks; b += workers) run_block(b);
            });
        }
        for (auto& th : pool) th.join();
    }
    return ens;
}

}  // namespace fundhedge
