#pragma once

#include "fundhedge/cashflow.hpp"
#include "fundhedge/collateral.hpp"
#include "fundhedge/market.hpp"
#include "fundhedge/rates.hpp"
#include "fundhedge/wealth.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fundhedge {

/// Values on the nodes (n, j), 0 <= j <= n <= N, stored layer by layer.
template <class T>
class Surface {
public:
    Surface() = default;
    explicit Surface(std::size_t steps) : steps_(steps), data_((steps + 1) * (steps + 2) / 2) {}

    std::size_t steps() const noexcept { return steps_; }
    bool empty() const noexcept { return data_.empty(); }
    T& at(std::size_t n, std::size_t j) { return data_[n * (n + 1) / 2 + j]; }
    const T& at(std::size_t n, std::size_t j) const { return data_[n * (n + 1) / 2 + j]; }

private:
    std::size_t steps_ = 0;
    std::vector<T> data_;
};

/// Node context handed to a generator.
struct DriverContext {
    std::size_t step = 0;
    std::size_t node = 0;
    double t = 0.0;
    double dt = 0.0;
    double spot = 0.0;
};

/// Nonlinear part of the wealth drift, in currency per year.
///
/// On each step the scheme solves
///   Z e^{rho dt} + f(Z, xi) dt + a dt = E_q[W_{n+1}]
/// where rho is the discount rate, W the cum-flow value at the successors and
/// a the contract's continuous flow rate. f is the step average, so the
/// exact-accrual drivers built from the funding map divide their one-step
/// increment by dt.
struct Driver {
    std::function<double(const DriverContext&, double value, double hedge)> generator;
    RateSpec discount;
    double lipschitz = 0.0;  // bound on |df/dV|
    std::string label;

    static Driver linear(const RateSpec& discount, std::string label = "linear");
};

struct SolverOptions {
    double tolerance = 1e-13;
    int max_iterations = 50;
    /// Repeat every node's fixed point from 0 and record the largest gap.
    bool verify_uniqueness = false;
    /// Keep full surfaces; when false only the price and the root hedge are kept.
    bool keep_surfaces = true;
    /// Wealth required after the terminal flow (zero for replication).
    std::function<double(double S)> terminal_wealth;
};

/// How the hedger replicates a solution: the wealth-engine setup whose
/// one-step map the driver was built from.
struct ReplicationSetup {
    ConventionSpec convention;
    CollateralSpec collateral;
    AccountSet accounts;
    FractionPolicy repo_fraction;
};

struct BsdeSolution {
    std::size_t steps = 0;
    double maturity = 0.0;
    Surface<double> value;    // Z(n, j): ex-flow value; layer N holds the cum-flow terminal value
    Surface<double> hedge;    // xi(n, j)
    Surface<double> source;   // f(Z, xi) dt at the solution
    Surface<std::uint8_t> iterations;
    double price = 0.0;       // Z(0, 0)
    double root_hedge = 0.0;  // xi(0, 0)
    std::optional<double> price_half_steps;
    int max_iterations_used = 0;
    double max_restart_gap = 0.0;
    RateSpec discount;
    RateSpec drift;
    std::string label;
    std::optional<ReplicationSetup> setup;
    std::vector<std::string> warnings;

    bool has_surfaces() const { return !value.empty(); }
};

/// Backward induction of the discrete BSDE on the lattice.
///
/// xi comes from matching both successors exactly:
///   xi = (W_up - W_down) / ((S_up - S_down) e^{kappa dt})
/// and Z from the implicit one-step equation above, solved by fixed-point
/// iteration starting at the linear value.
BsdeSolution solve_bsde(const Lattice& lattice, const Driver& driver, const CashFlowStream& stream,
                        const RateSpec& drift, const SolverOptions& options = {});

/// Driver reproducing, node for node, the wealth engine's one-step map under
/// the given setup: its generator is the funding and margin increment net of
/// rho V and of the measure's expected gain on the hedge.
Driver make_convention_driver(const Lattice& lattice, const ReplicationSetup& setup,
                              const RateSpec& drift, const RateSpec& discount);

/// How a rate spread is turned into a per-step source.
enum class SourceConvention {
    LeftEndpoint,       // (r_base - r_target) * amount * dt
    ExponentialAccrual  // (e^{r_base dt} - e^{r_target dt}) * amount
};

/// Discount-switched accumulation: discount at `target` instead of `base` and
/// compensate with the spread times `amount(ctx, V)`. Shared by the
/// collateral-rate valuation and the gamma-measure valuation.
Driver discount_switch_driver(const RateSpec& target, const RateSpec& base,
                              std::function<double(const DriverContext&, double value)> amount,
                              double amount_lipschitz, SourceConvention convention,
                              std::string label);

}  // namespace fundhedge
