#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fundhedge {

/// A function of (time, spot of the first asset).
using StateFunction = std::function<double(double t, double S)>;

struct LumpFlow {
    double time = 0.0;
    StateFunction amount;
};

/// Contractual cash flows, positive when received by the hedger.
///
/// terminal is the flow at maturity as a function of S_T (for a sold call it
/// is -(S_T - K)^+). rate is a continuous flow in currency per year; on a grid
/// it is paid as rate(t_n, S_n) * dt at t_{n+1}.
struct CashFlowStream {
    std::function<double(double S)> terminal;
    std::vector<LumpFlow> lumps;
    StateFunction rate;

    static CashFlowStream none() { return {}; }
    static CashFlowStream european(std::function<double(double S)> payoff) {
        CashFlowStream s;
        s.terminal = std::move(payoff);
        return s;
    }

    double terminal_at(double S) const { return terminal ? terminal(S) : 0.0; }
    double rate_at(double t, double S) const { return rate ? rate(t, S) : 0.0; }

    /// Lumps grouped by grid index on a grid of N steps over [0,T]. Throws
    /// DomainError for dates off the grid, outside (0,T], or at t = 0 (a flow at
    /// inception belongs in the initial wealth).
    std::vector<std::vector<const LumpFlow*>> schedule(double T, std::size_t N) const;

    /// Same stream with every flow negated (the other side of the contract).
    CashFlowStream negated() const;
};

}  // namespace fundhedge
