#include "fundhedge/cashflow.hpp"

#include "fundhedge/errors.hpp"

#include <cmath>
#include <string>

namespace fundhedge {

std::vector<std::vector<const LumpFlow*>> CashFlowStream::schedule(double T, std::size_t N) const {
    std::vector<std::vector<const LumpFlow*>> out(N + 1);
    const double dt = T / static_cast<double>(N);
    for (const auto& lump : lumps) {
        const double k = lump.time / dt;
        const double n = std::round(k);
        if (std::abs(k - n) > 1e-9 * std::max(1.0, k) || n < 0.0 || n > static_cast<double>(N)) {
            throw DomainError("wealth-engine", "flow date " + std::to_string(lump.time) +
                                                   " is not on the time grid within (0, T]");
        }
        if (n == 0.0) {
            throw DomainError("wealth-engine", "a flow at t = 0 must be folded into the initial wealth");
        }
        out[static_cast<std::size_t>(n)].push_back(&lump);
    }
    return out;
}

CashFlowStream CashFlowStream::negated() const {
    CashFlowStream s;
    if (terminal) s.terminal = [f = terminal](double S) { return -f(S); };
    for (const auto& l : lumps) {
        s.lumps.push_back({l.time, [f = l.amount](double t, double S) { return -f(t, S); }});
    }
    if (rate) s.rate = [f = rate](double t, double S) { return -f(t, S); };
    return s;
}

}  // namespace fundhedge
