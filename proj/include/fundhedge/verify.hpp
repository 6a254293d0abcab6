#pragma once

#include "fundhedge/bsde.hpp"
#include "fundhedge/market.hpp"
#include "fundhedge/rates.hpp"

#include <cstddef>
#include <functional>
#include <string>

namespace fundhedge {

/// A lattice measure given by the drift of S under it.
struct MeasureSpec {
    RateSpec drift;
    std::string label;

    /// r^1 - kappa: the B^1-discounted cum-dividend price is a martingale.
    static MeasureSpec repo(const AccountSet& accounts, const EquityModel& equity, std::size_t asset = 0);
    /// drift gamma - kappa.
    static MeasureSpec discounting(const RateSpec& gamma, const EquityModel& equity, const std::string& name);
};

struct MartingaleCheck {
    double max_defect = 0.0;
    std::size_t step = 0;  // node of the worst defect
    std::size_t node = 0;
};

/// max over nodes of |Y(n,j) - q Y(n+1,j+1) - (1-q) Y(n+1,j)|.
MartingaleCheck check_martingale(const Lattice& lattice, const Surface<double>& values,
                                 const MeasureSpec& measure);
MartingaleCheck check_martingale(const Lattice& lattice,
                                 const std::function<double(std::size_t n, std::size_t j)>& values,
                                 const MeasureSpec& measure);

/// Same check for a path-dependent process given by its one-step increments
/// increment(n, j, up) on the step leaving node (n, j).
MartingaleCheck check_martingale_increments(
    const Lattice& lattice,
    const std::function<double(std::size_t n, std::size_t j, bool up)>& increment,
    const MeasureSpec& measure);

/// Increment of K^1 (dK = dS + dividends - r^1 S dt) on the step leaving (n, j):
/// S_{n+1} e^{kappa dt} - S_n e^{r^1 dt}.
double cum_dividend_increment(const Lattice& lattice, const RateSpec& repo, std::size_t n,
                              std::size_t j, bool up);

MartingaleCheck check_cum_dividend_martingale(const Lattice& lattice, const RateSpec& repo,
                                              const MeasureSpec& measure);

/// Valuation of a replicated terminal payoff under the measure whose drift is
/// gamma instead of the cash rate r0.
struct GammaPrice {
    double value_gamma = 0.0;
    double value_riskneutral = 0.0;
    double gap = 0.0;           // value_gamma - value_riskneutral
    double relative_gap = 0.0;  // |gap| / max(|value_riskneutral|, tiny)
    BsdeSolution gamma_solution;
};

/// `replication` is the cash-funded (SingleCurve, rate r0) solution whose
/// wealth ends at the payoff; its surfaces supply psi^0 B^0 = V - xi S. Both
/// values run through discount_switch_driver: target gamma with the
/// (gamma - r0) psi^0 B^0 source, and target r0 with a vanishing source.
GammaPrice gamma_measure_price(const RateSpec& gamma, const BsdeSolution& replication,
                               const AccountSet& accounts, const Lattice& lattice,
                               SourceConvention convention = SourceConvention::LeftEndpoint);

struct GammaMartingaleReport {
    double max_defect = 0.0;         // largest one-step defect of V^gamma / B^gamma
    double defect_rate = 0.0;        // max_defect / dt
    double cumulative_defect = 0.0;  // sum over steps of the per-step maximum
    std::size_t step = 0;
    std::size_t node = 0;
};

/// One-step defect of V^gamma / B^gamma under drift-gamma weights, where
/// V^gamma adds the accumulated (gamma - r0) psi^0 B^0 / B^gamma source to the
/// replication wealth.
GammaMartingaleReport check_gamma_martingale(const RateSpec& gamma, const BsdeSolution& replication,
                                             const AccountSet& accounts, const Lattice& lattice,
                                             SourceConvention convention = SourceConvention::LeftEndpoint);

}  // namespace fundhedge
