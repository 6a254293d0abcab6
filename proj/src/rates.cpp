#include "fundhedge/rates.hpp"

#include "fundhedge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fundhedge {

namespace {

constexpr const char* kModule = "market-model";

std::string fmt_time(double t) {
    std::ostringstream os;
    os.precision(12);
    os << t;
    return os.str();
}

}  // namespace

RateSpec::RateSpec()
    : breakpoints_{0.0, std::numeric_limits<double>::infinity()}, values_{0.0} {}

RateSpec::RateSpec(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (breakpoints_.size() < 2 || values_.size() + 1 != breakpoints_.size()) {
        throw DomainError(kModule, "rate needs n+1 breakpoints for n values");
    }
    if (breakpoints_.front() != 0.0) {
        throw DomainError(kModule, "first rate breakpoint must be 0");
    }
    for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
        if (!(breakpoints_[k] > breakpoints_[k - 1])) {
            throw DomainError(kModule, "rate breakpoints must be strictly increasing");
        }
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw DomainError(kModule, "rate values must be finite");
    }
}

RateSpec RateSpec::flat(double rate, double horizon) {
    return RateSpec({0.0, horizon}, {rate});
}

double RateSpec::value_at(double t) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    std::ptrdiff_t k = (it - breakpoints_.begin()) - 1;
    k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(values_.size()) - 1);
    return values_[static_cast<std::size_t>(k)];
}

double RateSpec::integral(double t0, double t1) const {
    if (t1 < t0) return -integral(t1, t0);
    double sum = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) {
        const double a = std::max(t0, breakpoints_[k]);
        const double b = std::min(t1, breakpoints_[k + 1]);
        if (b > a) sum += values_[k] * (b - a);
    }
    return sum;
}

bool RateSpec::is_flat() const {
    return std::all_of(values_.begin(), values_.end(),
                       [&](double v) { return v == values_.front(); });
}

double RateSpec::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
double RateSpec::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

void RateSpec::check_covers(double T, const std::string& name) const {
    if (horizon() < T * (1.0 - 1e-12)) {
        throw DomainError(kModule, name + " is defined up to " + fmt_time(horizon()) +
                                       " but the horizon is " + fmt_time(T));
    }
}

void RateSpec::check_aligned(double T, std::size_t N, const std::string& name) const {
    const double dt = T / static_cast<double>(N);
    for (double b : breakpoints_) {
        if (b <= 0.0 || b >= T * (1.0 - 1e-12)) continue;
        const double k = b / dt;
        if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
            throw StepSizeError(kModule, "breakpoint " + fmt_time(b) + " of " + name +
                                             " is not on the time grid (N=" + std::to_string(N) +
                                             ", dt=" + fmt_time(dt) + ")");
        }
    }
}

RateSpec RateSpec::combine(const RateSpec& a, const RateSpec& b, double sign) {
    std::vector<double> grid;
    std::merge(a.breakpoints_.begin(), a.breakpoints_.end(), b.breakpoints_.begin(),
               b.breakpoints_.end(), std::back_inserter(grid));
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const double horizon = std::min(a.horizon(), b.horizon());
    while (grid.size() > 1 && grid.back() > horizon) grid.pop_back();
    if (grid.back() < horizon) grid.push_back(horizon);
    std::vector<double> values;
    values.reserve(grid.size() - 1);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double probe = std::isfinite(grid[k + 1]) ? 0.5 * (grid[k] + grid[k + 1]) : grid[k];
        values.push_back(a.value_at(probe) + sign * b.value_at(probe));
    }
    return RateSpec(std::move(grid), std::move(values));
}

double accrual(const RateSpec& rate, double t0, double t1) {
    if (t0 < 0.0 || t1 < t0 || t1 > rate.horizon()) {
        throw DomainError(kModule, "accrual interval [" + fmt_time(t0) + ", " + fmt_time(t1) +
                                       "] outside [0, " + fmt_time(rate.horizon()) + "]");
    }
    return std::exp(rate.integral(t0, t1));
}

AccountSet AccountSet::flat(double r, std::size_t asset_count) {
    const RateSpec rate = RateSpec::flat(r);
    AccountSet set;
    set.cash_lend = rate;
    set.cash_borrow = rate;
    set.assets.assign(asset_count, AssetFunding::single(rate));
    set.collateral_received = rate;
    set.collateral_posted = rate;
    set.collateral_reinvest = rate;
    set.collateral_borrow = rate;
    return set;
}

void AccountSet::check_covers(double T) const {
    cash_lend.check_covers(T, "cash_lend");
    cash_borrow.check_covers(T, "cash_borrow");
    for (std::size_t i = 0; i < assets.size(); ++i) {
        assets[i].lend.check_covers(T, "asset " + std::to_string(i + 1) + " lend");
        assets[i].borrow.check_covers(T, "asset " + std::to_string(i + 1) + " borrow");
    }
    collateral_received.check_covers(T, "collateral_received");
    collateral_posted.check_covers(T, "collateral_posted");
    collateral_reinvest.check_covers(T, "collateral_reinvest");
    collateral_borrow.check_covers(T, "collateral_borrow");
}

void AccountSet::check_aligned(double T, std::size_t N) const {
    cash_lend.check_aligned(T, N, "cash_lend");
    cash_borrow.check_aligned(T, N, "cash_borrow");
    for (std::size_t i = 0; i < assets.size(); ++i) {
        assets[i].lend.check_aligned(T, N, "asset " + std::to_string(i + 1) + " lend");
        assets[i].borrow.check_aligned(T, N, "asset " + std::to_string(i + 1) + " borrow");
    }
    collateral_received.check_aligned(T, N, "collateral_received");
    collateral_posted.check_aligned(T, N, "collateral_posted");
    collateral_reinvest.check_aligned(T, N, "collateral_reinvest");
    collateral_borrow.check_aligned(T, N, "collateral_borrow");
}

AccountSet AccountSet::with_all_rates(const RateSpec& r) const {
    AccountSet out;
    out.cash_lend = r;
    out.cash_borrow = r;
    out.assets.assign(assets.size(), AssetFunding::single(r));
    out.collateral_received = r;
    out.collateral_posted = r;
    out.collateral_reinvest = r;
    out.collateral_borrow = r;
    return out;
}

std::vector<double> merged_grid(const std::vector<const RateSpec*>& rates, double T) {
    std::vector<double> grid{0.0, T};
    for (const RateSpec* r : rates) {
        for (double b : r->breakpoints()) {
            if (b > 0.0 && b < T) grid.push_back(b);
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

OrderingCertificate ordering_certificate(const AccountSet& accounts, double T) {
    std::vector<const RateSpec*> curves{&accounts.cash_lend, &accounts.cash_borrow};
    for (const auto& a : accounts.assets) curves.push_back(&a.borrow);
    const auto grid = merged_grid(curves, T);

    OrderingCertificate cert;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double mid = 0.5 * (grid[k] + grid[k + 1]);
        CertificateInterval iv;
        iv.start = grid[k];
        iv.end = grid[k + 1];
        iv.cash_lend = accounts.cash_lend.value_at(mid);
        iv.cash_borrow = accounts.cash_borrow.value_at(mid);
        iv.cash_ordered = iv.cash_lend <= iv.cash_borrow;
        for (const auto& a : accounts.assets) {
            const double rb = a.borrow.value_at(mid);
            iv.asset_borrow.push_back(rb);
            if (!(iv.cash_lend <= rb)) iv.assets_ordered = false;
        }
        cert.holds = cert.holds && iv.cash_ordered && iv.assets_ordered;
        cert.intervals.push_back(std::move(iv));
    }
    return cert;
}

Growth step_growth(const RateSpec& rate, double t0, double dt) {
    const double r = rate.on_step(t0, dt);
    return {r, std::expm1(r * dt)};
}

StepRates step_rates(const AccountSet& accounts, double t0, double dt) {
    StepRates s;
    s.dt = dt;
    s.cash_lend = step_growth(accounts.cash_lend, t0, dt);
    s.cash_borrow = step_growth(accounts.cash_borrow, t0, dt);
    s.asset_lend.reserve(accounts.assets.size());
    s.asset_borrow.reserve(accounts.assets.size());
    for (const auto& a : accounts.assets) {
        s.asset_lend.push_back(step_growth(a.lend, t0, dt));
        s.asset_borrow.push_back(step_growth(a.borrow, t0, dt));
    }
    s.collateral_received = step_growth(accounts.collateral_received, t0, dt);
    s.collateral_posted = step_growth(accounts.collateral_posted, t0, dt);
    s.collateral_reinvest = step_growth(accounts.collateral_reinvest, t0, dt);
    s.collateral_borrow = step_growth(accounts.collateral_borrow, t0, dt);
    return s;
}

}  // namespace fundhedge
