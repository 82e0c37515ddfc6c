#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace scalepop {

struct TransientSample {
    std::int64_t tick = 0;
    double mean_utility = 0.0;
    double mean_age = 0.0;
    std::int64_t deaths_so_far = 0;
    double passive_fraction = 0.0; // fraction of agents gated to 0 this tick
};

struct DeathEvent {
    std::int64_t tick = 0;     // tick of the fatal settlement == successor's birth tick
    std::int64_t lifetime = 0; // tick - birth_tick, always >= 1
    std::int64_t scale = 0;
    std::int32_t agent_id = 0;
    std::int32_t generation = 0;
};

struct FitResult {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    double rms_residual = std::numeric_limits<double>::quiet_NaN();
    int points = 0;
};

// Log-binned density estimate. Lifetime histograms additionally carry the
// complementary cumulative P(X > center) evaluated at each bin center, and
// the count of right-censored observations excluded from the density.
struct DistributionEstimate {
    std::vector<double> bin_edges; // strictly increasing, log-spaced
    std::vector<double> centers;   // geometric bin centers
    std::vector<std::int64_t> counts;
    std::vector<double> densities; // count / bin width
    std::vector<double> ccdf;      // empty for non-lifetime estimates
    std::int64_t censored = 0;
    double fit_lo = std::numeric_limits<double>::quiet_NaN();
    double fit_hi = std::numeric_limits<double>::quiet_NaN();
    double effective_index = std::numeric_limits<double>::quiet_NaN();
    double fit_residual = std::numeric_limits<double>::quiet_NaN();
};

// Edges at 10^(k/bins_per_decade) covering [lo, hi]. Always >= 2 edges.
std::vector<double> log_bins(double lo, double hi, int bins_per_decade = 10);

// Index of the bin holding v ([edge_i, edge_{i+1}), last bin closed), or -1
// when v falls outside the edges.
int bin_index(std::span<const double> edges, double v);

// Population means at tick t. Works over any range of agent-like records
// exposing .utility and .birth_tick.
template <typename Population>
TransientSample sample_transient(const Population& agents, std::int64_t t,
                                 std::int64_t deaths_so_far, double passive_fraction) {
    std::int64_t sum_utility = 0;
    std::int64_t sum_age = 0;
    std::int64_t n = 0;
    for (const auto& agent : agents) {
        sum_utility += agent.utility;
        sum_age += t - agent.birth_tick;
        ++n;
    }
    return {t, static_cast<double>(sum_utility) / static_cast<double>(n),
            static_cast<double>(sum_age) / static_cast<double>(n), deaths_so_far,
            passive_fraction};
}

// (t1 + mean_utility(t1)) / (2 t1): the fraction of settled predictions that
// were correct, recovered from the mean utility level. Affine in the mean:
// a +2 utility shift moves the result by exactly 1/t1. t1 must be >= 1.
double prediction_accuracy(double mean_utility_at_t1, std::int64_t t1);

// Fraction of values strictly greater than x. values need not be sorted.
double empirical_ccdf(std::span<const std::int64_t> values, double x);

// Log-binned density + CCDF of completed lifetimes. Pass empty edges to bin
// from 1 to the observed maximum. Right-censored survivors are only counted,
// never binned.
DistributionEstimate lifetime_hist(std::span<const std::int64_t> lifetimes,
                                   std::vector<double> bin_edges = {},
                                   std::int64_t censored_survivors = 0);
DistributionEstimate lifetime_hist(std::span<const DeathEvent> deaths,
                                   std::vector<double> bin_edges = {},
                                   std::int64_t censored_survivors = 0);

// Distribution of the number of deaths per tick, over ticks with at least
// one death. total_ticks must be >= 1.
DistributionEstimate deaths_per_tick_hist(std::span<const DeathEvent> deaths,
                                          std::int64_t total_ticks);

// Joint (lifetime, scale) counts on explicit log bins, row-major by lifetime.
struct Hist2D {
    std::vector<double> lifetime_edges;
    std::vector<double> scale_edges;
    std::vector<std::int64_t> counts;

    std::size_t rows() const { return lifetime_edges.empty() ? 0 : lifetime_edges.size() - 1; }
    std::size_t cols() const { return scale_edges.empty() ? 0 : scale_edges.size() - 1; }
    std::int64_t at(std::size_t i, std::size_t j) const { return counts[i * cols() + j]; }
};

Hist2D lifetime_scale_hist2d(std::span<const DeathEvent> deaths,
                             std::vector<double> lifetime_edges, std::vector<double> scale_edges);
std::vector<std::int64_t> marginal_lifetime(const Hist2D& h);
std::vector<std::int64_t> marginal_scale(const Hist2D& h);

// Unweighted least squares of log10(y) on log10(x) over points with
// lo <= x <= hi and y > 0. Needs at least 3 such points, otherwise throws
// InsufficientDataError. The residual is the RMS misfit in log10 space.
FitResult fit_effective_index(std::span<const double> x, std::span<const double> y, double lo,
                              double hi);
FitResult fit_effective_index(const DistributionEstimate& dist, double lo, double hi);

// ---- CSV emission ----------------------------------------------------

struct SummaryStats {
    std::int64_t ticks = 0;
    double pa = std::numeric_limits<double>::quiet_NaN();
    std::int64_t t1 = 0;
    double mean_utility_t1 = std::numeric_limits<double>::quiet_NaN();
    std::int64_t deaths = 0;
    std::int64_t survivors_never_died = 0;
    std::int64_t censored_incarnations = 0;
    std::int64_t settled = 0;
    std::int64_t correct = 0;
    std::int64_t wrong = 0;
    std::int64_t discarded = 0;
    std::int64_t passive_decisions = 0;
    double lifetime_index = std::numeric_limits<double>::quiet_NaN();
    double lifetime_fit_lo = std::numeric_limits<double>::quiet_NaN();
    double lifetime_fit_hi = std::numeric_limits<double>::quiet_NaN();
    double lifetime_fit_residual = std::numeric_limits<double>::quiet_NaN();
    double deathrate_index = std::numeric_limits<double>::quiet_NaN();
    double deathrate_fit_lo = std::numeric_limits<double>::quiet_NaN();
    double deathrate_fit_hi = std::numeric_limits<double>::quiet_NaN();
    double deathrate_fit_residual = std::numeric_limits<double>::quiet_NaN();
};

// All writers emit UTF-8 CSV with a header row and '\n' line ends, and
// throw IoError when the file cannot be written.
void write_transient_csv(const std::string& path, std::span<const TransientSample> samples);
void write_deaths_csv(const std::string& path, std::span<const DeathEvent> deaths);
void write_lifetime_dist_csv(const std::string& path, const DistributionEstimate& dist);
void write_deathrate_dist_csv(const std::string& path, const DistributionEstimate& dist);
void write_summary_csv(const std::string& path, const SummaryStats& summary);

} // namespace scalepop
