#include "scalepop/stats.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "scalepop/errors.hpp"

namespace scalepop {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Shared histogram core: counts, geometric centers, count/width densities.
DistributionEstimate binned_estimate(std::span<const std::int64_t> values,
                                     std::vector<double> edges) {
    DistributionEstimate dist;
    if (values.empty() && edges.empty()) return dist;
    if (edges.empty()) {
        const std::int64_t max_v = *std::max_element(values.begin(), values.end());
        edges = log_bins(1.0, static_cast<double>(max_v));
    }
    dist.bin_edges = std::move(edges);
    const std::size_t n_bins = dist.bin_edges.size() - 1;
    dist.counts.assign(n_bins, 0);
    for (const std::int64_t v : values) {
        const int idx = bin_index(dist.bin_edges, static_cast<double>(v));
        if (idx >= 0) ++dist.counts[static_cast<std::size_t>(idx)];
    }
    dist.centers.resize(n_bins);
    dist.densities.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        const double lo = dist.bin_edges[i];
        const double hi = dist.bin_edges[i + 1];
        dist.centers[i] = std::sqrt(lo * hi);
        dist.densities[i] = static_cast<double>(dist.counts[i]) / (hi - lo);
    }
    return dist;
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

void finish_csv(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoError("write failure on " + path);
}

} // namespace

std::vector<double> log_bins(double lo, double hi, int bins_per_decade) {
    if (!(lo > 0.0) || !(hi >= lo) || bins_per_decade < 1)
        throw std::invalid_argument("log_bins: need 0 < lo <= hi and bins_per_decade >= 1");
    // Snap to the global 10^(k/bpd) grid so bins line up across data sets.
    const double bpd = static_cast<double>(bins_per_decade);
    const long k_lo = static_cast<long>(std::floor(std::log10(lo) * bpd + 1e-9));
    long k_hi = static_cast<long>(std::ceil(std::log10(hi) * bpd - 1e-9));
    if (k_hi <= k_lo) k_hi = k_lo + 1;
    std::vector<double> edges;
    edges.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
    for (long k = k_lo; k <= k_hi; ++k)
        edges.push_back(std::pow(10.0, static_cast<double>(k) / bpd));
    return edges;
}

int bin_index(std::span<const double> edges, double v) {
    if (edges.size() < 2 || v < edges.front() || v > edges.back()) return -1;
    if (v == edges.back()) return static_cast<int>(edges.size()) - 2;
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    return static_cast<int>(it - edges.begin()) - 1;
}

double prediction_accuracy(double mean_utility_at_t1, std::int64_t t1) {
    if (t1 < 1) throw std::invalid_argument("prediction_accuracy: t1 must be >= 1");
    return (static_cast<double>(t1) + mean_utility_at_t1) / (2.0 * static_cast<double>(t1));
}

double empirical_ccdf(std::span<const std::int64_t> values, double x) {
    if (values.empty()) throw InsufficientDataError("empirical_ccdf: no values");
    std::int64_t above = 0;
    for (const std::int64_t v : values)
        if (static_cast<double>(v) > x) ++above;
    return static_cast<double>(above) / static_cast<double>(values.size());
}

DistributionEstimate lifetime_hist(std::span<const std::int64_t> lifetimes,
                                   std::vector<double> bin_edges,
                                   std::int64_t censored_survivors) {
    DistributionEstimate dist = binned_estimate(lifetimes, std::move(bin_edges));
    dist.censored = censored_survivors;
    if (!lifetimes.empty()) {
        dist.ccdf.resize(dist.centers.size());
        for (std::size_t i = 0; i < dist.centers.size(); ++i)
            dist.ccdf[i] = empirical_ccdf(lifetimes, dist.centers[i]);
    }
    return dist;
}

DistributionEstimate lifetime_hist(std::span<const DeathEvent> deaths,
                                   std::vector<double> bin_edges,
                                   std::int64_t censored_survivors) {
    std::vector<std::int64_t> lifetimes;
    lifetimes.reserve(deaths.size());
    for (const DeathEvent& d : deaths) lifetimes.push_back(d.lifetime);
    return lifetime_hist(lifetimes, std::move(bin_edges), censored_survivors);
}

DistributionEstimate deaths_per_tick_hist(std::span<const DeathEvent> deaths,
                                          std::int64_t total_ticks) {
    if (total_ticks < 1)
        throw std::invalid_argument("deaths_per_tick_hist: total_ticks must be >= 1");
    std::unordered_map<std::int64_t, std::int64_t> per_tick;
    per_tick.reserve(deaths.size());
    for (const DeathEvent& d : deaths) ++per_tick[d.tick];
    std::vector<std::int64_t> counts;
    counts.reserve(per_tick.size());
    for (const auto& [tick, count] : per_tick) counts.push_back(count);
    return binned_estimate(counts, {});
}

Hist2D lifetime_scale_hist2d(std::span<const DeathEvent> deaths,
                             std::vector<double> lifetime_edges,
                             std::vector<double> scale_edges) {
    if (lifetime_edges.size() < 2 || scale_edges.size() < 2)
        throw std::invalid_argument("lifetime_scale_hist2d: need at least one bin per axis");
    Hist2D grid;
    grid.lifetime_edges = std::move(lifetime_edges);
    grid.scale_edges = std::move(scale_edges);
    grid.counts.assign(grid.rows() * grid.cols(), 0);
    for (const DeathEvent& d : deaths) {
        const int i = bin_index(grid.lifetime_edges, static_cast<double>(d.lifetime));
        const int j = bin_index(grid.scale_edges, static_cast<double>(d.scale));
        if (i >= 0 && j >= 0)
            ++grid.counts[static_cast<std::size_t>(i) * grid.cols() + static_cast<std::size_t>(j)];
    }
    return grid;
}

std::vector<std::int64_t> marginal_lifetime(const Hist2D& h) {
    std::vector<std::int64_t> out(h.rows(), 0);
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = 0; j < h.cols(); ++j) out[i] += h.at(i, j);
    return out;
}

std::vector<std::int64_t> marginal_scale(const Hist2D& h) {
    std::vector<std::int64_t> out(h.cols(), 0);
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = 0; j < h.cols(); ++j) out[j] += h.at(i, j);
    return out;
}

FitResult fit_effective_index(std::span<const double> x, std::span<const double> y, double lo,
                              double hi) {
    if (x.size() != y.size())
        throw std::invalid_argument("fit_effective_index: size mismatch");
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= lo && x[i] <= hi && x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log10(x[i]));
            ly.push_back(std::log10(y[i]));
        }
    }
    if (lx.size() < 3)
        throw InsufficientDataError("fit_effective_index: fewer than 3 populated bins in range");

    const double n = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    FitResult fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    fit.points = static_cast<int>(lx.size());
    return fit;
}

FitResult fit_effective_index(const DistributionEstimate& dist, double lo, double hi) {
    return fit_effective_index(dist.centers, dist.densities, lo, hi);
}

// ---- CSV emission ----------------------------------------------------

void write_transient_csv(const std::string& path, std::span<const TransientSample> samples) {
    auto out = open_csv(path);
    out << "tick,mean_utility,mean_age,deaths_cum,passive_fraction\n";
    for (const TransientSample& s : samples)
        out << s.tick << ',' << fmt(s.mean_utility) << ',' << fmt(s.mean_age) << ','
            << s.deaths_so_far << ',' << fmt(s.passive_fraction) << '\n';
    finish_csv(out, path);
}

void write_deaths_csv(const std::string& path, std::span<const DeathEvent> deaths) {
    auto out = open_csv(path);
    out << "tick,lifetime,scale,agent_id,generation\n";
    for (const DeathEvent& d : deaths)
        out << d.tick << ',' << d.lifetime << ',' << d.scale << ',' << d.agent_id << ','
            << d.generation << '\n';
    finish_csv(out, path);
}

void write_lifetime_dist_csv(const std::string& path, const DistributionEstimate& dist) {
    auto out = open_csv(path);
    out << "bin_center,density,ccdf\n";
    for (std::size_t i = 0; i < dist.centers.size(); ++i)
        out << fmt(dist.centers[i]) << ',' << fmt(dist.densities[i]) << ','
            << fmt(dist.ccdf.empty() ? 0.0 : dist.ccdf[i]) << '\n';
    finish_csv(out, path);
}

void write_deathrate_dist_csv(const std::string& path, const DistributionEstimate& dist) {
    auto out = open_csv(path);
    out << "count,density\n";
    for (std::size_t i = 0; i < dist.centers.size(); ++i)
        out << fmt(dist.centers[i]) << ',' << fmt(dist.densities[i]) << '\n';
    finish_csv(out, path);
}

void write_summary_csv(const std::string& path, const SummaryStats& s) {
    auto out = open_csv(path);
    out << "key,value\n";
    out << "ticks," << s.ticks << '\n';
    out << "pa," << fmt(s.pa) << '\n';
    out << "t1," << s.t1 << '\n';
    out << "mean_utility_t1," << fmt(s.mean_utility_t1) << '\n';
    out << "deaths," << s.deaths << '\n';
    out << "survivors_never_died," << s.survivors_never_died << '\n';
    out << "censored_incarnations," << s.censored_incarnations << '\n';
    out << "settled," << s.settled << '\n';
    out << "correct," << s.correct << '\n';
    out << "wrong," << s.wrong << '\n';
    out << "discarded," << s.discarded << '\n';
    out << "passive_decisions," << s.passive_decisions << '\n';
    out << "lifetime_index," << fmt(s.lifetime_index) << '\n';
    out << "lifetime_fit_lo," << fmt(s.lifetime_fit_lo) << '\n';
    out << "lifetime_fit_hi," << fmt(s.lifetime_fit_hi) << '\n';
    out << "lifetime_fit_residual," << fmt(s.lifetime_fit_residual) << '\n';
    out << "deathrate_index," << fmt(s.deathrate_index) << '\n';
    out << "deathrate_fit_lo," << fmt(s.deathrate_fit_lo) << '\n';
    out << "deathrate_fit_hi," << fmt(s.deathrate_fit_hi) << '\n';
    out << "deathrate_fit_residual," << fmt(s.deathrate_fit_residual) << '\n';
    finish_csv(out, path);
}

} // namespace scalepop
