#include "scalepop/cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "scalepop/errors.hpp"
#include "scalepop/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace scalepop::cli {

namespace {

// Every knob a flag, a config file or a preset can set. Layering works on
// optionals so "not given" and "given the default value" stay distinct.
struct RawOptions {
    std::optional<std::string> data;
    std::optional<std::string> columns;
    std::optional<std::string> synthetic;
    std::optional<SyntheticSpec> synthetic_parsed;
    std::optional<std::string> preset;
    std::optional<std::string> strategy;
    std::optional<std::string> merchant;
    std::optional<std::int64_t> h;
    std::optional<std::int64_t> n_tf;
    std::optional<std::int64_t> u_born;
    std::optional<std::int64_t> l_min;
    std::optional<std::int64_t> l_max;
    std::optional<double> sigma;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> sample_every;
    std::optional<std::int64_t> t1;
    std::optional<std::string> fit_range;
    std::optional<std::string> deathrate_fit_range;
    std::optional<std::string> out;
};

std::string fmt_double(double v) {
    char buf[40];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v); // shortest round-trip
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), last, v);
    if (ec != std::errc() || ptr != last)
        throw UsageError("bad number for " + what + ": \"" + s + "\"");
    return v;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
    std::int64_t v = 0;
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), last, v);
    if (ec != std::errc() || ptr != last)
        throw UsageError("bad integer for " + what + ": \"" + s + "\"");
    return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& what) {
    std::uint64_t v = 0;
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), last, v);
    if (ec != std::errc() || ptr != last)
        throw UsageError("bad unsigned integer for " + what + ": \"" + s + "\"");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// "coin:length=1000000,seed=7" or just "coin".
SyntheticSpec parse_synth_spec(const std::string& text) {
    SyntheticSpec spec;
    const std::size_t colon = text.find(':');
    spec.model = parse_synth_model(text.substr(0, colon));
    bool have_length = false;
    if (colon != std::string::npos) {
        for (const std::string& kv : split(text.substr(colon + 1), ',')) {
            const std::size_t eq = kv.find('=');
            if (eq == std::string::npos)
                throw UsageError("synthetic spec entries must be key=value: \"" + kv + "\"");
            const std::string key = kv.substr(0, eq);
            const std::string val = kv.substr(eq + 1);
            if (key == "length") {
                spec.length = parse_int(val, "synthetic length");
                have_length = true;
            } else if (key == "step") {
                spec.step = parse_double(val, "synthetic step");
            } else if (key == "p0") {
                spec.p0 = parse_double(val, "synthetic p0");
            } else if (key == "seed") {
                spec.seed = parse_uint(val, "synthetic seed");
            } else {
                throw UsageError("unknown synthetic spec key: \"" + key + "\"");
            }
        }
    }
    if (!have_length || spec.length < 1)
        throw UsageError("synthetic spec needs length=N with N >= 1");
    return spec;
}

FitRange parse_fit_range(const std::string& text, const std::string& what) {
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw UsageError(what + " must be LO:HI, got \"" + text + "\"");
    FitRange range{parse_double(text.substr(0, colon), what),
                   parse_double(text.substr(colon + 1), what)};
    if (!(range.lo > 0.0) || !(range.hi > range.lo))
        throw UsageError(what + " must satisfy 0 < LO < HI");
    return range;
}

void apply_preset(RunSpec& spec, const std::string& name) {
    SimConfig base; // stock population every preset shares
    base.n_tf = 1000;
    base.u_born = 10;
    base.l_min = 1;
    base.l_max = 100000;
    base.mutation_sigma = 3000.0;
    if (name == "paper-h1") base.h = 1;
    else if (name == "paper-h100") base.h = 100;
    else if (name == "paper-h1000") base.h = 1000;
    else throw UsageError("unknown preset: \"" + name + "\"");
    base.strategy = spec.sim.strategy;
    base.merchant_mode = spec.sim.merchant_mode;
    base.seed = spec.sim.seed;
    base.sample_every = spec.sim.sample_every;
    spec.sim = base;
}

// JSON config file -> the same option set the flags produce.
RawOptions read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw UsageError("config file must hold a JSON object");

    RawOptions opts;
    for (const auto& [key, value] : doc.items()) {
        try {
            if (value.is_null()) continue;
            if (key == "data") opts.data = value.get<std::string>();
            else if (key == "columns") opts.columns = value.get<std::string>();
            else if (key == "synthetic") {
                if (value.is_string()) {
                    opts.synthetic_parsed = parse_synth_spec(value.get<std::string>());
                } else {
                    SyntheticSpec s;
                    s.model = parse_synth_model(value.at("model").get<std::string>());
                    s.length = value.at("length").get<std::int64_t>();
                    if (value.contains("step")) s.step = value.at("step").get<double>();
                    if (value.contains("p0")) s.p0 = value.at("p0").get<double>();
                    if (value.contains("seed")) s.seed = value.at("seed").get<std::uint64_t>();
                    if (s.length < 1) throw UsageError("synthetic length must be >= 1");
                    opts.synthetic_parsed = s;
                }
            } else if (key == "preset") opts.preset = value.get<std::string>();
            else if (key == "strategy") opts.strategy = value.get<std::string>();
            else if (key == "merchant") opts.merchant = value.get<std::string>();
            else if (key == "h") opts.h = value.get<std::int64_t>();
            else if (key == "n_tf") opts.n_tf = value.get<std::int64_t>();
            else if (key == "u_born") opts.u_born = value.get<std::int64_t>();
            else if (key == "l_min") opts.l_min = value.get<std::int64_t>();
            else if (key == "l_max") opts.l_max = value.get<std::int64_t>();
            else if (key == "sigma") opts.sigma = value.get<double>();
            else if (key == "seed") opts.seed = value.get<std::uint64_t>();
            else if (key == "sample_every") opts.sample_every = value.get<std::int64_t>();
            else if (key == "t1") opts.t1 = value.get<std::int64_t>();
            else if (key == "fit_range") opts.fit_range = value.get<std::string>();
            else if (key == "deathrate_fit_range")
                opts.deathrate_fit_range = value.get<std::string>();
            else if (key == "out") opts.out = value.get<std::string>();
            else throw UsageError("unknown config key: \"" + key + "\"");
        } catch (const json::exception& e) {
            throw UsageError("config key \"" + key + "\": " + e.what());
        }
    }
    return opts;
}

void apply(RunSpec& spec, const RawOptions& o) {
    if (o.data) spec.data_path = *o.data;
    if (o.columns) spec.columns = *o.columns;
    if (o.synthetic_parsed) spec.synthetic = *o.synthetic_parsed;
    else if (o.synthetic) spec.synthetic = parse_synth_spec(*o.synthetic);
    if (o.strategy) spec.sim.strategy = parse_strategy(*o.strategy);
    if (o.merchant) spec.sim.merchant_mode = parse_merchant_mode(*o.merchant);
    if (o.h) spec.sim.h = *o.h;
    if (o.n_tf) spec.sim.n_tf = *o.n_tf;
    if (o.u_born) spec.sim.u_born = *o.u_born;
    if (o.l_min) spec.sim.l_min = *o.l_min;
    if (o.l_max) spec.sim.l_max = *o.l_max;
    if (o.sigma) spec.sim.mutation_sigma = *o.sigma;
    if (o.seed) spec.sim.seed = *o.seed;
    if (o.sample_every) spec.sim.sample_every = *o.sample_every;
    if (o.t1) spec.t1 = *o.t1;
    if (o.fit_range) spec.lifetime_fit = parse_fit_range(*o.fit_range, "fit-range");
    if (o.deathrate_fit_range)
        spec.deathrate_fit = parse_fit_range(*o.deathrate_fit_range, "deathrate-fit-range");
    if (o.out) spec.out_dir = *o.out;
}

void apply_sweep_value(RunSpec& spec, const std::string& key, const std::string& value) {
    if (key == "h") spec.sim.h = parse_int(value, "sweep h");
    else if (key == "seed") spec.sim.seed = parse_uint(value, "sweep seed");
    else if (key == "strategy") spec.sim.strategy = parse_strategy(value);
    else if (key == "merchant") spec.sim.merchant_mode = parse_merchant_mode(value);
    else if (key == "n-tf") spec.sim.n_tf = parse_int(value, "sweep n-tf");
    else if (key == "u-born") spec.sim.u_born = parse_int(value, "sweep u-born");
    else if (key == "l-min") spec.sim.l_min = parse_int(value, "sweep l-min");
    else if (key == "l-max") spec.sim.l_max = parse_int(value, "sweep l-max");
    else if (key == "sigma") spec.sim.mutation_sigma = parse_double(value, "sweep sigma");
    else if (key == "sample-every") spec.sim.sample_every = parse_int(value, "sweep sample-every");
    else throw UsageError("cannot sweep over \"" + key + "\"");
}

json resolved_config_json(const RunSpec& spec) {
    json j;
    j["data"] = spec.data_path ? json(*spec.data_path) : json(nullptr);
    j["columns"] = spec.columns;
    if (spec.synthetic) {
        j["synthetic"] = {{"model", to_string(spec.synthetic->model)},
                          {"length", spec.synthetic->length},
                          {"step", spec.synthetic->step},
                          {"p0", spec.synthetic->p0},
                          {"seed", spec.synthetic->seed}};
    } else {
        j["synthetic"] = nullptr;
    }
    j["strategy"] = to_string(spec.sim.strategy);
    j["merchant"] = to_string(spec.sim.merchant_mode);
    j["h"] = spec.sim.h;
    j["n_tf"] = spec.sim.n_tf;
    j["u_born"] = spec.sim.u_born;
    j["l_min"] = spec.sim.l_min;
    j["l_max"] = spec.sim.l_max;
    j["sigma"] = spec.sim.mutation_sigma;
    j["seed"] = spec.sim.seed;
    j["sample_every"] = spec.sim.sample_every;
    j["t1"] = spec.t1 ? json(*spec.t1) : json(nullptr);
    j["fit_range"] = fmt_double(spec.lifetime_fit.lo) + ":" + fmt_double(spec.lifetime_fit.hi);
    const FitRange rate = spec.deathrate_fit.value_or(default_deathrate_fit(spec.sim.strategy));
    j["deathrate_fit_range"] = fmt_double(rate.lo) + ":" + fmt_double(rate.hi);
    j["out"] = spec.out_dir;
    return j;
}

void validate_spec(const RunSpec& spec) {
    if (spec.data_path && spec.synthetic)
        throw UsageError("give either --data or --synthetic, not both");
    if (!spec.data_path && !spec.synthetic)
        throw UsageError("no data source: give --data PATH or --synthetic SPEC");
    if (spec.t1 && *spec.t1 < 1) throw UsageError("t1 must be >= 1");
    if (spec.out_dir.empty())
        throw UsageError("no output directory: give --out DIR or set SCALEPOP_OUT");
    spec.sim.validate();
    ColumnLayout::from_spec(spec.columns); // surface bad column specs before running
}

} // namespace

FitRange default_deathrate_fit(Strategy s) {
    switch (s) {
        case Strategy::independent: return {1.0, 11.27};
        case Strategy::bm: return {1.0, 11.64};
        case Strategy::rm:
        case Strategy::bm_rm: return {1.0, 11.75};
    }
    return {1.0, 11.27};
}

Invocation parse_config(const std::vector<std::string>& args) {
    CLI::App app{"scalepop: tick-driven simulator of scale-diversified trend-follower populations"};
    app.set_help_flag("--help", "print usage and exit");

    RawOptions flags;
    std::optional<std::string> config_path;
    std::optional<std::string> sweep;
    app.add_option("--data", flags.data, "tick CSV file (timestamp,bid,ask)");
    app.add_option("--columns", flags.columns, "column order, e.g. ts,bid,ask");
    app.add_option("--synthetic", flags.synthetic,
                   "synthetic series, e.g. coin:length=1000000,seed=7");
    app.add_option("--preset", flags.preset, "paper-h1 | paper-h100 | paper-h1000");
    app.add_option("--config", config_path, "JSON config file (flags override it)");
    app.add_option("--strategy", flags.strategy, "independent | bm | rm | bm_rm");
    app.add_option("--merchant", flags.merchant, "argmax | weighted");
    app.add_option("--h", flags.h, "prediction horizon in ticks");
    app.add_option("--n-tf", flags.n_tf, "population size");
    app.add_option("--u-born", flags.u_born, "utility granted at birth");
    app.add_option("--l-min", flags.l_min, "smallest lag scale");
    app.add_option("--l-max", flags.l_max, "largest lag scale");
    app.add_option("--sigma", flags.sigma, "dispersion of merchant-guided birth scales");
    app.add_option("--seed", flags.seed, "master seed for the simulation stream");
    app.add_option("--sample-every", flags.sample_every, "ticks between population samples");
    app.add_option("--t1", flags.t1, "tick at which prediction accuracy is evaluated");
    app.add_option("--fit-range", flags.fit_range, "lifetime CCDF fit window LO:HI");
    app.add_option("--deathrate-fit-range", flags.deathrate_fit_range,
                   "deaths-per-tick fit window LO:HI");
    app.add_option("--out", flags.out, "output directory (falls back to $SCALEPOP_OUT)");
    app.add_option("--sweep", sweep, "run once per value, e.g. h=1,100,1000");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend()); // CLI11 convention
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return {};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    RunSpec spec;
    const RawOptions file_opts = config_path ? read_config_file(*config_path) : RawOptions{};
    const std::optional<std::string> preset = flags.preset ? flags.preset : file_opts.preset;
    if (preset) apply_preset(spec, *preset);
    apply(spec, file_opts);
    apply(spec, flags);
    if (spec.out_dir.empty()) {
        if (const char* env = std::getenv("SCALEPOP_OUT")) spec.out_dir = env;
    }

    Invocation inv;
    if (sweep) {
        const std::size_t eq = sweep->find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 >= sweep->size())
            throw UsageError("--sweep must be KEY=V1,V2,...");
        const std::string key = sweep->substr(0, eq);
        for (const std::string& value : split(sweep->substr(eq + 1), ',')) {
            RunSpec r = spec;
            apply_sweep_value(r, key, value);
            r.label = key + "=" + value;
            if (!spec.out_dir.empty()) r.out_dir = (fs::path(spec.out_dir) / r.label).string();
            validate_spec(r);
            inv.runs.push_back(std::move(r));
        }
    } else {
        validate_spec(spec);
        inv.runs.push_back(std::move(spec));
    }
    return inv;
}

std::string RunSummary::line() const {
    std::string out;
    if (!label.empty()) out += "[" + label + "] ";
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "strategy=%s merchant=%s h=%lld ticks=%lld deaths=%lld survivors=%lld "
                  "pa=%.6f lifetime_index=%.4f deathrate_index=%.4f",
                  to_string(strategy).c_str(), to_string(merchant).c_str(),
                  static_cast<long long>(h), static_cast<long long>(ticks),
                  static_cast<long long>(deaths), static_cast<long long>(survivors), pa,
                  lifetime_index, deathrate_index);
    out += buf;
    out += " out=" + out_dir;
    return out;
}

RunSummary run(const RunSpec& spec) {
    validate_spec(spec);

    MidSeries series;
    if (spec.data_path) {
        LoadWarnings warnings;
        const auto quotes =
            load_ticks(*spec.data_path, ColumnLayout::from_spec(spec.columns), &warnings);
        if (warnings.rejected_rows > 0)
            std::cerr << "warning: dropped " << warnings.rejected_rows
                      << " rows with non-positive bid/ask from " << *spec.data_path << "\n";
        if (warnings.crossed_quotes > 0)
            std::cerr << "warning: kept " << warnings.crossed_quotes << " crossed quotes from "
                      << *spec.data_path << "\n";
        series = mid_price(quotes);
    } else {
        series = synth_series(spec.synthetic->length, spec.synthetic->model, spec.synthetic->step,
                              spec.synthetic->p0, spec.synthetic->seed);
    }

    Simulation sim(spec.sim, std::move(series));
    const RunResult result = sim.run();

    // Lifetime distribution: density plus CCDF, fitted on the CCDF.
    DistributionEstimate lifetimes = lifetime_hist(result.deaths, {}, spec.sim.n_tf);
    lifetimes.fit_lo = spec.lifetime_fit.lo;
    lifetimes.fit_hi = spec.lifetime_fit.hi;
    try {
        const FitResult fit = fit_effective_index(lifetimes.centers, lifetimes.ccdf,
                                                  spec.lifetime_fit.lo, spec.lifetime_fit.hi);
        lifetimes.effective_index = fit.slope;
        lifetimes.fit_residual = fit.rms_residual;
    } catch (const InsufficientDataError&) {
        // leave NaN: short runs legitimately have too few populated bins
    }

    const FitRange rate_range =
        spec.deathrate_fit.value_or(default_deathrate_fit(spec.sim.strategy));
    DistributionEstimate rates = deaths_per_tick_hist(result.deaths, result.ticks);
    rates.fit_lo = rate_range.lo;
    rates.fit_hi = rate_range.hi;
    try {
        const FitResult fit = fit_effective_index(rates, rate_range.lo, rate_range.hi);
        rates.effective_index = fit.slope;
        rates.fit_residual = fit.rms_residual;
    } catch (const InsufficientDataError&) {
    }

    // Prediction accuracy at the latest sample not beyond t1.
    SummaryStats summary;
    const TransientSample* at_t1 = nullptr;
    for (const TransientSample& s : result.samples) {
        if (spec.t1 && s.tick > *spec.t1) break;
        at_t1 = &s;
    }
    if (at_t1 && at_t1->tick >= 1) {
        summary.t1 = at_t1->tick;
        summary.mean_utility_t1 = at_t1->mean_utility;
        summary.pa = prediction_accuracy(at_t1->mean_utility, at_t1->tick);
    }

    summary.ticks = result.ticks;
    summary.deaths = result.counters.deaths;
    summary.survivors_never_died = result.survivors_never_died;
    summary.censored_incarnations = spec.sim.n_tf;
    summary.settled = result.counters.settled;
    summary.correct = result.counters.correct;
    summary.wrong = result.counters.wrong;
    summary.discarded = result.counters.discarded;
    summary.passive_decisions = result.counters.passive_decisions;
    summary.lifetime_index = lifetimes.effective_index;
    summary.lifetime_fit_lo = lifetimes.fit_lo;
    summary.lifetime_fit_hi = lifetimes.fit_hi;
    summary.lifetime_fit_residual = lifetimes.fit_residual;
    summary.deathrate_index = rates.effective_index;
    summary.deathrate_fit_lo = rates.fit_lo;
    summary.deathrate_fit_hi = rates.fit_hi;
    summary.deathrate_fit_residual = rates.fit_residual;

    // Emit everything; a failure removes whatever this run already wrote.
    std::error_code ec;
    fs::create_directories(spec.out_dir, ec);
    std::vector<fs::path> written;
    const auto emit = [&written](const fs::path& p, auto&& writer) {
        writer(p.string());
        written.push_back(p);
    };
    const fs::path dir(spec.out_dir);
    try {
        emit(dir / "transient.csv",
             [&](const std::string& p) { write_transient_csv(p, result.samples); });
        emit(dir / "deaths.csv", [&](const std::string& p) { write_deaths_csv(p, result.deaths); });
        emit(dir / "lifetime_dist.csv",
             [&](const std::string& p) { write_lifetime_dist_csv(p, lifetimes); });
        emit(dir / "deathrate_dist.csv",
             [&](const std::string& p) { write_deathrate_dist_csv(p, rates); });
        emit(dir / "summary.csv", [&](const std::string& p) { write_summary_csv(p, summary); });
        emit(dir / "resolved_config", [&](const std::string& p) {
            std::ofstream out(p, std::ios::binary);
            if (!out) throw IoError("cannot write " + p);
            out << resolved_config_json(spec).dump(2) << "\n";
            out.flush();
            if (!out) throw IoError("write failure on " + p);
        });
    } catch (...) {
        for (const fs::path& p : written) fs::remove(p, ec);
        throw;
    }

    RunSummary s;
    s.label = spec.label;
    s.strategy = spec.sim.strategy;
    s.merchant = spec.sim.merchant_mode;
    s.h = spec.sim.h;
    s.ticks = result.ticks;
    s.deaths = result.counters.deaths;
    s.survivors = result.survivors_never_died;
    s.pa = summary.pa;
    s.lifetime_index = summary.lifetime_index;
    s.deathrate_index = summary.deathrate_index;
    s.out_dir = spec.out_dir;
    return s;
}

int main_entry(int argc, char** argv) {
    Invocation inv;
    try {
        inv = parse_config(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (inv.runs.empty()) return 0;

    bool all_ok = true;
    if (inv.runs.size() == 1) {
        try {
            std::cout << run(inv.runs.front()).line() << "\n";
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            all_ok = false;
        }
    } else {
        // Sweep runs are independent: disjoint output directories, private
        // engines. Launch them all, then report in spec order.
        std::vector<std::future<RunSummary>> futures;
        futures.reserve(inv.runs.size());
        for (const RunSpec& spec : inv.runs)
            futures.push_back(std::async(std::launch::async, [&spec] { return run(spec); }));
        for (std::size_t i = 0; i < futures.size(); ++i) {
            try {
                std::cout << futures[i].get().line() << "\n";
            } catch (const std::exception& e) {
                std::cerr << "error in " << inv.runs[i].label << ": " << e.what() << "\n";
                all_ok = false;
            }
        }
    }
    return all_ok ? 0 : 1;
}

} // namespace scalepop::cli
