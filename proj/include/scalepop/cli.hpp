#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scalepop/engine.hpp"
#include "scalepop/tickdata.hpp"

namespace scalepop::cli {

struct SyntheticSpec {
    SynthModel model = SynthModel::coin_walk;
    std::int64_t length = 0;
    double step = 0.01;
    double p0 = 100.0;
    std::uint64_t seed = 0;
};

struct FitRange {
    double lo = 0.0;
    double hi = 0.0;
};

// A fully resolved description of one run: data source, engine parameters,
// measurement windows, output location.
struct RunSpec {
    std::optional<std::string> data_path;
    std::string columns = "ts,bid,ask";
    std::optional<SyntheticSpec> synthetic;
    SimConfig sim;
    std::optional<std::int64_t> t1;            // PA evaluation tick; latest sample when unset
    FitRange lifetime_fit{100.0, 10000.0};     // CCDF fit window
    std::optional<FitRange> deathrate_fit;     // density fit window; per-strategy default
    std::string out_dir;
    std::string label; // "key=value" for sweep runs, otherwise empty
};

struct Invocation {
    std::vector<RunSpec> runs; // empty when --help was handled
};

// Resolves flags, optional JSON config file (--config), preset and defaults
// into concrete runs. Precedence: flags > config file > preset > defaults.
// --sweep KEY=V1,V2,... expands into one run per value in its own
// subdirectory. Output directory falls back to $SCALEPOP_OUT. Throws
// UsageError on anything malformed.
Invocation parse_config(const std::vector<std::string>& args);

FitRange default_deathrate_fit(Strategy s);

struct RunSummary {
    std::string label;
    Strategy strategy = Strategy::independent;
    MerchantMode merchant = MerchantMode::argmax;
    std::int64_t h = 0;
    std::int64_t ticks = 0;
    std::int64_t deaths = 0;
    std::int64_t survivors = 0;
    double pa = 0.0;
    double lifetime_index = 0.0;
    double deathrate_index = 0.0;
    std::string out_dir;

    std::string line() const;
};

// Executes one run end to end and writes transient.csv, deaths.csv,
// lifetime_dist.csv, deathrate_dist.csv, summary.csv and resolved_config
// into spec.out_dir. resolved_config re-fed through --config reproduces the
// run byte for byte. Partially written outputs are removed on failure.
RunSummary run(const RunSpec& spec);

// Full command-line behavior: 0 on success, 1 on run failure, 2 on usage
// errors. Sweep runs execute concurrently, one summary line each.
int main_entry(int argc, char** argv);

} // namespace scalepop::cli
