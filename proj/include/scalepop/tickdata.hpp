#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace scalepop {

struct TickQuote {
    std::int64_t tick_index = 0;
    double bid = 0.0;
    double ask = 0.0;
};

// The mid-price series the agents perceive. Treated as immutable once built.
struct MidSeries {
    std::vector<double> prices;

    std::int64_t size() const { return static_cast<std::int64_t>(prices.size()); }
};

// Which comma-separated fields hold bid and ask, built from an ordering
// spec such as "ts,bid,ask". Tokens other than bid/ask are ignored.
struct ColumnLayout {
    int bid_col = 1;
    int ask_col = 2;
    int min_cols = 3;

    static ColumnLayout from_spec(const std::string& spec); // throws UsageError
};

struct LoadWarnings {
    std::int64_t rejected_rows = 0;  // non-positive bid or ask, dropped
    std::int64_t crossed_quotes = 0; // ask < bid, kept
};

// Reads "timestamp,bid,ask"-style text, one record per line, strictly in
// file order. Timestamps are ignored. An optional header line is detected
// by a non-numeric bid field on the first line. Rows with non-positive
// bid/ask are dropped; crossed quotes are kept. Both are counted into
// *warnings when given, otherwise reported on stderr.
std::vector<TickQuote> load_ticks(const std::string& path, const ColumnLayout& layout = {},
                                  LoadWarnings* warnings = nullptr);

// (ask + bid) / 2 per quote, same length and order as the input.
MidSeries mid_price(const std::vector<TickQuote>& quotes);

enum class SynthModel { coin_walk, gaussian_walk };

std::string to_string(SynthModel model);
SynthModel parse_synth_model(const std::string& name); // throws UsageError

// Synthetic environments for calibration. The coin walk accumulates an
// integer +/-1 position so that price comparisons and ties are exact and
// the series is bit-identical across platforms for a given seed; the
// gaussian walk adds N(0, step^2) increments. A walk that would touch zero
// is shifted up as a whole, which changes no price comparison.
MidSeries synth_series(std::int64_t length, SynthModel model, double step, double p0,
                       std::uint64_t seed);

} // namespace scalepop
