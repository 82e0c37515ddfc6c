#include "scalepop/tickdata.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string_view>

#include "scalepop/errors.hpp"
#include "scalepop/rng.hpp"

namespace scalepop {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

void split_fields(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

bool parse_price(std::string_view token, double& out) {
    token = trim(token);
    if (token.empty()) return false;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

} // namespace

ColumnLayout ColumnLayout::from_spec(const std::string& spec) {
    std::vector<std::string_view> tokens;
    split_fields(spec, tokens);
    ColumnLayout layout;
    layout.bid_col = -1;
    layout.ask_col = -1;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string_view t = trim(tokens[i]);
        if (t == "bid") layout.bid_col = static_cast<int>(i);
        else if (t == "ask") layout.ask_col = static_cast<int>(i);
        // anything else (ts, volume, ...) is carried but ignored
    }
    if (layout.bid_col < 0 || layout.ask_col < 0)
        throw UsageError("column spec must name both bid and ask: \"" + spec + "\"");
    layout.min_cols = std::max(layout.bid_col, layout.ask_col) + 1;
    return layout;
}

std::vector<TickQuote> load_ticks(const std::string& path, const ColumnLayout& layout,
                                  LoadWarnings* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tick file: " + path);

    std::vector<TickQuote> quotes;
    LoadWarnings counted;
    std::vector<std::string_view> fields;
    std::string line;
    long line_no = 0;
    bool awaiting_first_content = true;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        split_fields(line, fields);

        double bid = 0.0;
        double ask = 0.0;
        const bool enough_cols = fields.size() >= static_cast<std::size_t>(layout.min_cols);
        const bool numeric = enough_cols && parse_price(fields[layout.bid_col], bid) &&
                             parse_price(fields[layout.ask_col], ask);
        if (!numeric) {
            if (awaiting_first_content) {
                // A non-numeric first row is the optional header.
                awaiting_first_content = false;
                continue;
            }
            throw ParseError("malformed tick row in " + path, line_no);
        }
        awaiting_first_content = false;

        if (bid <= 0.0 || ask <= 0.0) {
            ++counted.rejected_rows;
            continue;
        }
        if (ask < bid) ++counted.crossed_quotes;
        quotes.push_back({static_cast<std::int64_t>(quotes.size()), bid, ask});
    }
    if (in.bad()) throw IoError("read failure on tick file: " + path);
    if (quotes.empty()) throw EmptyInputError("no usable tick rows in " + path);

    if (warnings) {
        *warnings = counted;
    } else {
        if (counted.rejected_rows > 0)
            std::cerr << "warning: dropped " << counted.rejected_rows
                      << " rows with non-positive bid/ask from " << path << "\n";
        if (counted.crossed_quotes > 0)
            std::cerr << "warning: kept " << counted.crossed_quotes << " crossed quotes from "
                      << path << "\n";
    }
    return quotes;
}

MidSeries mid_price(const std::vector<TickQuote>& quotes) {
    if (quotes.empty()) throw EmptyInputError("mid_price: no quotes");
    MidSeries series;
    series.prices.reserve(quotes.size());
    for (const TickQuote& q : quotes) series.prices.push_back((q.ask + q.bid) / 2.0);
    return series;
}

std::string to_string(SynthModel model) {
    return model == SynthModel::coin_walk ? "coin" : "gaussian";
}

SynthModel parse_synth_model(const std::string& name) {
    if (name == "coin" || name == "iid-coin-walk") return SynthModel::coin_walk;
    if (name == "gauss" || name == "gaussian" || name == "gaussian-walk")
        return SynthModel::gaussian_walk;
    throw UsageError("unknown synthetic model: \"" + name + "\" (expected coin or gaussian)");
}

MidSeries synth_series(std::int64_t length, SynthModel model, double step, double p0,
                       std::uint64_t seed) {
    if (length < 1) throw EmptyInputError("synth_series: length must be >= 1");
    if (!(step > 0.0)) throw UsageError("synth_series: step must be positive");

    MidSeries series;
    series.prices.resize(static_cast<std::size_t>(length));
    Rng rng(seed);

    if (model == SynthModel::coin_walk) {
        // Track the integer position and materialize prices in a second
        // pass, so an anti-zero shift changes the base only and every
        // comparison between prices stays a comparison between integers.
        std::int64_t position = 0;
        std::int64_t lowest = 0;
        series.prices[0] = 0.0;
        for (std::int64_t t = 1; t < length; ++t) {
            position += rng.coin() ? 1 : -1;
            lowest = std::min(lowest, position);
            series.prices[t] = static_cast<double>(position);
        }
        double base = p0;
        if (base + static_cast<double>(lowest) * step <= 0.0)
            base = step - static_cast<double>(lowest) * step;
        for (double& p : series.prices) p = base + p * step;
    } else {
        double level = p0;
        double lowest = p0;
        series.prices[0] = p0;
        for (std::int64_t t = 1; t < length; ++t) {
            level += rng.gaussian(0.0, step);
            lowest = std::min(lowest, level);
            series.prices[t] = level;
        }
        if (lowest <= 0.0)
            for (double& p : series.prices) p += step - lowest;
    }
    return series;
}

} // namespace scalepop
