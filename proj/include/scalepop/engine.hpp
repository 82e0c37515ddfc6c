#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scalepop/interaction.hpp"
#include "scalepop/rng.hpp"
#include "scalepop/stats.hpp"
#include "scalepop/tickdata.hpp"

namespace scalepop {

// independent: no coupling between agents.
// bm:    respawn scales are drawn around the merchant's occupied scale.
// rm:    decisions are kept only when they match the merchant's.
// bm_rm: both couplings at once.
enum class Strategy { independent, bm, rm, bm_rm };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name); // throws UsageError

struct SimConfig {
    std::int64_t n_tf = 1000;
    std::int64_t u_born = 10;
    std::int64_t h = 1;       // prediction horizon, in ticks
    std::int64_t l_min = 1;   // smallest lag scale
    std::int64_t l_max = 100000;
    Strategy strategy = Strategy::independent;
    MerchantMode merchant_mode = MerchantMode::argmax;
    double mutation_sigma = 3000.0; // dispersion of merchant-guided birth scales
    std::uint64_t seed = 1;
    std::int64_t sample_every = 1000;

    bool uses_merchant() const { return strategy != Strategy::independent; }
    bool gates_decisions() const { return strategy == Strategy::rm || strategy == Strategy::bm_rm; }
    bool gaussian_births() const { return strategy == Strategy::bm || strategy == Strategy::bm_rm; }

    void validate() const; // throws UsageError
};

// Buy when the price rose over the agent's own lag, sell otherwise
// (equality counts as a fall).
inline int tf_decision(double p_now, double p_lagged) { return p_now > p_lagged ? +1 : -1; }

// Direction the market actually took over the horizon (equality counts as
// a rise). The two tie conventions are deliberately opposite so a flat
// stretch is not free profit.
inline int discretize(double p_at_t, double p_at_t_plus_h) {
    return p_at_t <= p_at_t_plus_h ? +1 : -1;
}

// Utility update for one settled prediction: +1 when the decision matched
// the realized direction, -1 otherwise.
inline std::int64_t settle(std::int64_t utility, int decision, int dp) {
    return utility + decision * dp;
}

inline std::int64_t spawn_uniform(Rng& rng, std::int64_t l_min, std::int64_t l_max) {
    return rng.uniform_int(l_min, l_max);
}

struct AgentState {
    std::int32_t id = 0;
    std::int32_t generation = 0; // how many predecessors this slot has buried
    std::int64_t scale = 0;      // lag l, fixed for the incarnation's life
    std::int64_t utility = 0;
    std::int64_t birth_tick = 0;
};

// A decision waiting for its horizon: issued at issued_tick, judged against
// the price at due_tick = issued_tick + h.
struct PendingSettlement {
    std::int32_t agent_id = 0;
    std::int32_t generation = 0;
    std::int8_t decision = 0; // {-1, +1}; passive decisions are never enqueued
    std::int64_t issued_tick = 0;
    std::int64_t due_tick = 0;
};

// Pure respawn bookkeeping: emits the death record and the successor that
// reuses the slot (same id, next generation, fresh utility, born at the
// death tick). The dead agent must actually be dead (utility exactly 0).
std::pair<DeathEvent, AgentState> kill_and_respawn(const AgentState& dead,
                                                   std::int64_t death_tick,
                                                   std::int64_t birth_scale, std::int64_t u_born);

struct RunCounters {
    std::int64_t settled = 0;
    std::int64_t correct = 0;
    std::int64_t wrong = 0;
    std::int64_t settled_delta_sum = 0; // always correct - wrong
    std::int64_t discarded = 0;         // stale settlements of dead incarnations
    std::int64_t enqueued = 0;
    std::int64_t passive_decisions = 0; // gated to 0, never enqueued
    std::int64_t deaths = 0;
};

struct RunResult {
    std::vector<DeathEvent> deaths;
    std::vector<TransientSample> samples;
    RunCounters counters;
    std::vector<AgentState> final_population; // right-censored incarnations
    std::int64_t ticks = 0;
    std::int64_t survivors_never_died = 0; // agents still on generation 0 at the end
};

// Single-threaded tick-by-tick simulation over a fixed price series. One
// seeded stream drives every draw (initial scales, then one draw per
// respawn) in deterministic loop order, so identical (config, series)
// reproduce identical event streams. The simulation owns its copy of the
// series; pass a temporary to move it in.
class Simulation {
public:
    Simulation(const SimConfig& config, MidSeries series);

    // Diagnostic hook: freeze the merchant for the whole run.
    void pin_merchant(int decision, std::int64_t scale);

    // One tick, in fixed phase order:
    //   1. settle everything due now; deaths respawn in place, stale
    //      settlements of dead incarnations are discarded by generation tag
    //   2. preliminary decisions for agents whose lag fits the series
    //   3. merchant update (coupled strategies only), on settled utilities
    //   4. gate against the recommendation (rm variants only)
    //   5. enqueue surviving decisions whose horizon fits the series
    //   6. periodic population sample
    void step();

    // Steps to the end of the series and hands over the collected results.
    // Call once per Simulation.
    RunResult run();

    std::int64_t tick() const { return tick_; }
    std::int64_t total_ticks() const { return total_ticks_; }
    std::span<const AgentState> population() const { return population_; }
    const MerchantState& merchant() const { return merchant_; }
    const RunCounters& counters() const { return counters_; }
    std::span<const DeathEvent> deaths() const { return deaths_; }
    std::span<const TransientSample> samples() const { return samples_; }

private:
    std::int64_t respawn_scale();

    SimConfig cfg_;
    std::vector<double> prices_;
    std::int64_t total_ticks_ = 0;
    Rng rng_;
    std::vector<AgentState> population_;
    std::vector<std::vector<PendingSettlement>> buckets_; // ring keyed by due_tick % (h+1)
    std::vector<std::int8_t> preliminary_;                // per-agent decision, 0 = abstained
    std::vector<MerchantCandidate> candidates_;
    MerchantState merchant_;
    bool merchant_pinned_ = false;
    std::vector<DeathEvent> deaths_;
    std::vector<TransientSample> samples_;
    RunCounters counters_;
    std::int64_t tick_ = 0;
    std::int64_t sum_utility_ = 0; // running population sums keep sampling O(1)
    std::int64_t sum_birth_ = 0;
};

} // namespace scalepop
