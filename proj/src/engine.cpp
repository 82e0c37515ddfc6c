#include "scalepop/engine.hpp"

#include <algorithm>
#include <stdexcept>

#include "scalepop/errors.hpp"

namespace scalepop {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::independent: return "independent";
        case Strategy::bm: return "bm";
        case Strategy::rm: return "rm";
        case Strategy::bm_rm: return "bm_rm";
    }
    return "independent";
}

Strategy parse_strategy(const std::string& name) {
    if (name == "independent") return Strategy::independent;
    if (name == "bm") return Strategy::bm;
    if (name == "rm") return Strategy::rm;
    if (name == "bm_rm") return Strategy::bm_rm;
    throw UsageError("unknown strategy: \"" + name +
                     "\" (expected independent, bm, rm or bm_rm)");
}

void SimConfig::validate() const {
    if (n_tf < 1) throw UsageError("n-tf must be >= 1");
    if (u_born < 1) throw UsageError("u-born must be >= 1");
    if (h < 1) throw UsageError("h must be >= 1");
    if (l_min < 1 || l_min > l_max)
        throw UsageError("scale bounds must satisfy 1 <= l-min <= l-max");
    if (!(mutation_sigma > 0.0)) throw UsageError("sigma must be positive");
    if (sample_every < 1) throw UsageError("sample-every must be >= 1");
}

std::pair<DeathEvent, AgentState> kill_and_respawn(const AgentState& dead,
                                                   std::int64_t death_tick,
                                                   std::int64_t birth_scale,
                                                   std::int64_t u_born) {
    if (dead.utility != 0)
        throw std::logic_error("kill_and_respawn: agent is still alive");
    DeathEvent event{death_tick, death_tick - dead.birth_tick, dead.scale, dead.id,
                     dead.generation};
    AgentState successor{dead.id, dead.generation + 1, birth_scale, u_born, death_tick};
    return {event, successor};
}

Simulation::Simulation(const SimConfig& config, MidSeries series)
    : cfg_(config), prices_(std::move(series.prices)), rng_(config.seed) {
    cfg_.validate();
    if (prices_.empty()) throw EmptyInputError("simulation needs a non-empty price series");
    total_ticks_ = static_cast<std::int64_t>(prices_.size());

    population_.reserve(static_cast<std::size_t>(cfg_.n_tf));
    for (std::int64_t i = 0; i < cfg_.n_tf; ++i)
        population_.push_back({static_cast<std::int32_t>(i), 0,
                               spawn_uniform(rng_, cfg_.l_min, cfg_.l_max), cfg_.u_born, 0});

    buckets_.resize(static_cast<std::size_t>(cfg_.h) + 1);
    preliminary_.resize(static_cast<std::size_t>(cfg_.n_tf));
    merchant_ = {0, -1, (cfg_.l_min + cfg_.l_max) / 2};
    sum_utility_ = cfg_.n_tf * cfg_.u_born;
    sum_birth_ = 0;
}

void Simulation::pin_merchant(int decision, std::int64_t scale) {
    merchant_ = {decision, -1, scale};
    merchant_pinned_ = true;
}

std::int64_t Simulation::respawn_scale() {
    if (cfg_.gaussian_births())
        return bm_birth_scale(rng_, merchant_.source_scale, cfg_.mutation_sigma, cfg_.l_min,
                              cfg_.l_max);
    return spawn_uniform(rng_, cfg_.l_min, cfg_.l_max);
}

void Simulation::step() {
    if (tick_ >= total_ticks_) throw std::logic_error("step() past the end of the series");
    const std::int64_t t = tick_;
    const std::size_t ring = static_cast<std::size_t>(cfg_.h) + 1;

    // 1) Settle everything due now, in issue order (ascending agent id,
    //    since all bets due now were issued the same tick). A settlement
    //    belonging to an earlier incarnation of the slot is dropped.
    auto& due_now = buckets_[static_cast<std::size_t>(t) % ring];
    for (const PendingSettlement& ps : due_now) {
        AgentState& agent = population_[static_cast<std::size_t>(ps.agent_id)];
        if (agent.generation != ps.generation) {
            ++counters_.discarded;
            continue;
        }
        const int dp = discretize(prices_[static_cast<std::size_t>(ps.issued_tick)],
                                  prices_[static_cast<std::size_t>(t)]);
        const std::int64_t before = agent.utility;
        agent.utility = settle(before, ps.decision, dp);
        const std::int64_t delta = agent.utility - before;
        sum_utility_ += delta;
        ++counters_.settled;
        counters_.settled_delta_sum += delta;
        if (delta > 0) ++counters_.correct;
        else ++counters_.wrong;

        if (agent.utility == 0) {
            auto [event, successor] = kill_and_respawn(agent, t, respawn_scale(), cfg_.u_born);
            deaths_.push_back(event);
            ++counters_.deaths;
            sum_utility_ += cfg_.u_born;
            sum_birth_ += t - agent.birth_tick;
            agent = successor;
        }
    }
    due_now.clear();

    // 2) Preliminary decisions. Agents whose lag would reach past the start
    //    of the series abstain entirely this tick.
    const bool with_merchant = cfg_.uses_merchant();
    const double p_now = prices_[static_cast<std::size_t>(t)];
    std::fill(preliminary_.begin(), preliminary_.end(), std::int8_t{0});
    if (with_merchant) candidates_.clear();
    for (std::int64_t i = 0; i < cfg_.n_tf; ++i) {
        const AgentState& agent = population_[static_cast<std::size_t>(i)];
        if (t < agent.scale) continue;
        const int s = tf_decision(p_now, prices_[static_cast<std::size_t>(t - agent.scale)]);
        preliminary_[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(s);
        if (with_merchant)
            candidates_.push_back(
                {agent.id, agent.utility, agent.scale, s, t - agent.birth_tick});
    }

    // 3) Merchant update, ranking on utilities as already settled this tick.
    if (with_merchant && !merchant_pinned_)
        merchant_ = merchant_decide(candidates_, cfg_.merchant_mode, merchant_);

    // 4) + 5) Gate against the recommendation, then enqueue whatever is
    //    still active and has room for its horizon before the data ends.
    const bool gated = cfg_.gates_decisions();
    const bool room = t + cfg_.h < total_ticks_;
    std::int64_t passive = 0;
    auto& due_later = buckets_[static_cast<std::size_t>(t + cfg_.h) % ring];
    for (std::int64_t i = 0; i < cfg_.n_tf; ++i) {
        int s = preliminary_[static_cast<std::size_t>(i)];
        if (s == 0) continue;
        if (gated) {
            s = rm_gate(s, merchant_.decision);
            if (s == 0) {
                ++passive;
                ++counters_.passive_decisions;
                continue;
            }
        }
        if (room) {
            due_later.push_back({static_cast<std::int32_t>(i),
                                 population_[static_cast<std::size_t>(i)].generation,
                                 static_cast<std::int8_t>(s), t, t + cfg_.h});
            ++counters_.enqueued;
        }
    }

    // 6) Periodic population sample.
    if (t % cfg_.sample_every == 0) {
        samples_.push_back({t, static_cast<double>(sum_utility_) / static_cast<double>(cfg_.n_tf),
                            static_cast<double>(cfg_.n_tf * t - sum_birth_) /
                                static_cast<double>(cfg_.n_tf),
                            counters_.deaths,
                            static_cast<double>(passive) / static_cast<double>(cfg_.n_tf)});
    }
    ++tick_;
}

RunResult Simulation::run() {
    while (tick_ < total_ticks_) step();
    RunResult result;
    result.deaths = std::move(deaths_);
    result.samples = std::move(samples_);
    result.counters = counters_;
    result.final_population = population_;
    result.ticks = total_ticks_;
    result.survivors_never_died =
        std::count_if(population_.begin(), population_.end(),
                      [](const AgentState& a) { return a.generation == 0; });
    return result;
}

} // namespace scalepop
