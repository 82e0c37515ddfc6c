#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "scalepop/engine.hpp"
#include "scalepop/errors.hpp"

using namespace scalepop;

namespace {

MidSeries series_of(std::vector<double> prices) {
    MidSeries s;
    s.prices = std::move(prices);
    return s;
}

SimConfig small_config() {
    SimConfig c;
    c.n_tf = 1;
    c.u_born = 10;
    c.h = 1;
    c.l_min = 1;
    c.l_max = 1;
    c.seed = 1;
    c.sample_every = 1;
    return c;
}

} // namespace

TEST_CASE("strategy names round-trip") {
    for (const Strategy s :
         {Strategy::independent, Strategy::bm, Strategy::rm, Strategy::bm_rm})
        CHECK(parse_strategy(to_string(s)) == s);
    CHECK_THROWS_AS(parse_strategy("telepathy"), UsageError);
}

TEST_CASE("decision, environment and settlement primitives") {
    // trend rule: buy strictly rising, sell otherwise (ties sell)
    CHECK(tf_decision(2.0, 1.0) == +1);
    CHECK(tf_decision(1.0, 2.0) == -1);
    CHECK(tf_decision(2.0, 2.0) == -1);
    // realized direction: ties count as a rise (opposite convention)
    CHECK(discretize(1.0, 2.0) == +1);
    CHECK(discretize(2.0, 2.0) == +1);
    CHECK(discretize(2.0, 1.0) == -1);
    // utility moves by the product
    CHECK(settle(10, +1, +1) == 11);
    CHECK(settle(10, +1, -1) == 9);
    CHECK(settle(10, -1, -1) == 11);
    CHECK(settle(10, -1, +1) == 9);
}

TEST_CASE("config validation rejects every bad domain") {
    SimConfig c = small_config();
    c.n_tf = 0;
    CHECK_THROWS_WITH_AS(c.validate(), "n-tf must be >= 1", UsageError);
    c = small_config();
    c.u_born = 0;
    CHECK_THROWS_WITH_AS(c.validate(), "u-born must be >= 1", UsageError);
    c = small_config();
    c.h = 0;
    CHECK_THROWS_WITH_AS(c.validate(), "h must be >= 1", UsageError);
    c = small_config();
    c.l_min = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = small_config();
    c.l_min = 5;
    c.l_max = 4;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = small_config();
    c.mutation_sigma = 0.0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = small_config();
    c.sample_every = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    CHECK_THROWS_AS(Simulation(small_config(), series_of({})), EmptyInputError);
}

TEST_CASE("kill_and_respawn emits the death record and the successor") {
    const AgentState dead{7, 3, 444, 0, 120};
    const auto [event, successor] = kill_and_respawn(dead, 150, 999, 10);
    CHECK(event.tick == 150);
    CHECK(event.lifetime == 30);
    CHECK(event.scale == 444);
    CHECK(event.agent_id == 7);
    CHECK(event.generation == 3);
    CHECK(successor.id == 7);
    CHECK(successor.generation == 4);
    CHECK(successor.scale == 999);
    CHECK(successor.utility == 10);
    CHECK(successor.birth_tick == 150);

    const AgentState alive{7, 3, 444, 2, 120};
    CHECK_THROWS_AS(kill_and_respawn(alive, 150, 999, 10), std::logic_error);
}

TEST_CASE("single agent on a rising series wins its one settled bet") {
    // l = 1, h = 1, prices 1,2,3: the only settleable decision is issued at
    // tick 1 (2 > 1 -> buy) and judged at tick 2 (2 <= 3 -> rise): +1.
    const MidSeries prices = series_of({1.0, 2.0, 3.0});
    Simulation sim(small_config(), prices);
    const RunResult r = sim.run();
    REQUIRE(r.final_population.size() == 1);
    CHECK(r.final_population[0].utility == 11);
    CHECK(r.counters.settled == 1);
    CHECK(r.counters.correct == 1);
    CHECK(r.counters.wrong == 0);
    CHECK(r.counters.enqueued == 1);
    CHECK(r.counters.deaths == 0);
    CHECK(r.survivors_never_died == 1);
    CHECK(r.ticks == 3);
}

TEST_CASE("stale settlements of dead incarnations are discarded by generation tag") {
    // Hand-traced series with l = 1, h = 3, u_born = 1:
    //   t=1 buy (due 4), t=2 sell (due 5), t=3 sell (due 6, tie counts as fall)
    //   t=4: the buy settles against a fall, utility 1 -> 0, the agent dies
    //        (lifetime 4) and its successor immediately sells (due 7)
    //   t=5,6: the dead incarnation's bets come due and must be discarded
    //   t=7: the successor's sell settles against a fall: utility 1 -> 2
    const MidSeries prices = series_of({10, 11, 10, 10, 9, 12, 8, 7});
    SimConfig c = small_config();
    c.u_born = 1;
    c.h = 3;
    Simulation sim(c, prices);
    const RunResult r = sim.run();

    REQUIRE(r.deaths.size() == 1);
    CHECK(r.deaths[0].tick == 4);
    CHECK(r.deaths[0].lifetime == 4);
    CHECK(r.deaths[0].generation == 0);
    CHECK(r.counters.discarded == 2);
    CHECK(r.counters.settled == 2);
    CHECK(r.counters.correct == 1);
    CHECK(r.counters.wrong == 1);
    REQUIRE(r.final_population.size() == 1);
    CHECK(r.final_population[0].generation == 1);
    CHECK(r.final_population[0].utility == 2);
    CHECK(r.final_population[0].birth_tick == 4);
    CHECK(r.survivors_never_died == 0);
}

TEST_CASE("several agents can die on the same settlement tick") {
    const MidSeries prices = series_of({10, 11, 10});
    SimConfig c = small_config();
    c.n_tf = 2;
    c.u_born = 1;
    Simulation sim(c, prices);
    const RunResult r = sim.run();
    REQUIRE(r.deaths.size() == 2);
    CHECK(r.deaths[0].tick == 2);
    CHECK(r.deaths[1].tick == 2);
    CHECK(r.deaths[0].lifetime == 2);
    CHECK(r.deaths[1].lifetime == 2);
    CHECK(r.deaths[0].agent_id != r.deaths[1].agent_id);
    CHECK(r.final_population[0].generation == 1);
    CHECK(r.final_population[1].generation == 1);
    CHECK(r.survivors_never_died == 0);
}

TEST_CASE("agents whose lag exceeds the series never act") {
    SimConfig c = small_config();
    c.n_tf = 5;
    c.l_min = 100000;
    c.l_max = 100000;
    const MidSeries prices = series_of(std::vector<double>(500, 10.0));
    Simulation sim(c, prices);
    const RunResult r = sim.run();
    CHECK(r.counters.enqueued == 0);
    CHECK(r.counters.settled == 0);
    CHECK(r.counters.deaths == 0);
    for (const AgentState& a : r.final_population) CHECK(a.utility == c.u_born);
    CHECK(r.survivors_never_died == 5);
}

TEST_CASE("identical scales force identical trajectories") {
    SimConfig c = small_config();
    c.n_tf = 2;
    c.l_min = 3;
    c.l_max = 3;
    c.u_born = 2;
    const MidSeries prices = series_of({5, 6, 4, 7, 3, 8, 9, 2, 6, 6, 7, 1, 5, 9});
    Simulation sim(c, prices);
    const RunResult r = sim.run();
    CHECK(r.final_population[0].utility == r.final_population[1].utility);
    CHECK(r.final_population[0].generation == r.final_population[1].generation);
    CHECK(r.final_population[0].birth_tick == r.final_population[1].birth_tick);
    // death events, if any, come in synchronized pairs
    CHECK(r.deaths.size() % 2 == 0);
    for (std::size_t i = 0; i + 1 < r.deaths.size(); i += 2)
        CHECK(r.deaths[i].tick == r.deaths[i + 1].tick);
}

TEST_CASE("population samples match the population state") {
    SimConfig c = small_config();
    c.n_tf = 7;
    c.l_min = 1;
    c.l_max = 4;
    c.u_born = 2;
    c.sample_every = 1;
    const MidSeries prices = series_of({9, 8, 10, 7, 11, 6, 12, 5, 13, 4, 14});
    Simulation sim(c, prices);
    const RunResult r = sim.run();
    REQUIRE(static_cast<std::int64_t>(r.samples.size()) == prices.size());
    // the final sample was taken at the last tick, after all settlements
    const TransientSample expect =
        sample_transient(r.final_population, prices.size() - 1,
                         static_cast<std::int64_t>(r.deaths.size()), 0.0);
    const TransientSample& got = r.samples.back();
    CHECK(got.tick == expect.tick);
    CHECK(got.mean_utility == doctest::Approx(expect.mean_utility));
    CHECK(got.mean_age == doctest::Approx(expect.mean_age));
    CHECK(got.deaths_so_far == expect.deaths_so_far);
    // samples land exactly on the sampling grid
    for (std::size_t i = 0; i < r.samples.size(); ++i)
        CHECK(r.samples[i].tick == static_cast<std::int64_t>(i) * c.sample_every);
}

TEST_CASE("conservation: settlements, utility mass and queue bookkeeping") {
    SimConfig c;
    c.n_tf = 50;
    c.u_born = 3;
    c.h = 7;
    c.l_min = 1;
    c.l_max = 40;
    c.seed = 77;
    c.sample_every = 500;
    const MidSeries prices = synth_series(20000, SynthModel::coin_walk, 0.01, 100.0, 4);
    Simulation sim(c, prices);
    const RunResult r = sim.run();

    CHECK(r.counters.settled == r.counters.correct + r.counters.wrong);
    CHECK(r.counters.settled_delta_sum == r.counters.correct - r.counters.wrong);
    CHECK(r.counters.deaths == static_cast<std::int64_t>(r.deaths.size()));

    // utility ledger: births minus burned-out incarnations plus net wins
    std::int64_t final_utility = 0;
    for (const AgentState& a : r.final_population) {
        final_utility += a.utility;
        CHECK(a.utility >= 1); // zero utility cannot survive a settlement phase
    }
    const std::int64_t expected = c.n_tf * c.u_born + r.counters.settled_delta_sum +
                                  r.counters.deaths * c.u_born;
    CHECK(final_utility == expected);

    // bets are only enqueued when their horizon fits the series, so every
    // one of them is settled or discarded by the end: nothing dangles
    CHECK(r.counters.enqueued == r.counters.settled + r.counters.discarded);

    // death records are time-ordered with sane fields
    std::map<std::int32_t, std::int32_t> next_generation;
    for (std::size_t i = 0; i < r.deaths.size(); ++i) {
        const DeathEvent& d = r.deaths[i];
        CHECK(d.lifetime >= 1);
        CHECK(d.scale >= c.l_min);
        CHECK(d.scale <= c.l_max);
        if (i > 0) CHECK(d.tick >= r.deaths[i - 1].tick);
        CHECK(d.generation == next_generation[d.agent_id]); // per slot: 0, 1, 2, ...
        next_generation[d.agent_id] = d.generation + 1;
    }

    // survivors_never_died matches the generation-zero census
    std::int64_t gen0 = 0;
    for (const AgentState& a : r.final_population)
        if (a.generation == 0) ++gen0;
    CHECK(r.survivors_never_died == gen0);
}

TEST_CASE("runs are reproducible and seeds matter") {
    SimConfig c;
    c.n_tf = 30;
    c.u_born = 2;
    c.h = 3;
    c.l_min = 1;
    c.l_max = 50;
    c.seed = 5;
    c.sample_every = 100;
    const MidSeries prices = synth_series(8000, SynthModel::coin_walk, 0.01, 100.0, 9);

    Simulation s1(c, prices);
    Simulation s2(c, prices);
    const RunResult a = s1.run();
    const RunResult b = s2.run();
    REQUIRE(a.deaths.size() == b.deaths.size());
    for (std::size_t i = 0; i < a.deaths.size(); ++i) {
        CHECK(a.deaths[i].tick == b.deaths[i].tick);
        CHECK(a.deaths[i].agent_id == b.deaths[i].agent_id);
        CHECK(a.deaths[i].scale == b.deaths[i].scale);
    }
    CHECK(a.counters.settled == b.counters.settled);
    CHECK(a.counters.enqueued == b.counters.enqueued);

    SimConfig c2 = c;
    c2.seed = 6;
    Simulation s3(c2, prices);
    const RunResult d = s3.run();
    // same series, different initial scales: the event stream differs
    bool differs = d.deaths.size() != a.deaths.size();
    if (!differs)
        for (std::size_t i = 0; i < a.deaths.size() && !differs; ++i)
            differs = a.deaths[i].scale != d.deaths[i].scale;
    CHECK(differs);
}

TEST_CASE("step() past the end of the series is a hard error") {
    Simulation sim(small_config(), series_of({1.0, 2.0}));
    sim.step();
    sim.step();
    CHECK_THROWS_AS(sim.step(), std::logic_error);
}

TEST_CASE("merchant starts mid-band and abstains while no one decides") {
    SimConfig c = small_config();
    c.n_tf = 3;
    c.strategy = Strategy::bm;
    c.l_min = 10;
    c.l_max = 30;
    Simulation sim(c, series_of({1, 2, 3, 4, 5}));
    sim.step(); // tick 0: every lag exceeds 0, so no candidates exist
    CHECK(sim.merchant().decision == 0);
    CHECK(sim.merchant().source_agent == -1);
    CHECK(sim.merchant().source_scale == 20); // floor((10 + 30) / 2)
}

TEST_CASE("a pinned opposing merchant freezes an approval-gated population") {
    // Strictly falling prices make every preliminary decision a sell; a
    // merchant pinned to buy vetoes them all, so nothing is ever enqueued,
    // nobody settles, nobody dies.
    std::vector<double> prices(2000);
    for (std::size_t i = 0; i < prices.size(); ++i)
        prices[i] = 5000.0 - static_cast<double>(i);
    SimConfig c;
    c.n_tf = 20;
    c.u_born = 10;
    c.h = 5;
    c.l_min = 1;
    c.l_max = 10;
    c.strategy = Strategy::rm;
    c.seed = 2;
    Simulation sim(c, series_of(std::move(prices)));
    sim.pin_merchant(+1, 5);
    const RunResult r = sim.run();
    CHECK(r.counters.enqueued == 0);
    CHECK(r.counters.settled == 0);
    CHECK(r.counters.deaths == 0);
    CHECK(r.counters.passive_decisions > 0);
    for (const AgentState& a : r.final_population) CHECK(a.utility == c.u_born);
}

TEST_CASE("an agreeing pinned merchant passes gated decisions through") {
    // Strictly falling prices and a merchant pinned to sell: gating changes
    // nothing relative to the independent run.
    std::vector<double> prices(1500);
    for (std::size_t i = 0; i < prices.size(); ++i)
        prices[i] = 5000.0 - static_cast<double>(i);
    SimConfig c;
    c.n_tf = 10;
    c.u_born = 4;
    c.h = 2;
    c.l_min = 1;
    c.l_max = 8;
    c.strategy = Strategy::rm;
    c.seed = 3;

    Simulation gated(c, series_of(std::vector<double>(prices)));
    gated.pin_merchant(-1, 5);
    const RunResult rg = gated.run();

    SimConfig ci = c;
    ci.strategy = Strategy::independent;
    Simulation indep(ci, series_of(std::vector<double>(prices)));
    const RunResult ri = indep.run();

    CHECK(rg.counters.enqueued == ri.counters.enqueued);
    CHECK(rg.counters.settled == ri.counters.settled);
    CHECK(rg.counters.passive_decisions == 0);
    REQUIRE(rg.final_population.size() == ri.final_population.size());
    for (std::size_t i = 0; i < rg.final_population.size(); ++i)
        CHECK(rg.final_population[i].utility == ri.final_population[i].utility);
}

TEST_CASE("merchant-guided respawns inherit the pinned merchant scale") {
    // On an alternating series every settled bet loses, so u_born = 1 agents
    // die on their first settlement; the series is longer than the largest
    // possible founder lag, so every founder acts and dies. With a
    // near-zero dispersion all successors adopt the merchant's scale
    // exactly.
    std::vector<double> prices;
    for (int i = 0; i < 100002; ++i) prices.push_back(i % 2 == 0 ? 10.0 : 11.0);
    SimConfig c;
    c.n_tf = 4;
    c.u_born = 1;
    c.h = 1;
    c.l_min = 1;
    c.l_max = 100000;
    c.strategy = Strategy::bm;
    c.mutation_sigma = 1e-9;
    c.seed = 8;
    Simulation sim(c, series_of(std::move(prices)));
    sim.pin_merchant(+1, 2);
    const RunResult r = sim.run();
    CHECK(r.counters.deaths >= 4); // every founder dies on its first settlement
    for (const AgentState& a : r.final_population) {
        CHECK(a.generation >= 1);
        CHECK(a.scale == 2);
    }
}

TEST_CASE("independent runs never consult the merchant") {
    SimConfig c;
    c.n_tf = 12;
    c.u_born = 2;
    c.h = 2;
    c.l_min = 1;
    c.l_max = 20;
    c.strategy = Strategy::independent;
    c.seed = 4;
    const MidSeries prices = synth_series(5000, SynthModel::coin_walk, 0.01, 100.0, 5);
    Simulation sim(c, prices);
    const RunResult r = sim.run();
    CHECK(sim.merchant().decision == 0);
    CHECK(sim.merchant().source_agent == -1);
    CHECK(r.counters.passive_decisions == 0);
    CHECK(r.counters.deaths > 0); // sanity: the walk actually kills agents
}

TEST_CASE("merchant-guided respawn scales spread around the merchant scale") {
    // With genuine dispersion the respawn scales are spread, not copied;
    // all of them stay inside the legal band but cluster near the pin.
    std::vector<double> prices;
    for (int i = 0; i < 100002; ++i) prices.push_back(i % 2 == 0 ? 10.0 : 11.0);
    SimConfig c;
    c.n_tf = 20;
    c.u_born = 1;
    c.h = 1;
    c.l_min = 1;
    c.l_max = 100000;
    c.strategy = Strategy::bm;
    c.mutation_sigma = 3000.0;
    c.seed = 12;
    Simulation sim(c, series_of(std::move(prices)));
    sim.pin_merchant(+1, 50000);
    const RunResult r = sim.run();
    REQUIRE(r.counters.deaths >= 20); // every founder acted and died
    std::int64_t lo = 1LL << 40, hi = 0;
    for (const AgentState& a : r.final_population) {
        CHECK(a.generation >= 1);
        lo = std::min(lo, a.scale);
        hi = std::max(hi, a.scale);
        CHECK(a.scale >= 1);
        CHECK(a.scale <= 100000);
    }
    CHECK(hi - lo > 100); // sigma = 3000 cannot collapse onto one value
    CHECK(lo > 10000);    // yet the spread is anchored near 50000, not uniform
    CHECK(hi < 90000);
}

TEST_CASE("a collapsed scale band makes guided and independent runs coincide") {
    // With l_min == l_max every draw, uniform or merchant-guided, clamps to
    // the same scale, so the two strategies must produce identical death
    // streams on the same series even though they consume different RNG
    // word counts per respawn.
    std::vector<double> prices;
    for (int i = 0; i < 12; ++i) prices.push_back(i % 2 == 0 ? 10.0 : 11.0);
    SimConfig c;
    c.n_tf = 6;
    c.u_born = 1;
    c.h = 1;
    c.l_min = 1;
    c.l_max = 1;
    c.seed = 31;

    Simulation indep(c, series_of(std::vector<double>(prices)));
    const RunResult ri = indep.run();

    SimConfig cb = c;
    cb.strategy = Strategy::bm;
    Simulation guided(cb, series_of(std::vector<double>(prices)));
    guided.pin_merchant(+1, 1); // merchant scale inside [l_min, l_max]
    const RunResult rb = guided.run();

    REQUIRE(ri.deaths.size() == rb.deaths.size());
    for (std::size_t i = 0; i < ri.deaths.size(); ++i) {
        CHECK(ri.deaths[i].tick == rb.deaths[i].tick);
        CHECK(ri.deaths[i].agent_id == rb.deaths[i].agent_id);
    }
}
