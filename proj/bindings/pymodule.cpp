// Python bindings for the simulator core. The module exposes the same
// operations the CLI is built from: tick loading, synthetic series, the
// stepping engine, and the distribution/fit helpers.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scalepop/engine.hpp"
#include "scalepop/errors.hpp"
#include "scalepop/interaction.hpp"
#include "scalepop/rng.hpp"
#include "scalepop/stats.hpp"
#include "scalepop/tickdata.hpp"

namespace py = pybind11;
using namespace scalepop;

PYBIND11_MODULE(_scalepop, m) {
    m.doc() = "Tick-driven simulator of scale-diversified trend-follower populations";
    m.attr("__version__") = "0.1.0";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<EmptyInputError>(m, "EmptyInputError", PyExc_ValueError);
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::enum_<SynthModel>(m, "SynthModel")
        .value("coin_walk", SynthModel::coin_walk)
        .value("gaussian_walk", SynthModel::gaussian_walk);

    py::enum_<Strategy>(m, "Strategy")
        .value("independent", Strategy::independent)
        .value("bm", Strategy::bm)
        .value("rm", Strategy::rm)
        .value("bm_rm", Strategy::bm_rm);

    py::enum_<MerchantMode>(m, "MerchantMode")
        .value("argmax", MerchantMode::argmax)
        .value("weighted", MerchantMode::weighted);

    py::class_<TickQuote>(m, "TickQuote")
        .def(py::init<>())
        .def_readwrite("tick_index", &TickQuote::tick_index)
        .def_readwrite("bid", &TickQuote::bid)
        .def_readwrite("ask", &TickQuote::ask)
        .def("__repr__", [](const TickQuote& q) {
            return "TickQuote(tick_index=" + std::to_string(q.tick_index) +
                   ", bid=" + std::to_string(q.bid) + ", ask=" + std::to_string(q.ask) + ")";
        });

    py::class_<MidSeries>(m, "MidSeries")
        .def(py::init<>())
        .def(py::init([](std::vector<double> prices) {
                 MidSeries s;
                 s.prices = std::move(prices);
                 return s;
             }),
             py::arg("prices"))
        .def_readwrite("prices", &MidSeries::prices)
        .def("__len__", &MidSeries::size);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init([](std::int64_t n_tf, std::int64_t u_born, std::int64_t h,
                         std::int64_t l_min, std::int64_t l_max, Strategy strategy,
                         MerchantMode merchant_mode, double mutation_sigma, std::uint64_t seed,
                         std::int64_t sample_every) {
                 SimConfig c;
                 c.n_tf = n_tf;
                 c.u_born = u_born;
                 c.h = h;
                 c.l_min = l_min;
                 c.l_max = l_max;
                 c.strategy = strategy;
                 c.merchant_mode = merchant_mode;
                 c.mutation_sigma = mutation_sigma;
                 c.seed = seed;
                 c.sample_every = sample_every;
                 c.validate();
                 return c;
             }),
             py::arg("n_tf") = 1000, py::arg("u_born") = 10, py::arg("h") = 1,
             py::arg("l_min") = 1, py::arg("l_max") = 100000,
             py::arg("strategy") = Strategy::independent,
             py::arg("merchant_mode") = MerchantMode::argmax, py::arg("mutation_sigma") = 3000.0,
             py::arg("seed") = 1, py::arg("sample_every") = 1000)
        .def_readwrite("n_tf", &SimConfig::n_tf)
        .def_readwrite("u_born", &SimConfig::u_born)
        .def_readwrite("h", &SimConfig::h)
        .def_readwrite("l_min", &SimConfig::l_min)
        .def_readwrite("l_max", &SimConfig::l_max)
        .def_readwrite("strategy", &SimConfig::strategy)
        .def_readwrite("merchant_mode", &SimConfig::merchant_mode)
        .def_readwrite("mutation_sigma", &SimConfig::mutation_sigma)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("sample_every", &SimConfig::sample_every)
        .def("validate", &SimConfig::validate);

    py::class_<AgentState>(m, "AgentState")
        .def_readonly("id", &AgentState::id)
        .def_readonly("generation", &AgentState::generation)
        .def_readonly("scale", &AgentState::scale)
        .def_readonly("utility", &AgentState::utility)
        .def_readonly("birth_tick", &AgentState::birth_tick);

    py::class_<DeathEvent>(m, "DeathEvent")
        .def_readonly("tick", &DeathEvent::tick)
        .def_readonly("lifetime", &DeathEvent::lifetime)
        .def_readonly("scale", &DeathEvent::scale)
        .def_readonly("agent_id", &DeathEvent::agent_id)
        .def_readonly("generation", &DeathEvent::generation);

    py::class_<TransientSample>(m, "TransientSample")
        .def_readonly("tick", &TransientSample::tick)
        .def_readonly("mean_utility", &TransientSample::mean_utility)
        .def_readonly("mean_age", &TransientSample::mean_age)
        .def_readonly("deaths_so_far", &TransientSample::deaths_so_far)
        .def_readonly("passive_fraction", &TransientSample::passive_fraction);

    py::class_<RunCounters>(m, "RunCounters")
        .def_readonly("settled", &RunCounters::settled)
        .def_readonly("correct", &RunCounters::correct)
        .def_readonly("wrong", &RunCounters::wrong)
        .def_readonly("settled_delta_sum", &RunCounters::settled_delta_sum)
        .def_readonly("discarded", &RunCounters::discarded)
        .def_readonly("enqueued", &RunCounters::enqueued)
        .def_readonly("passive_decisions", &RunCounters::passive_decisions)
        .def_readonly("deaths", &RunCounters::deaths);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("deaths", &RunResult::deaths)
        .def_readonly("samples", &RunResult::samples)
        .def_readonly("counters", &RunResult::counters)
        .def_readonly("final_population", &RunResult::final_population)
        .def_readonly("ticks", &RunResult::ticks)
        .def_readonly("survivors_never_died", &RunResult::survivors_never_died);

    py::class_<MerchantState>(m, "MerchantState")
        .def(py::init<>())
        .def_readwrite("decision", &MerchantState::decision)
        .def_readwrite("source_agent", &MerchantState::source_agent)
        .def_readwrite("source_scale", &MerchantState::source_scale);

    py::class_<MerchantCandidate>(m, "MerchantCandidate")
        .def(py::init([](std::int32_t id, std::int64_t utility, std::int64_t scale, int decision,
                         std::int64_t age) {
                 return MerchantCandidate{id, utility, scale, decision, age};
             }),
             py::arg("id"), py::arg("utility"), py::arg("scale"), py::arg("decision"),
             py::arg("age") = 0)
        .def_readwrite("id", &MerchantCandidate::id)
        .def_readwrite("utility", &MerchantCandidate::utility)
        .def_readwrite("scale", &MerchantCandidate::scale)
        .def_readwrite("decision", &MerchantCandidate::decision)
        .def_readwrite("age", &MerchantCandidate::age);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("slope", &FitResult::slope)
        .def_readonly("intercept", &FitResult::intercept)
        .def_readonly("rms_residual", &FitResult::rms_residual)
        .def_readonly("points", &FitResult::points);

    py::class_<DistributionEstimate>(m, "DistributionEstimate")
        .def_readonly("bin_edges", &DistributionEstimate::bin_edges)
        .def_readonly("centers", &DistributionEstimate::centers)
        .def_readonly("counts", &DistributionEstimate::counts)
        .def_readonly("densities", &DistributionEstimate::densities)
        .def_readonly("ccdf", &DistributionEstimate::ccdf)
        .def_readonly("censored", &DistributionEstimate::censored)
        .def_readonly("fit_lo", &DistributionEstimate::fit_lo)
        .def_readonly("fit_hi", &DistributionEstimate::fit_hi)
        .def_readonly("effective_index", &DistributionEstimate::effective_index)
        .def_readonly("fit_residual", &DistributionEstimate::fit_residual);

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("word", &Rng::word)
        .def("coin", &Rng::coin)
        .def("uniform_int", &Rng::uniform_int, py::arg("lo"), py::arg("hi"))
        .def("unit", &Rng::unit)
        .def("gaussian", &Rng::gaussian, py::arg("mean"), py::arg("sigma"));

    py::class_<Simulation>(m, "Simulation")
        .def(py::init<const SimConfig&, MidSeries>(), py::arg("config"), py::arg("series"))
        .def("pin_merchant", &Simulation::pin_merchant, py::arg("decision"), py::arg("scale"))
        .def("step", &Simulation::step)
        .def("run", &Simulation::run, py::call_guard<py::gil_scoped_release>())
        .def_property_readonly("tick", &Simulation::tick)
        .def_property_readonly("total_ticks", &Simulation::total_ticks)
        .def_property_readonly("population",
                               [](const Simulation& s) {
                                   return std::vector<AgentState>(s.population().begin(),
                                                                  s.population().end());
                               })
        .def_property_readonly("merchant", &Simulation::merchant)
        .def_property_readonly("counters", &Simulation::counters)
        .def_property_readonly("deaths",
                               [](const Simulation& s) {
                                   return std::vector<DeathEvent>(s.deaths().begin(),
                                                                  s.deaths().end());
                               })
        .def_property_readonly("samples", [](const Simulation& s) {
            return std::vector<TransientSample>(s.samples().begin(), s.samples().end());
        });

    m.def(
        "load_ticks",
        [](const std::string& path, const std::string& columns) {
            return load_ticks(path, ColumnLayout::from_spec(columns));
        },
        py::arg("path"), py::arg("columns") = "ts,bid,ask");
    m.def("mid_price", &mid_price, py::arg("quotes"));
    m.def("synth_series", &synth_series, py::arg("length"), py::arg("model"),
          py::arg("step") = 0.01, py::arg("p0") = 100.0, py::arg("seed") = 0);

    m.def("tf_decision", &tf_decision, py::arg("p_now"), py::arg("p_lagged"));
    m.def("discretize", &discretize, py::arg("p_at_t"), py::arg("p_at_t_plus_h"));
    m.def("settle", &settle, py::arg("utility"), py::arg("decision"), py::arg("dp"));
    m.def("rm_gate", &rm_gate, py::arg("preliminary"), py::arg("recommendation"));
    m.def(
        "merchant_decide",
        [](const std::vector<MerchantCandidate>& candidates, MerchantMode mode,
           const MerchantState& previous) { return merchant_decide(candidates, mode, previous); },
        py::arg("candidates"), py::arg("mode") = MerchantMode::argmax,
        py::arg("previous") = MerchantState{});
    m.def("spawn_uniform", &spawn_uniform, py::arg("rng"), py::arg("l_min"), py::arg("l_max"));
    m.def("bm_birth_scale", &bm_birth_scale, py::arg("rng"), py::arg("merchant_scale"),
          py::arg("sigma"), py::arg("l_min"), py::arg("l_max"));

    m.def(
        "run_simulation",
        [](const SimConfig& config, const MidSeries& series) {
            Simulation sim(config, series);
            return sim.run();
        },
        py::arg("config"), py::arg("series"), py::call_guard<py::gil_scoped_release>());

    m.def("prediction_accuracy", &prediction_accuracy, py::arg("mean_utility_at_t1"),
          py::arg("t1"));
    m.def(
        "fit_effective_index",
        [](const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
            return fit_effective_index(x, y, lo, hi);
        },
        py::arg("x"), py::arg("y"), py::arg("lo"), py::arg("hi"));
    m.def(
        "lifetime_hist",
        [](const std::vector<std::int64_t>& lifetimes, std::int64_t censored) {
            return lifetime_hist(lifetimes, {}, censored);
        },
        py::arg("lifetimes"), py::arg("censored") = 0);
    m.def(
        "deaths_per_tick_hist",
        [](const std::vector<DeathEvent>& deaths, std::int64_t total_ticks) {
            return deaths_per_tick_hist(deaths, total_ticks);
        },
        py::arg("deaths"), py::arg("total_ticks"));
    m.def(
        "empirical_ccdf",
        [](const std::vector<std::int64_t>& values, double x) {
            return empirical_ccdf(values, x);
        },
        py::arg("values"), py::arg("x"));
    m.def("log_bins", &log_bins, py::arg("lo"), py::arg("hi"), py::arg("bins_per_decade") = 10);
}
