#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "nlab/config.hpp"
#include "nlab/misuse.hpp"
#include "nlab/mining.hpp"
#include "nlab/scenarios.hpp"

namespace fs = std::filesystem;
using namespace nlab;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_assertion = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownScenario : UsageError {
    explicit UnknownScenario(const std::string& name) : UsageError("unknown scenario '" + name + "'") {}
};

std::string utc_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::string& path, const std::string& what)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError(what + ": cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Json read_json(const std::string& path, const std::string& what)
{
    const auto text = read_file(path, what);
    try {
        return parse_strict(text);
    } catch (const std::exception& e) {
        throw UsageError(what + ": " + e.what());
    }
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + path);
    out << text;
}

struct Run {
    std::string command;
    std::vector<std::string> args;
    std::string config_path;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::string out;
    std::vector<std::string> outputs;
    std::string started_at = utc_now();

    Json manifest() const
    {
        return {{"command", command},
                {"args", args},
                {"config_path", config_path.empty() ? Json(nullptr) : Json(config_path)},
                {"seed", seed},
                {"tool_version", NLAB_TOOL_VERSION},
                {"outputs", outputs},
                {"timing", {{"started_at", started_at}, {"finished_at", utc_now()}}}};
    }

    void emit(Json report)
    {
        report["manifest"] = manifest();
        const auto text = report.dump(2) + "\n";
        if (out.empty())
            std::cout << text;
        else
            write_file(out, text);
        spdlog::info("{} finished", command);
    }
};

Json checks_json(const std::vector<Check>& checks)
{
    Json out = Json::array();
    for (const auto& c : checks)
        out.push_back({{"name", c.name}, {"expected", c.expected}, {"actual", c.actual}, {"ok", c.ok}});
    return out;
}

bool all_ok(const std::vector<Check>& checks)
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
}

Check check(std::string name, bool holds)
{
    return {std::move(name), "true", holds ? "true" : "false", holds};
}

template <class Fn>
void for_each_index(std::uint64_t n, unsigned jobs, Fn fn)
{
    const unsigned workers = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(std::min<std::uint64_t>(n, 1024))));
    if (workers == 1) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (auto i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
}

int mine_bench(Run& run, unsigned k, std::uint64_t runs, const std::string& strategy)
{
    const auto kind = strategy_from_string(strategy);
    const auto start = std::chrono::steady_clock::now();
    const auto stats = trial_statistics(k, runs, kind, run.seed, run.jobs);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    run.emit({{"k", stats.k},
              {"runs", stats.runs},
              {"strategy", std::string(to_string(stats.strategy))},
              {"seed", stats.seed},
              {"mean_trials", stats.mean},
              {"variance", stats.variance},
              {"trials_per_success", stats.trials_per_success},
              {"wall_seconds", wall.count()}});
    return exit_ok;
}

std::string trace_path(const std::string& out)
{
    fs::path p(out);
    p.replace_extension(".trace.jsonl");
    return p.string();
}

int simulate(Run& run, bool seed_given)
{
    SimJob job;
    try {
        job = parse_sim_config(read_json(run.config_path, "config"));
        if (seed_given) job.config.rng_seed = run.seed;
        validate_config(job.config);
    } catch (const ConfigInvalid& e) {
        throw UsageError("config field " + std::string(e.what()));
    }
    run.seed = job.config.rng_seed;
    const auto trace_out = run.out.empty() ? std::string() : trace_path(run.out);
    if (!trace_out.empty()) run.outputs.push_back(trace_out);

    Json report;
    std::vector<Check> checks;
    SimReport first;
    if (job.races == 0) {
        first = run_simulation(job.config);
        report = report_json(first);
        checks.push_back(check("conserved", first.conserved));
        checks.push_back(check("within event limit", !first.hit_event_limit));
    } else {
        std::vector<SimReport> races(job.races);
        const CounterRng seeds(job.config.rng_seed);
        for_each_index(job.races, run.jobs, [&](std::uint64_t i) {
            auto c = job.config;
            c.rng_seed = seeds.at(i);
            races[i] = run_simulation(c);
        });
        std::uint64_t successes = 0;
        bool conserved = true;
        Json outcomes = Json::array();
        for (const auto& r : races) {
            const bool success = std::any_of(r.attacks.begin(), r.attacks.end(), [](const AttackOutcome& a) { return a.success; });
            successes += success;
            conserved = conserved && r.conserved;
            outcomes.push_back({{"seed", r.seed}, {"success", success}, {"converged", r.converged},
                                {"final_height", r.final_state.height()}});
        }
        report = {{"races", job.races},
                  {"successes", successes},
                  {"success_frequency", static_cast<double>(successes) / static_cast<double>(job.races)},
                  {"outcomes", outcomes},
                  {"first_race", report_json(races.front())}};
        checks.push_back(check("conserved in every race", conserved));
        first = std::move(races.front());
    }
    report["checks"] = checks_json(checks);
    report["ok"] = all_ok(checks);
    if (!trace_out.empty()) write_file(trace_out, trace_jsonl(first));
    run.emit(report);
    return all_ok(checks) ? exit_ok : exit_assertion;
}

struct ScenarioParams {
    std::string q = "10", r = "9", g = "5";
    double alpha = 0.4;
    std::uint64_t confirmations = 6;
    std::uint64_t races = 100;
    std::uint64_t erase_depth = 2;
    std::string mode;
};

Amount amount_arg(const std::string& name, const std::string& value)
{
    try {
        return Json(value).get<Amount>();
    } catch (const std::exception&) {
        throw UsageError("--" + name + ": expected a non-negative integer, got '" + value + "'");
    }
}

int scenario(Run& run, const std::string& name, const ScenarioParams& p)
{
    Json report;
    std::vector<Check> checks;
    if (name == "oabd") {
        const auto q = amount_arg("q", p.q), r = amount_arg("r", p.r), g = amount_arg("g", p.g);
        if (r > q) throw UsageError("--r: must not exceed --q");
        const auto o = run_oabd_scenario(q, r, g);
        checks = o.checks;
        checks.push_back(check("conserved", o.sim.conserved));
        report = {{"scenario", name},
                  {"q", o.q},
                  {"r", o.r},
                  {"g", o.g},
                  {"miner_fee_income", o.miner_fee_income},
                  {"source_final", o.source_final},
                  {"destination_final", o.destination_final},
                  {"sim", report_json(o.sim)}};
    } else if (name == "double_spend") {
        if (!(p.alpha > 0 && p.alpha < 1)) throw UsageError("--alpha: must lie strictly between 0 and 1");
        const auto s = run_double_spend(p.alpha, p.confirmations, p.races, run.seed, run.jobs);
        checks.push_back(check("conserved in every race", s.conserved));
        checks.push_back(check("successes <= published", s.successes <= s.published));
        checks.push_back(check("published + abandoned <= triggered", s.published + s.abandoned <= s.triggered));
        report = {{"scenario", name},
                  {"alpha", s.alpha},
                  {"confirmations", s.confirmations},
                  {"races", s.races},
                  {"triggered", s.triggered},
                  {"published", s.published},
                  {"abandoned", s.abandoned},
                  {"successes", s.successes},
                  {"success_frequency", s.success_frequency},
                  {"outcomes", s.outcomes}};
    } else if (name == "reverse_mining") {
        if (!(p.alpha > 0 && p.alpha < 1)) throw UsageError("--alpha: must lie strictly between 0 and 1");
        if (p.erase_depth == 0) throw UsageError("--erase-depth: must be at least 1");
        const auto rm = run_reverse_mining(p.erase_depth, p.alpha, run.seed);
        const auto sim = report_json(rm.sim);
        checks.push_back(check("conserved", rm.sim.conserved));
        checks.push_back(check("honest peers converged", rm.sim.converged));
        checks.push_back(check("success implies adoption", !rm.outcome.success || rm.outcome.adopted));
        report = {{"scenario", name},
                  {"erase_depth", rm.erase_depth},
                  {"alpha", rm.alpha},
                  {"outcome", sim["attacks"].at(0)},
                  {"sim", sim}};
    } else if (fs::is_regular_file(name)) {
        const auto j = read_json(name, "scenario");
        misuse::Scenario s;
        try {
            s = misuse::parse_scenario(j);
            if (!p.mode.empty()) s.mode = misuse::mode_from_string(p.mode);
        } catch (const std::exception& e) {
            throw UsageError("scenario " + name + ": " + e.what());
        }
        run.config_path = name;
        try {
            report = misuse::run_scenario(s);
        } catch (const std::exception& e) {
            throw UsageError("scenario " + name + ": " + e.what());
        }
        std::set<std::string> labels;
        for (const auto& l : report["labels"]) labels.insert(l["label"].get<std::string>());
        if (s.mode == misuse::MoneyMode::exim) checks.push_back(check("no theft label in EXIM mode", !labels.count("theft")));
        if (j.contains("expect")) {
            for (const auto& l : j["expect"].value("labels_include", Json::array()))
                checks.push_back(check("label " + l.get<std::string>() + " present", labels.count(l.get<std::string>()) > 0));
            for (const auto& l : j["expect"].value("labels_exclude", Json::array()))
                checks.push_back(check("label " + l.get<std::string>() + " absent", !labels.count(l.get<std::string>())));
        }
        report["scenario"] = fs::path(name).filename().string();
    } else {
        throw UnknownScenario(name);
    }
    report["checks"] = checks_json(checks);
    report["ok"] = all_ok(checks);
    run.emit(report);
    for (const auto& c : checks)
        if (!c.ok) spdlog::error("check failed: {} (expected {}, got {})", c.name, c.expected, c.actual);
    return all_ok(checks) ? exit_ok : exit_assertion;
}

int ledger_replay(Run& run, const std::string& genesis_path, const std::string& transfers_path)
{
    Allocation genesis;
    std::vector<TransferInstruction> transfers;
    try {
        genesis = parse_allocation(read_json(genesis_path, "genesis"));
        transfers = parse_transfers(read_json(transfers_path, "transfers"));
    } catch (const ConfigInvalid& e) {
        throw UsageError(std::string("field ") + e.what());
    }
    run.config_path = genesis_path;
    LedgerState state;
    try {
        state = LedgerState::genesis(genesis, Address{});
    } catch (const LedgerError& e) {
        throw UsageError(std::string("genesis: ") + e.what());
    }
    for (std::size_t i = 0; i < transfers.size(); ++i) {
        try {
            state.submit_transfer(transfers[i]);
        } catch (const LedgerError& e) {
            spdlog::error("transfer {} rejected: {}", i, e.what());
            run.emit({{"error", {{"index", i}, {"code", std::string(to_string(e.code()))}, {"message", e.what()}}}});
            return exit_assertion;
        }
    }
    Json report = state;
    report["transfers_applied"] = transfers.size();
    run.emit(report);
    return state.conserved() ? exit_ok : exit_assertion;
}

void configure_logging()
{
    auto logger = spdlog::stderr_color_mt("nlab");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::level::level_enum level = spdlog::level::info;
    if (const char* env = std::getenv("NAKAMOTO_LAB_LOG")) {
        const std::string v(env);
        if (v == "error")
            level = spdlog::level::err;
        else if (v == "info")
            level = spdlog::level::info;
        else if (v == "debug")
            level = spdlog::level::debug;
        else
            spdlog::warn("NAKAMOTO_LAB_LOG={} not one of error, info, debug; using info", v);
    }
    spdlog::set_level(level);
}

} // namespace

int main(int argc, char** argv)
{
    configure_logging();

    CLI::App app{"Deterministic simulator for abstract informational money", "nakamoto-lab"};
    app.set_version_flag("--version", NLAB_TOOL_VERSION);
    app.require_subcommand(1);

    Run run;
    for (int i = 1; i < argc; ++i) run.args.emplace_back(argv[i]);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", run.seed, "Seed for every random choice")->capture_default_str();
        sub->add_option("--jobs", run.jobs, "Worker threads for independent runs")->check(CLI::Range(1U, 256U));
        sub->add_option("--out", run.out, "Report path (default: stdout)");
    };

    auto* bench = app.add_subcommand("mine-bench", "Trials-to-success statistics for the mining puzzle");
    unsigned k = 10;
    std::uint64_t runs = 200;
    std::string strategy = "sequential";
    bench->add_option("--k", k, "Leading zero bits")->check(CLI::Range(0U, 24U))->capture_default_str();
    bench->add_option("--runs", runs, "Puzzles to solve")->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_option("--strategy", strategy, "sequential, prime_stride or random")
        ->check(CLI::IsMember({"sequential", "prime_stride", "prime-stride", "random"}))
        ->capture_default_str();
    common(bench);

    auto* sim = app.add_subcommand("simulate", "Run a peer-to-peer simulation from a config file");
    sim->add_option("--config", run.config_path, "Simulation config (JSON)")->required();
    common(sim);

    auto* scen = app.add_subcommand("scenario", "Run a named scenario or a misuse scenario file");
    std::string scenario_name;
    ScenarioParams params;
    scen->add_option("name", scenario_name, "oabd, double_spend, reverse_mining or a misuse scenario file")->required();
    scen->add_option("--q", params.q, "OABD: initial balance of k")->capture_default_str();
    scen->add_option("--r", params.r, "OABD: amount sent to l")->capture_default_str();
    scen->add_option("--g", params.g, "OABD: donation to k")->capture_default_str();
    scen->add_option("--alpha", params.alpha, "Attacker hashpower share")->capture_default_str();
    scen->add_option("--confirmations", params.confirmations, "Double spend: confirmations the victim waits for")
        ->capture_default_str();
    scen->add_option("--races", params.races, "Double spend: independent races")->check(CLI::PositiveNumber)->capture_default_str();
    scen->add_option("--erase-depth", params.erase_depth, "Reverse mining: blocks to erase")->capture_default_str();
    scen->add_option("--mode", params.mode, "Misuse file: override the money mode")->check(CLI::IsMember({"exim", "non_exim"}));
    common(scen);

    auto* replay = app.add_subcommand("ledger-replay", "Replay transfers through the abstract ledger");
    std::string genesis_path, transfers_path;
    replay->add_option("--genesis", genesis_path, "Genesis allocation (JSON)")->required();
    replay->add_option("--transfers", transfers_path, "Transfers (JSON array)")->required();
    replay->add_option("--out", run.out, "Report path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }
    if (!run.out.empty()) run.outputs.push_back(run.out);

    try {
        if (bench->parsed()) {
            run.command = "mine-bench";
            return mine_bench(run, k, runs, strategy);
        }
        if (sim->parsed()) {
            run.command = "simulate";
            return simulate(run, sim->count("--seed") > 0);
        }
        if (scen->parsed()) {
            run.command = "scenario";
            return scenario(run, scenario_name, params);
        }
        run.command = "ledger-replay";
        return ledger_replay(run, genesis_path, transfers_path);
    } catch (const UsageError& e) {
        spdlog::error("{}", e.what());
        return exit_usage;
    } catch (const ConfigInvalid& e) {
        spdlog::error("field {}", e.what());
        return exit_usage;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return exit_usage;
    }
}
