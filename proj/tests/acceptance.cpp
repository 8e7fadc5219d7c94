// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <thread>

#include "cli_runner.hpp"
#include "misuse_oracle.hpp"
#include "nlab/mining.hpp"
#include "nlab/scenarios.hpp"

using namespace nlab;
using namespace nlab::cli_test;

namespace {

constexpr std::uint64_t suite_seed = 20260101;

struct Outcome {
    bool ok = false;
    std::string detail;
};

// Conservation observations gathered by the other criteria.
struct ConservationLog {
    std::uint64_t runs = 0;
    std::vector<std::string> failures;

    void record(const std::string& what, bool ok)
    {
        ++runs;
        if (!ok) failures.push_back(what);
    }
} conservation;

unsigned jobs()
{
    return std::max(1U, std::thread::hardware_concurrency());
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(double v, int digits = 1)
{
    std::ostringstream s;
    s.precision(digits);
    s << std::fixed << v;
    return s.str();
}

// Explicit sum over peer 0's final state, independent of the simulator's flag.
bool sums_balance(const SimReport& r, const SimConfig& c)
{
    Amount lhs, rhs;
    for (const auto& [_, v] : r.final_state.balances()) lhs += v;
    for (const auto& [_, v] : r.final_state.fee_accruals()) lhs += v;
    for (const auto& [_, v] : c.genesis) rhs += v;
    for (std::uint64_t h = 0; h < r.final_state.height(); ++h) rhs += c.block_subsidy;
    return lhs == rhs && r.conserved;
}

Outcome mining_hardness()
{
    const auto start = std::chrono::steady_clock::now();
    const auto k10 = trial_statistics(10, 200, StrategyKind::sequential, suite_seed, 1);
    const auto k8 = trial_statistics(8, 200, StrategyKind::sequential, suite_seed, 1);
    const double wall = seconds_since(start);
    const bool ok = k10.mean >= 819 && k10.mean <= 1280 && k8.mean >= 192 && k8.mean <= 320 && wall < 60;
    return {ok, "k=10 mean " + fixed(k10.mean) + " in [819, 1280], k=8 mean " + fixed(k8.mean) +
                    " in [192, 320], " + fixed(wall, 2) + " s < 60 s"};
}

Outcome strategy_equivalence()
{
    std::vector<std::pair<std::string, double>> means;
    for (auto kind : {StrategyKind::sequential, StrategyKind::prime_stride, StrategyKind::random})
        means.emplace_back(std::string(to_string(kind)), trial_statistics(10, 200, kind, suite_seed + 1, 1).mean);
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < means.size(); ++i) {
        detail += (i ? ", " : "") + means[i].first + " " + fixed(means[i].second);
        for (std::size_t j = i + 1; j < means.size(); ++j) {
            const double lo = std::min(means[i].second, means[j].second);
            const double hi = std::max(means[i].second, means[j].second);
            ok = ok && hi - lo <= 0.25 * lo;
        }
    }
    return {ok, detail + "; pairwise spread <= 25% of the smaller mean"};
}

Outcome oabd_exactness()
{
    const std::vector<std::string> args{"scenario", "oabd", "--q", "10", "--r", "9", "--g", "5"};
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    if (a.code != 0 || b.code != 0) return {false, "exit codes " + std::to_string(a.code) + ", " + std::to_string(b.code)};
    const auto r = Json::parse(a.out);
    conservation.record("oabd", r["sim"]["conserved"] == true);
    const bool same = report_body(r).dump() == report_body(Json::parse(b.out)).dump();
    const bool ok = r["miner_fee_income"] == "6" && r["destination_final"] == "9" && r["source_final"] == "0" && same;
    return {ok, "miner fee income " + r["miner_fee_income"].get<std::string>() + ", destination " +
                    r["destination_final"].get<std::string>() + ", source " + r["source_final"].get<std::string>() +
                    (same ? ", rerun identical" : ", rerun differs")};
}

Outcome oracle_equivalence_runs()
{
    const auto accounts = scenario_accounts(8);
    const auto genesis = equal_allocation(accounts, Amount{1000});
    std::size_t equal = 0;
    std::string first_mismatch;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto stream = random_transfer_stream(accounts, genesis, 500, seed);
        const auto r = oracle_equivalence(genesis, stream, seed);
        conservation.record("oracle equivalence seed " + std::to_string(seed), r.conserved);
        if (r.equal && r.accepted_oracle == 500)
            ++equal;
        else if (first_mismatch.empty())
            first_mismatch = "; seed " + std::to_string(seed) + ": " + r.mismatch + " accepted " +
                             std::to_string(r.accepted_oracle) + "/500";
    }
    return {equal == 20, std::to_string(equal) + "/20 seeds x 500 transfers identical to the ledger replay" + first_mismatch};
}

Outcome fork_convergence()
{
    const auto accounts = scenario_accounts(6);
    std::size_t disagreements = 0;
    std::uint64_t forks = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SimConfig c;
        const std::size_t peers = 2 + seed % 4;
        for (std::size_t i = 0; i < peers; ++i)
            c.peers.push_back({"miner-" + std::to_string(i), Behavior::honest, 1.0 / static_cast<double>(peers), {}});
        c.latency = {100, 3000};
        c.rng_seed = seed;
        c.horizon_ms = 300'000;
        c.genesis = equal_allocation(accounts, Amount{500});
        const auto stream = random_transfer_stream(accounts, c.genesis, 40, seed);
        for (std::size_t i = 0; i < stream.size(); ++i)
            c.transfers.push_back({static_cast<std::int64_t>(5000 * i), stream[i], i % peers});
        const auto r = run_simulation(c);
        conservation.record("convergence seed " + std::to_string(seed), sums_balance(r, c));
        forks += r.fork_heights;
        bool agree = r.converged && !r.hit_event_limit;
        for (const auto& p : r.peers) agree = agree && p.chain == r.peers.front().chain;
        disagreements += !agree;
    }
    return {disagreements == 0, std::to_string(disagreements) + " disagreements over 20 runs with 2-5 peers, latency 100-3000 ms (" +
                                    std::to_string(forks) + " fork heights seen)"};
}

Outcome double_spend_monotonicity()
{
    const auto start = std::chrono::steady_clock::now();
    const auto strong = run_double_spend(0.4, 6, 100, suite_seed, jobs());
    const auto weak = run_double_spend(0.1, 6, 100, suite_seed, jobs());
    const double wall = seconds_since(start);
    conservation.record("double spend alpha 0.4", strong.conserved);
    conservation.record("double spend alpha 0.1", weak.conserved);
    const bool ok = strong.success_frequency > weak.success_frequency && weak.success_frequency < 0.10 && wall < 120;
    return {ok, "f(0.4) = " + fixed(strong.success_frequency, 2) + " > f(0.1) = " + fixed(weak.success_frequency, 2) +
                    ", f(0.1) < 0.10, " + fixed(wall, 2) + " s < 120 s"};
}

Outcome misuse_oracle()
{
    const auto r = misuse_check::run_exhaustive_check(4);
    const bool ok = r.ok() && r.mismatches == 0 && r.exim_theft == 0;
    std::string detail = std::to_string(r.sequences) + " sequences (" + std::to_string(r.accepted) + " admitted), " +
                         std::to_string(r.mismatches) + " mismatches, " + std::to_string(r.exim_theft) +
                         " EXIM theft labels";
    if (!r.first_mismatch.empty()) detail += "; " + r.first_mismatch;
    return {ok, detail};
}

Outcome conservation_law()
{
    // A direct ledger fuzz on top of the runs above.
    const auto accounts = scenario_accounts(8);
    const auto genesis = equal_allocation(accounts, Amount{1000});
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto state = LedgerState::genesis(genesis, Address{});
        for (const auto& t : random_transfer_stream(accounts, genesis, 500, seed, 0.2)) {
            try {
                state.submit_transfer(t);
            } catch (const LedgerError&) {
            }
            state.advance_height();
            if (state.height() % 50 == 0) state.credit_subsidy(accounts[seed % 8].address, Amount{50});
        }
        Amount lhs, rhs{8000};
        for (const auto& [_, v] : state.balances()) lhs += v;
        for (const auto& [_, v] : state.fee_accruals()) lhs += v;
        for (std::uint64_t h = 50; h <= state.height(); h += 50) rhs += Amount{50};
        conservation.record("ledger fuzz seed " + std::to_string(seed), lhs == rhs && state.conserved());
    }
    const bool ok = conservation.failures.empty() && conservation.runs > 0;
    return {ok, std::to_string(conservation.runs) + " runs checked, " + std::to_string(conservation.failures.size()) +
                    " violations" + (ok ? "" : " (first: " + conservation.failures.front() + ")")};
}

Outcome blocking_semantics()
{
    const auto k = account_keys("blocked-indefinitely");
    const auto t = account_keys("blocked-until-5");
    const auto payer = account_keys("payer");
    const auto other = account_keys("other-payer");
    auto state = LedgerState::genesis({{k.address, Amount{10}}, {t.address, Amount{10}}, {payer.address, Amount{10'000}},
                                       {other.address, Amount{10'000}}},
                                      Address{});
    const BlockRecord forever{BlockMode::indefinite, 0};
    const BlockRecord until5{BlockMode::temporary, 5};
    state.block_address(k.address, forever, sign(k, blocking_message(k.address, forever)), Amount{});
    state.block_address(t.address, until5, sign(t, blocking_message(t.address, until5)), Amount{});

    auto rejected = [&](const KeyPair& from, const Address& to) {
        const auto before = state;
        try {
            state.submit_transfer(make_transfer(from, Amount{1}, to));
        } catch (const LedgerError& e) {
            return e.code() == LedgerErrc::destination_blocked && state == before;
        }
        return false;
    };
    std::vector<std::string> wrong;
    auto fund = [&](const KeyPair& from) {
        // Full-residual fees empty the payer, so refill it from outside.
        state.credit_subsidy(from.address, Amount{10});
    };
    for (std::uint64_t h = 0; h < 12; ++h) {
        for (const auto* from : {&payer, &other}) {
            if (!rejected(*from, k.address)) wrong.push_back("indefinite accepted at height " + std::to_string(h));
            const bool temp_rejected = rejected(*from, t.address);
            if (h < 5 && !temp_rejected) wrong.push_back("temporary accepted at height " + std::to_string(h));
            if (h >= 5 && temp_rejected) wrong.push_back("temporary rejected at height " + std::to_string(h));
            if (h >= 5) fund(*from);
        }
        state.advance_height();
    }
    return {wrong.empty(), wrong.empty() ? "indefinite rejects at heights 0-11; temporary(expiry 5) rejects at 0-4, accepts at 5-11"
                                         : wrong.front()};
}

Outcome cli_determinism()
{
    const auto dir = scratch_dir("acceptance");
    const std::string configs = std::string(NLAB_SOURCE_DIR) + "/configs/";
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
        {"mine-bench", {"mine-bench", "--k", "8", "--runs", "50", "--strategy", "prime_stride", "--seed", "5"}},
        {"simulate", {"simulate", "--config", configs + "all-honest.json", "--seed", "5"}},
        {"simulate races", {"simulate", "--config", configs + "double-spend-0.4.json", "--jobs", std::to_string(jobs())}},
        {"scenario oabd", {"scenario", "oabd", "--q", "10", "--r", "9", "--g", "5"}},
        {"scenario double_spend", {"scenario", "double_spend", "--alpha", "0.3", "--races", "30", "--seed", "5"}},
        {"scenario reverse_mining", {"scenario", "reverse_mining", "--alpha", "0.45", "--erase-depth", "2", "--seed", "5"}},
        {"scenario misuse", {"scenario", configs + "pseudo-theft.json"}},
        {"ledger-replay", {"ledger-replay", "--genesis", configs + "genesis.json", "--transfers", configs + "transfers.json"}},
    };
    std::vector<std::string> differing;
    for (const auto& [name, base] : commands) {
        std::string bodies[2], traces[2];
        for (int i = 0; i < 2; ++i) {
            auto args = base;
            args.insert(args.end(), {"--out", dir + "/report.json"});
            const auto r = run_cli(args);
            if (r.code != 0) {
                differing.push_back(name + " exited " + std::to_string(r.code));
                break;
            }
            bodies[i] = report_body(Json::parse(slurp(dir + "/report.json"))).dump(2);
            if (base[0] == "simulate") traces[i] = slurp(dir + "/report.trace.jsonl");
        }
        if (bodies[0] != bodies[1] || traces[0] != traces[1]) differing.push_back(name);
    }
    std::filesystem::remove_all(dir);
    std::string detail = std::to_string(commands.size() - differing.size()) + "/" + std::to_string(commands.size()) +
                         " commands byte-identical on rerun (manifest.timing and wall_seconds excluded)";
    if (!differing.empty()) detail += "; differs: " + differing.front();
    return {differing.empty(), detail};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"mining hardness law", mining_hardness},
        {"strategy equivalence", strategy_equivalence},
        {"OABD exactness", oabd_exactness},
        {"oracle equivalence", oracle_equivalence_runs},
        {"fork convergence", fork_convergence},
        {"double-spend monotonicity", double_spend_monotonicity},
        {"misuse oracle", misuse_oracle},
        {"conservation", conservation_law},
        {"blocking semantics", blocking_semantics},
        {"CLI determinism", cli_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.ok;
        std::printf("%s %2zu %s: %s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
