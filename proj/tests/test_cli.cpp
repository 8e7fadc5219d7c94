#include <doctest.h>

#include <filesystem>

#include "cli_runner.hpp"
#include "nlab/scenarios.hpp"

using namespace nlab;
using namespace nlab::cli_test;

namespace {

std::string config(const std::string& name)
{
    return std::string(NLAB_SOURCE_DIR) + "/configs/" + name;
}

Json run_json(const std::vector<std::string>& args, int expected_code = 0)
{
    const auto r = run_cli(args);
    REQUIRE_MESSAGE(r.code == expected_code, r.err);
    return Json::parse(r.out);
}

} // namespace

TEST_CASE("mine-bench")
{
    const auto zero = run_json({"mine-bench", "--k", "0", "--runs", "4"});
    CHECK(zero["mean_trials"] == 1.0);
    CHECK(zero["manifest"]["command"] == "mine-bench");
    CHECK(zero["manifest"]["tool_version"].is_string());

    const std::vector<std::string> args{"mine-bench", "--k", "6", "--runs", "20", "--strategy", "random", "--seed", "9"};
    CHECK(report_body(run_json(args)) == report_body(run_json(args)));

    CHECK(run_cli({"mine-bench", "--k", "25"}).code == 2);
    CHECK(run_cli({"mine-bench", "--strategy", "guess"}).code == 2);
    CHECK(run_cli({"mine-bench", "--runs", "0"}).code == 2);
}

TEST_CASE("simulate writes a report and a trace")
{
    const auto dir = scratch_dir("sim");
    const auto out = dir + "/report.json";
    REQUIRE(run_cli({"simulate", "--config", config("all-honest.json"), "--out", out}).code == 0);
    const auto report = Json::parse(slurp(out));
    CHECK(report["converged"] == true);
    CHECK(report["conserved"] == true);
    CHECK(report["ok"] == true);
    CHECK(report["manifest"]["config_path"] == config("all-honest.json"));
    CHECK(report["manifest"]["outputs"].size() == 2);

    const auto trace = slurp(dir + "/report.trace.jsonl");
    std::size_t lines = 0;
    for (std::size_t pos = 0; (pos = trace.find('\n', pos)) != std::string::npos; ++pos) ++lines;
    CHECK(lines == report["trace"]["records"].get<std::size_t>());
    const auto first = Json::parse(trace.substr(0, trace.find('\n')));
    for (const auto* key : {"time", "peer", "event", "payload"}) CHECK(first.contains(key));

    REQUIRE(run_cli({"simulate", "--config", config("all-honest.json"), "--out", out}).code == 0);
    CHECK(report_body(Json::parse(slurp(out))) == report_body(report));

    REQUIRE(run_cli({"simulate", "--config", config("all-honest.json"), "--seed", "8", "--out", out}).code == 0);
    const auto reseeded = Json::parse(slurp(out));
    CHECK(reseeded["seed"] == 8);
    CHECK(reseeded["trace"]["sha256"] != report["trace"]["sha256"]);
    std::filesystem::remove_all(dir);
}

TEST_CASE("simulate rejects malformed configs with the field name")
{
    const auto dir = scratch_dir("bad");
    auto base = Json::parse(slurp(config("all-honest.json")));
    auto expect_field = [&](const Json& j, const std::string& field) {
        spit(dir + "/c.json", j.dump());
        const auto r = run_cli({"simulate", "--config", dir + "/c.json"});
        CHECK(r.code == 2);
        CHECK_MESSAGE(r.err.find(field) != std::string::npos, r.err);
    };
    auto j = base;
    j["peers"][1]["hashpower_share"] = "lots";
    expect_field(j, "peers[1].hashpower_share");
    j = base;
    j["peers"][0]["hashpower_share"] = 0.9;
    expect_field(j, "peers: hashpower shares must sum to 1");
    j = base;
    j["latency"]["jitter"] = 3;
    expect_field(j, "latency.jitter");
    j = base;
    j["transfers"][2]["origin"] = "nowhere";
    expect_field(j, "transfers[2].origin");
    j = base;
    j["genesis"]["alice"] = "-5";
    expect_field(j, "genesis.alice");

    spit(dir + "/c.json", "{\"seed\": 1, \"seed\": 2}");
    CHECK(run_cli({"simulate", "--config", dir + "/c.json"}).code == 2);
    spit(dir + "/c.json", "{not json");
    CHECK(run_cli({"simulate", "--config", dir + "/c.json"}).code == 2);
    CHECK(run_cli({"simulate", "--config", dir + "/missing.json"}).code == 2);
    CHECK(run_cli({"simulate"}).code == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("bundled double-spend configs: more hashpower, more successes")
{
    const auto strong = run_json({"simulate", "--config", config("double-spend-0.4.json"), "--jobs", "2"});
    const auto weak = run_json({"simulate", "--config", config("double-spend-0.1.json")});
    CHECK(strong["races"] == 100);
    CHECK(strong["success_frequency"].get<double>() > weak["success_frequency"].get<double>());
    CHECK(weak["success_frequency"].get<double>() < 0.10);
}

TEST_CASE("scenario oabd")
{
    const auto r = run_json({"scenario", "oabd", "--q", "10", "--r", "9", "--g", "5"});
    CHECK(r["miner_fee_income"] == "6");
    CHECK(r["destination_final"] == "9");
    CHECK(r["source_final"] == "0");
    CHECK(r["ok"] == true);

    const auto no_gift = run_json({"scenario", "oabd", "--q", "30", "--r", "12", "--g", "0"});
    CHECK(no_gift["miner_fee_income"] == "18");

    CHECK(run_cli({"scenario", "oabd", "--q", "5", "--r", "9"}).code == 2);
    CHECK(run_cli({"scenario", "oabd", "--q", "ten"}).code == 2);
    CHECK(run_cli({"scenario", "steal_everything"}).code == 2);
}

TEST_CASE("scenario double_spend and reverse_mining")
{
    const auto ds = run_json({"scenario", "double_spend", "--alpha", "0.3", "--races", "20", "--seed", "4"});
    CHECK(ds["races"] == 20);
    CHECK(ds["outcomes"].size() == 20);
    CHECK(ds["ok"] == true);
    const auto parallel =
        run_json({"scenario", "double_spend", "--alpha", "0.3", "--races", "20", "--seed", "4", "--jobs", "3"});
    CHECK(parallel["outcomes"] == ds["outcomes"]);

    const auto rm = run_json({"scenario", "reverse_mining", "--alpha", "0.45", "--erase-depth", "2", "--seed", "3"});
    CHECK(rm["outcome"]["triggered"] == true);
    CHECK(rm["sim"]["conserved"] == true);
    CHECK(run_cli({"scenario", "reverse_mining", "--alpha", "1.5"}).code == 2);
}

TEST_CASE("scenario from a misuse file")
{
    const auto exim = run_json({"scenario", config("pseudo-theft.json")});
    std::set<std::string> labels;
    for (const auto& l : exim["labels"]) labels.insert(l["label"].get<std::string>());
    CHECK(labels.count("pseudo_theft"));
    CHECK_FALSE(labels.count("theft"));
    CHECK(exim["ok"] == true);

    // The file expects no theft, which non-EXIM money does produce.
    const auto non_exim = run_json({"scenario", config("pseudo-theft.json"), "--mode", "non_exim"}, 1);
    CHECK(non_exim["ok"] == false);

    const auto dir = scratch_dir("misuse");
    auto bad = Json::parse(slurp(config("pseudo-theft.json")));
    bad["events"][1]["amount"] = "11";
    spit(dir + "/s.json", bad.dump());
    CHECK(run_cli({"scenario", dir + "/s.json"}).code == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("ledger-replay")
{
    const auto dir = scratch_dir("replay");
    spit(dir + "/genesis.json", R"({"alice": "100", "bob": "40"})");
    spit(dir + "/empty.json", "[]");
    const auto empty = run_json({"ledger-replay", "--genesis", dir + "/genesis.json", "--transfers", dir + "/empty.json"});
    CHECK(empty["balances"] ==
          Json{{account_keys("alice").address.hex(), "100"}, {account_keys("bob").address.hex(), "40"}});
    CHECK(empty["conserved"] == true);

    auto signed_transfer = Json(make_transfer(account_keys("alice"), Amount{60}, account_keys("bob").address));
    auto forged = Json(make_transfer(account_keys("bob"), Amount{10}, account_keys("carol").address));
    forged["amount"] = "20";
    spit(dir + "/bad.json", Json::array({signed_transfer, forged}).dump());
    const auto failed = run_json({"ledger-replay", "--genesis", dir + "/genesis.json", "--transfers", dir + "/bad.json"}, 1);
    CHECK(failed["error"]["index"] == 1);
    CHECK(failed["error"]["code"] == "InvalidSignature");
    CHECK_FALSE(failed.contains("balances"));

    const auto accounts = scenario_accounts(6);
    const auto genesis = equal_allocation(accounts, Amount{1000});
    Json g = Json::object();
    for (const auto& [a, v] : genesis) g[a.hex()] = v;
    spit(dir + "/fuzz-genesis.json", g.dump());
    spit(dir + "/fuzz.json", Json(random_transfer_stream(accounts, genesis, 500, 77)).dump());
    const auto fuzz =
        run_json({"ledger-replay", "--genesis", dir + "/fuzz-genesis.json", "--transfers", dir + "/fuzz.json"});
    CHECK(fuzz["transfers_applied"] == 500);
    CHECK(fuzz["conserved"] == true);
    std::filesystem::remove_all(dir);
}
