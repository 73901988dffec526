#include "helpers.hpp"

using namespace zkg;
using zkg::test::error_of;

namespace {

std::string parse_error(std::string_view text) {
    try {
        (void)Scenario::parse(text);
    } catch (const RollupError& e) {
        CHECK(e.code() == ErrorCode::Parse);
        return e.what();
    }
    FAIL("expected a parse error");
    return {};
}

constexpr std::string_view kBasic = R"({
  "seed": 9,
  "actions": [
    {"action": "create_group", "validator": "val"},
    {"action": "deposit", "group": 0, "user": "alice", "amount": 5000},
    {"action": "deposit", "group": 0, "user": "bob", "amount": "1000", "token": 1},
    {"action": "run_cycle", "group": 0},
    {"action": "submit_tx", "group": 0, "user": "alice", "op": "ChangePubKey"},
    {"action": "submit_tx", "group": 0, "user": "bob", "op": "ChangePubKey"},
    {"action": "run_cycle", "group": 0},
    {"action": "submit_tx", "group": 0, "user": "alice", "op": "Transfer", "to": "bob", "amount": 100, "fee": 1},
    {"action": "submit_tx", "group": 0, "user": "alice", "op": "Transfer", "to": "bob", "amount": 1, "nonce": 0,
     "expect": "stale_nonce"},
    {"action": "submit_tx", "group": 0, "user": "bob", "op": "Withdraw", "token": 1, "amount": 300},
    {"action": "run_cycle", "group": 0, "blocks": 2, "capacity": 78, "aggregate": 2},
    {"action": "withdraw_pending", "user": "bob", "token": 1},
    {"action": "withdraw_pending", "user": "bob", "token": 1, "expect_error": "nothing_to_withdraw"},
    {"action": "check"}
  ]
}
)";

}  // namespace

TEST_CASE("parse errors carry line numbers") {
    CHECK(parse_error("{\n  \"actions\": [\n    {\"action\": \"deposit\", \"group\": 0}\n  ]\n}").starts_with("line 3:"));
    CHECK(parse_error("{\n  \"actions\": [\n    {\"action\": \"create_group\", \"validator\": \"v\"},\n"
                      "    {\"action\": \"fly\"}\n  ]\n}")
              .starts_with("line 4:"));
    CHECK(parse_error("{\n  \"actions\": [\n    {\"action\": \"deposit\" \"group\": 0}\n  ]\n}").starts_with("line 3:"));
    CHECK(parse_error("{\"mode\": \"other\"}").starts_with("line 1:"));
    CHECK(parse_error("{\"actions\": [{\"action\": \"run_cycle\", \"group\": -1}]}").starts_with("line 1:"));
    CHECK(parse_error("{\"actions\": [{\"action\": \"run_cycle\", \"group\": 0, \"extra\": 1}]}").find("extra") !=
          std::string::npos);
}

TEST_CASE("a scenario runs and keeps its invariants") {
    auto sc = Scenario::parse(kBasic);
    CHECK(sc.seed == 9u);
    CHECK(sc.actions.size() == 14);
    CHECK(sc.actions[3].line == 7);
    World w(*sc.seed, sc.mode);
    auto res = run_scenario(w, sc);
    CHECK(res.log.size() == 14);
    CHECK(w.contract().total_withdrawn() == 300);
    CHECK(w.replay_mismatch().empty());
    CHECK(w.conservation().holds());
    const auto* row = res.report.find("modified", OpType::Transfer);
    REQUIRE(row);
    CHECK(row->count == 1);
}

TEST_CASE("runtime errors name the action") {
    auto sc = Scenario::parse(
        "{\"actions\": [\n"
        "  {\"action\": \"create_group\", \"validator\": \"val\"},\n"
        "  {\"action\": \"withdraw_pending\", \"user\": \"alice\"}\n"
        "]}");
    try {
        (void)run_scenario(sc);
        FAIL("expected failure");
    } catch (const RollupError& e) {
        CHECK(e.code() == ErrorCode::NothingToWithdraw);
        CHECK(std::string(e.what()).starts_with("action 1 (withdraw_pending, line 3)"));
    }
}

TEST_CASE("scenarios are deterministic") {
    auto sc = Scenario::parse(kBasic);
    auto a = run_scenario(sc);
    auto b = run_scenario(sc);
    CHECK(a.digest == b.digest);
    CHECK(a.report == b.report);
    auto c = run_scenario(sc, 10);
    CHECK(c.digest != a.digest);
}

TEST_CASE("random scenarios are deterministic per seed") {
    auto a = random_scenario(4);
    auto b = random_scenario(4);
    CHECK(a.actions.size() == b.actions.size());
    for (std::size_t i = 0; i < a.actions.size(); ++i) CHECK(a.actions[i].body == b.actions[i].body);
    CHECK(run_scenario(a).digest == run_scenario(b).digest);
}

TEST_CASE("worker count does not change the outcome") {
    auto sc = random_scenario(12);
    sc.prover_workers = 0;
    auto inline_run = run_scenario(sc);
    sc.prover_workers = 3;
    auto pooled = run_scenario(sc);
    CHECK(inline_run.digest == pooled.digest);
}

TEST_CASE("shipped scenario files parse and run") {
    for (const auto& entry : std::filesystem::directory_iterator(zkg::test::source_dir() / "scenarios")) {
        if (entry.path().extension() != ".json") continue;
        CAPTURE(entry.path().string());
        auto sc = Scenario::load(entry.path());
        CHECK_NOTHROW((void)run_scenario(sc));
    }
}

TEST_CASE("report csv round trip") {
    auto res = run_scenario(Scenario::parse(kBasic));
    res.report.metrics["example"] = 0.125;
    auto csv = render_report(res.report, ReportFormat::Csv);
    CHECK(csv.starts_with("record,mode,name,token,count,external_calls,"));
    CHECK(parse_report_csv(csv) == res.report);
}

TEST_CASE("text report lists every op type") {
    auto bench_res = bench({.chunks = 26, .aggregate = 1, .mix = "all"});
    auto text = render_report(bench_res.report, ReportFormat::Text);
    for (auto t : kAllOpTypes) CHECK(text.find(op_name(t)) != std::string::npos);
}

TEST_CASE("tx mix parsing") {
    auto m = TxMix::parse("transfer:3,withdraw:1", ContractMode::Modified);
    REQUIRE(m.weights.size() == 2);
    CHECK(m.weights[0] == std::pair{OpType::Transfer, 3u});
    CHECK(error_of([] { TxMix::parse("teleport", ContractMode::Modified); }) == ErrorCode::Config);
    auto all_base = TxMix::parse("all", ContractMode::Baseline);
    for (const auto& [t, w] : all_base.weights) {
        CHECK(t != OpType::ChangeGroup);
        CHECK(t != OpType::FullChangeGroup);
    }
}

TEST_CASE("bench fills every block of the measured cycle") {
    auto r = bench({.chunks = 78, .aggregate = 4, .mix = "transfer"});
    CHECK(r.cycle.last_block - r.cycle.first_block + 1 == 4);
    CHECK(r.cycle.noop_ops == 0);
    const auto* row = r.report.find("modified", OpType::Transfer);
    REQUIRE(row);
    CHECK(row->count == 4 * 78 / 2);
}

TEST_CASE("emit_report reports unwritable paths") {
    CostReport rep;
    CHECK(error_of([&] { emit_report(rep, ReportFormat::Csv, "/nonexistent/dir/report.csv"); }) == ErrorCode::Config);
}
