#include "zkg/scenario.hpp"

#include <fstream>
#include <sstream>

namespace zkg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw RollupError(code, msg); }

std::size_t line_of(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Line on which each element of the top-level "actions" array starts.
std::vector<std::size_t> action_lines(std::string_view text) {
    std::vector<std::size_t> lines;
    std::size_t line = 1;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (char c : text) {
        if (c == '\n') ++line;
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        switch (c) {
            case '"': in_string = true; break;
            case '{':
            case '[':
                if (depth == 2 && c == '{') lines.push_back(line);
                ++depth;
                break;
            case '}':
            case ']': --depth; break;
            default: break;
        }
    }
    return lines;
}

struct FieldSpec {
    std::string_view name;
    enum Kind { String, Uint, Bool, AmountLike } kind;
    bool required;
};

const std::map<std::string, std::vector<FieldSpec>, std::less<>>& schemas() {
    using K = FieldSpec::Kind;
    static const std::map<std::string, std::vector<FieldSpec>, std::less<>> s = {
        {"create_group",
         {{"validator", K::String, true},
          {"governor", K::String, false},
          {"permissioned", K::Bool, false},
          {"data_mode", K::String, false}}},
        {"whitelist",
         {{"group", K::Uint, true}, {"user", K::String, true}, {"governor", K::String, false}, {"allowed", K::Bool, false}}},
        {"deposit",
         {{"group", K::Uint, true}, {"user", K::String, true}, {"token", K::Uint, false}, {"amount", K::AmountLike, true}}},
        {"submit_tx",
         {{"group", K::Uint, true},
          {"user", K::String, true},
          {"op", K::String, true},
          {"to", K::String, false},
          {"token", K::Uint, false},
          {"token_b", K::Uint, false},
          {"amount", K::AmountLike, false},
          {"amount_b", K::AmountLike, false},
          {"fee", K::Uint, false},
          {"fee_b", K::Uint, false},
          {"fee_token", K::Uint, false},
          {"destination", K::Uint, false},
          {"content", K::String, false},
          {"nonce", K::Uint, false},
          {"sign_group", K::Uint, false},
          {"expect", K::String, false}}},
        {"run_cycle",
         {{"group", K::Uint, true}, {"blocks", K::Uint, false}, {"capacity", K::Uint, false}, {"aggregate", K::Uint, false}}},
        {"request_exit",
         {{"group", K::Uint, true},
          {"user", K::String, true},
          {"token", K::Uint, false},
          {"kind", K::String, false},
          {"target", K::String, false},
          {"destination", K::Uint, false}}},
        {"withdraw_pending", {{"user", K::String, true}, {"token", K::Uint, false}}},
        {"random_txs", {{"group", K::Uint, true}, {"count", K::Uint, true}}},
        {"check", {}},
    };
    return s;
}

void validate(const json& a, std::size_t line) {
    auto where = "line " + std::to_string(line) + ": ";
    if (!a.is_object()) fail(ErrorCode::Parse, where + "action must be an object");
    if (!a.contains("action") || !a["action"].is_string()) fail(ErrorCode::Parse, where + "missing \"action\"");
    const auto name = a["action"].get<std::string>();
    auto it = schemas().find(name);
    if (it == schemas().end()) fail(ErrorCode::Parse, where + "unknown action \"" + name + "\"");
    for (const auto& [key, value] : a.items()) {
        if (key == "action" || key == "expect_error" || key == "lenient") continue;
        auto f = std::find_if(it->second.begin(), it->second.end(), [&](const FieldSpec& s) { return s.name == key; });
        if (f == it->second.end()) fail(ErrorCode::Parse, where + name + " has no field \"" + key + "\"");
        bool ok = false;
        switch (f->kind) {
            case FieldSpec::String: ok = value.is_string(); break;
            case FieldSpec::Uint: ok = value.is_number_unsigned(); break;
            case FieldSpec::Bool: ok = value.is_boolean(); break;
            case FieldSpec::AmountLike: ok = value.is_number_unsigned() || value.is_string(); break;
        }
        if (!ok) fail(ErrorCode::Parse, where + "field \"" + key + "\" has the wrong type");
    }
    for (const auto& f : it->second)
        if (f.required && !a.contains(f.name))
            fail(ErrorCode::Parse, where + name + " requires \"" + std::string(f.name) + "\"");
    if (a.contains("expect_error") && !a["expect_error"].is_string())
        fail(ErrorCode::Parse, where + "expect_error must be a string");
    if (a.contains("lenient") && !a["lenient"].is_boolean()) fail(ErrorCode::Parse, where + "lenient must be a bool");
}

Amount amount_field(const json& a, const char* key) {
    if (!a.contains(key)) return 0;
    const auto& v = a[key];
    if (v.is_string()) return amount_from_string(v.get<std::string>());
    return v.get<std::uint64_t>();
}

template <typename T>
T uint_field(const json& a, const char* key, T fallback) {
    if (!a.contains(key)) return fallback;
    auto v = a[key].get<std::uint64_t>();
    if (v > std::numeric_limits<T>::max()) fail(ErrorCode::InvalidArgument, std::string(key) + " out of range");
    return static_cast<T>(v);
}

std::string str_field(const json& a, const char* key, std::string fallback = {}) {
    return a.contains(key) ? a[key].get<std::string>() : fallback;
}

GroupId group_field(const json& a, const char* key = "group") {
    return GroupId{uint_field<std::uint16_t>(a, key, 0)};
}

std::string execute(World& w, const json& a) {
    const auto name = a["action"].get<std::string>();
    if (name == "create_group") {
        auto mode = str_field(a, "data_mode", "zk-rollup");
        if (mode != "zk-rollup" && mode != "validium") fail(ErrorCode::InvalidArgument, "unknown data_mode " + mode);
        auto g = w.create_group(str_field(a, "governor", "governor"), a["validator"].get<std::string>(),
                                a.value("permissioned", false),
                                mode == "validium" ? DataMode::Validium : DataMode::ZkRollup);
        return "group " + std::to_string(g.value) + " created";
    }
    if (name == "whitelist") {
        w.set_whitelist(str_field(a, "governor", "governor"), group_field(a), a["user"].get<std::string>(),
                        a.value("allowed", true));
        return "whitelist updated";
    }
    if (name == "deposit") {
        auto id = w.deposit(a["user"].get<std::string>(), group_field(a), TokenId{uint_field<std::uint32_t>(a, "token", 0)},
                            amount_field(a, "amount"));
        return "priority request " + std::to_string(id);
    }
    if (name == "submit_tx") {
        auto type = op_from_name(a["op"].get<std::string>());
        if (!type) fail(ErrorCode::InvalidArgument, "unknown op " + a["op"].get<std::string>());
        TxRequest req;
        req.type = *type;
        req.to = str_field(a, "to");
        req.token = TokenId{uint_field<std::uint32_t>(a, "token", 0)};
        req.token_b = TokenId{uint_field<std::uint32_t>(a, "token_b", 0)};
        req.amount = amount_field(a, "amount");
        req.amount_b = amount_field(a, "amount_b");
        req.fee = uint_field<Fee>(a, "fee", 0);
        req.fee_b = uint_field<Fee>(a, "fee_b", 0);
        req.fee_token = TokenId{uint_field<std::uint32_t>(a, "fee_token", 0)};
        req.destination = group_field(a, "destination");
        req.content = str_field(a, "content");
        if (a.contains("nonce")) req.nonce = uint_field<Nonce>(a, "nonce", 0);
        if (a.contains("sign_group")) req.sign_group = group_field(a, "sign_group");
        auto adm = w.submit(group_field(a), a["user"].get<std::string>(), req);
        std::string got = adm ? "accepted" : std::string(reject_reason_name(*adm.reason));
        auto expect = str_field(a, "expect");
        if (!expect.empty() && expect != got)
            fail(ErrorCode::InvalidArgument, "expected " + expect + " but got " + got);
        return got;
    }
    if (name == "run_cycle") {
        auto r = w.run_cycle(group_field(a), uint_field<std::size_t>(a, "blocks", 1),
                             uint_field<std::size_t>(a, "capacity", 26), uint_field<std::size_t>(a, "aggregate", 1));
        return "blocks " + std::to_string(r.first_block) + ".." + std::to_string(r.last_block) + " executed, " +
               std::to_string(r.tx_costs.size()) + " ops, " + std::to_string(r.dropped.size()) + " dropped";
    }
    if (name == "request_exit") {
        auto kind_s = str_field(a, "kind", "full_exit");
        FullExitKind kind;
        if (kind_s == "full_exit")
            kind = FullExitKind::FullExit;
        else if (kind_s == "forced_exit")
            kind = FullExitKind::ForcedExit;
        else if (kind_s == "full_change_group")
            kind = FullExitKind::FullChangeGroup;
        else
            fail(ErrorCode::InvalidArgument, "unknown exit kind " + kind_s);
        std::optional<GroupId> dest;
        if (a.contains("destination")) dest = group_field(a, "destination");
        auto id = w.request_exit(a["user"].get<std::string>(), group_field(a),
                                 TokenId{uint_field<std::uint32_t>(a, "token", 0)}, kind, str_field(a, "target"), dest);
        return "priority request " + std::to_string(id);
    }
    if (name == "withdraw_pending") {
        auto amt = w.withdraw_pending(a["user"].get<std::string>(), TokenId{uint_field<std::uint32_t>(a, "token", 0)});
        return "withdrew " + amount_to_string(amt);
    }
    if (name == "random_txs") {
        auto n = w.random_txs(group_field(a), uint_field<std::size_t>(a, "count", 0));
        return std::to_string(n) + " admitted";
    }
    if (name == "check") {
        if (auto why = w.replay_mismatch(); !why.empty()) fail(ErrorCode::InvalidArgument, "replay mismatch: " + why);
        if (!w.conservation().holds()) fail(ErrorCode::InvalidArgument, "value conservation violated");
        return "invariants hold";
    }
    fail(ErrorCode::InvalidArgument, "unknown action " + name);
}

}  // namespace

Scenario Scenario::parse(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Parse, "line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) +
                                   ": malformed JSON");
    }
    Scenario s;
    if (!doc.is_object()) fail(ErrorCode::Parse, "line 1: scenario must be a JSON object");
    for (const auto& [key, value] : doc.items())
        if (key != "seed" && key != "mode" && key != "actions" && key != "prover_workers")
            fail(ErrorCode::Parse, "line 1: unknown top-level field \"" + key + "\"");
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) fail(ErrorCode::Parse, "line 1: seed must be an unsigned integer");
        s.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("mode")) {
        auto m = doc["mode"].is_string() ? doc["mode"].get<std::string>() : "";
        if (m == "baseline")
            s.mode = ContractMode::Baseline;
        else if (m == "modified")
            s.mode = ContractMode::Modified;
        else
            fail(ErrorCode::Parse, "line 1: mode must be \"baseline\" or \"modified\"");
    }
    if (doc.contains("prover_workers")) {
        if (!doc["prover_workers"].is_number_unsigned()) fail(ErrorCode::Parse, "line 1: prover_workers must be unsigned");
        s.prover_workers = doc["prover_workers"].get<std::size_t>();
    }
    if (doc.contains("actions")) {
        if (!doc["actions"].is_array()) fail(ErrorCode::Parse, "line 1: actions must be an array");
        auto lines = action_lines(text);
        const auto& arr = doc["actions"];
        for (std::size_t i = 0; i < arr.size(); ++i) {
            std::size_t line = i < lines.size() ? lines[i] : 0;
            validate(arr[i], line);
            s.actions.push_back({line, arr[i]});
        }
    }
    return s;
}

Scenario Scenario::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::Config, "cannot open scenario " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

ScenarioResult run_scenario(World& w, const Scenario& scenario) {
    ScenarioResult res;
    for (std::size_t i = 0; i < scenario.actions.size(); ++i) {
        const auto& act = scenario.actions[i];
        const auto& a = act.body;
        auto where = "action " + std::to_string(i) + " (" + a["action"].get<std::string>() + ", line " +
                     std::to_string(act.line) + ")";
        auto expected = str_field(a, "expect_error");
        try {
            auto msg = execute(w, a);
            if (!expected.empty()) fail(ErrorCode::InvalidArgument, "expected error " + expected + " but succeeded");
            res.log.push_back(where + ": " + msg);
        } catch (const RollupError& e) {
            std::string code(error_code_name(e.code()));
            if (!expected.empty() && expected == code) {
                res.log.push_back(where + ": rejected as expected (" + code + ")");
                continue;
            }
            if (a.value("lenient", false)) {
                res.log.push_back(where + ": skipped (" + code + ")");
                continue;
            }
            throw RollupError(e.code(), where + ": " + e.what());
        }
    }
    const auto ledger = w.contract().gas_ledger();
    res.report = build_cost_report(w.contract().mode(), w.cycles(), ledger);
    res.report.prune();
    res.digest = w.digest();
    return res;
}

ScenarioResult run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed, const GasConfig& config) {
    World w(seed.value_or(scenario.seed.value_or(0)), scenario.mode, config, {}, scenario.prover_workers);
    return run_scenario(w, scenario);
}

Scenario random_scenario(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };
    Scenario s;
    s.seed = seed;
    auto add = [&](json a) { s.actions.push_back({s.actions.size() + 1, std::move(a)}); };

    const auto groups = uniform(2, 3);
    const bool permissioned_last = uniform(0, 1) == 1;
    std::vector<std::string> users;
    for (int i = 0; i < 6; ++i) users.push_back("user-" + std::to_string(i));
    for (std::uint64_t g = 0; g < groups; ++g)
        add({{"action", "create_group"}, {"validator", "validator-" + std::to_string(g)},
             {"permissioned", permissioned_last && g + 1 == groups}});
    if (permissioned_last)
        for (std::size_t i = 0; i < 4; ++i)
            add({{"action", "whitelist"}, {"group", groups - 1}, {"user", users[i]}});
    for (const auto& u : users) {
        auto g = uniform(0, groups - 1);
        if (permissioned_last && g + 1 == groups && (u == users[4] || u == users[5])) g = 0;
        add({{"action", "deposit"}, {"group", g}, {"user", u}, {"token", 0}, {"amount", uniform(10'000, 1'000'000)}});
        add({{"action", "deposit"}, {"group", g}, {"user", u}, {"token", 1}, {"amount", uniform(10'000, 1'000'000)}});
    }
    for (std::uint64_t g = 0; g < groups; ++g) add({{"action", "run_cycle"}, {"group", g}});

    const std::array<std::pair<std::size_t, std::size_t>, 4> shapes = {{{1, 1}, {2, 1}, {2, 2}, {4, 4}}};
    const auto rounds = uniform(3, 6);
    for (std::uint64_t r = 0; r < rounds; ++r) {
        for (std::uint64_t g = 0; g < groups; ++g) {
            add({{"action", "random_txs"}, {"group", g}, {"count", uniform(3, 15)}});
            if (uniform(0, 3) == 0) {
                const auto& u = users[uniform(0, users.size() - 1)];
                add({{"action", "deposit"}, {"group", g}, {"user", u}, {"token", uniform(0, 1)},
                     {"amount", uniform(100, 10'000)}, {"lenient", true}});
            }
            if (uniform(0, 4) == 0) {
                json exit = {{"action", "request_exit"}, {"group", g}, {"user", users[uniform(0, users.size() - 1)]},
                             {"token", uniform(0, 1)}, {"lenient", true}};
                if (uniform(0, 1) == 1) {
                    exit["kind"] = "full_change_group";
                    exit["destination"] = (g + 1) % groups;
                }
                add(exit);
            }
            if (permissioned_last && g + 1 == groups && uniform(0, 3) == 0)
                add({{"action", "whitelist"}, {"group", g}, {"user", users[uniform(0, 3)]}, {"allowed", uniform(0, 1) == 1}});
            auto [blocks, agg] = shapes[uniform(0, shapes.size() - 1)];
            add({{"action", "run_cycle"}, {"group", g}, {"blocks", blocks}, {"capacity", uniform(0, 1) ? 26 : 78},
                 {"aggregate", agg}});
            add({{"action", "check"}});
        }
        if (uniform(0, 2) == 0)
            add({{"action", "withdraw_pending"}, {"user", users[uniform(0, users.size() - 1)]}, {"token", uniform(0, 1)},
                 {"lenient", true}});
    }
    for (std::uint64_t g = 0; g < groups; ++g) add({{"action", "run_cycle"}, {"group", g}, {"capacity", 78}});
    add({{"action", "check"}});
    return s;
}

}  // namespace zkg
