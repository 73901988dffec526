#include "zkg/report.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace zkg {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw RollupError(code, msg); }

constexpr std::array<std::string_view, 2> kProfiles = {"eth", "erc20"};

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::uint64_t parse_u64(std::string_view s, std::size_t line) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(ErrorCode::Parse, "report line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
    return v;
}

double parse_double(std::string_view s, std::size_t line) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(ErrorCode::Parse, "report line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    return v;
}

const TxCost* find_cost(const CycleReport& r, OpType t) {
    for (const auto& c : r.tx_costs)
        if (c.type == t) return &c;
    return nullptr;
}

std::uint64_t last_charge(const L1Contract& c) { return c.gas_ledger().back().gas; }

TokenId token_for(TokenProfile p) { return p == TokenProfile::Eth ? TokenId{0} : TokenId{1}; }

/// Runs cycles until the group's queue and mempool are drained.
void drain(World& w, GroupId g, std::size_t chunks, std::size_t aggregate) {
    for (int guard = 0; guard < 10'000; ++guard) {
        if (w.contract().priority_queue(g).empty() && w.node(g).mempool().empty()) return;
        w.run_cycle(g, aggregate, chunks, aggregate);
    }
    fail(ErrorCode::Config, "setup did not converge");
}

}  // namespace

double CostRow::average(GasCategory c) const {
    auto n = c == GasCategory::External ? external_calls : count;
    return n == 0 ? 0.0 : static_cast<double>(gas[category_index(c)]) / static_cast<double>(n);
}

double CostRow::average_total() const {
    double t = 0;
    for (auto c : kAllCategories) t += average(c);
    return t;
}

bool CostRow::empty() const {
    if (count != 0 || external_calls != 0) return false;
    for (auto g : gas)
        if (g != 0) return false;
    return true;
}

const CostRow* CostReport::find(std::string_view mode, OpType type, std::string_view token) const {
    for (const auto& r : rows)
        if (r.mode == mode && r.type == type && r.token == token) return &r;
    return nullptr;
}

void CostReport::prune() { std::erase_if(rows, [](const CostRow& r) { return r.empty(); }); }

bool token_profiled(OpType t) {
    switch (t) {
        case OpType::Deposit:
        case OpType::Withdraw:
        case OpType::FullExit:
        case OpType::ForcedExit:
        case OpType::ChangeGroup:
        case OpType::FullChangeGroup:
            return true;
        default:
            return false;
    }
}

std::string token_label(std::optional<TokenId> token, OpType t) {
    if (!token_profiled(t) || !token) return "-";
    return profile_of(*token) == TokenProfile::Eth ? "eth" : "erc20";
}

CostReport build_cost_report(ContractMode mode, const std::vector<CycleReport>& cycles,
                             std::span<const GasCharge> ledger) {
    CostReport rep;
    const std::string m(mode_name(mode));
    for (auto t : kAllOpTypes) {
        if (token_profiled(t)) {
            for (auto p : kProfiles) rep.rows.push_back(CostRow{m, t, std::string(p), 0, 0, {}});
        } else {
            rep.rows.push_back(CostRow{m, t, "-", 0, 0, {}});
        }
    }
    auto row = [&](OpType t, const std::string& token) -> CostRow& {
        for (auto& r : rep.rows)
            if (r.type == t && r.token == token) return r;
        fail(ErrorCode::InvalidArgument, "no cost row");
    };
    for (const auto& c : cycles) {
        for (const auto& tc : c.tx_costs) {
            auto& r = row(tc.type, token_label(tc.token, tc.type));
            ++r.count;
            for (std::size_t i = 0; i < 6; ++i) r.gas[i] += tc.gas[i];
        }
        auto& noop = row(OpType::Noop, "-");
        noop.count += c.noop_ops;
        for (std::size_t i = 0; i < 6; ++i) noop.gas[i] += c.validator_gas[i];
    }
    for (const auto& ch : ledger) {
        if (ch.category != GasCategory::External || !ch.op_type) continue;
        auto& r = row(*ch.op_type, token_label(ch.token, *ch.op_type));
        ++r.external_calls;
        r.gas[category_index(GasCategory::External)] += ch.gas;
    }
    return rep;
}

TxMix TxMix::parse(std::string_view spec, ContractMode mode) {
    TxMix mix;
    auto allowed = [&](OpType t) {
        if (t == OpType::Noop) return false;
        if (mode == ContractMode::Baseline && (t == OpType::ChangeGroup || t == OpType::FullChangeGroup))
            return false;
        return true;
    };
    if (spec == "all") {
        for (auto t : kAllOpTypes)
            if (allowed(t)) mix.weights.emplace_back(t, 1u);
        return mix;
    }
    for (auto part : split(spec, ',')) {
        auto colon = part.find(':');
        auto name = part.substr(0, colon);
        unsigned weight = 1;
        if (colon != std::string_view::npos) {
            auto w = part.substr(colon + 1);
            auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), weight);
            if (ec != std::errc{} || ptr != w.data() + w.size() || weight == 0)
                fail(ErrorCode::Config, "bad weight in mix entry '" + std::string(part) + "'");
        }
        auto t = op_from_name(name);
        if (!t) fail(ErrorCode::Config, "unknown operation '" + std::string(name) + "' in mix");
        if (!allowed(*t))
            fail(ErrorCode::Config, std::string(op_name(*t)) + " is not available in " + std::string(mode_name(mode)) +
                                        " mode");
        mix.weights.emplace_back(*t, weight);
    }
    if (mix.weights.empty()) fail(ErrorCode::Config, "empty mix");
    return mix;
}

BenchResult bench(const BenchOptions& opt) {
    if (opt.chunks == 0 || opt.aggregate == 0) fail(ErrorCode::Config, "chunks and aggregate must be positive");
    const auto mix = TxMix::parse(opt.mix, opt.mode);
    std::mt19937_64 rng(opt.seed);

    struct Planned {
        OpType type;
        TokenId token;
    };
    std::vector<unsigned> weights;
    for (const auto& [t, w] : mix.weights) weights.push_back(w);
    std::discrete_distribution<std::size_t> draw(weights.begin(), weights.end());
    std::vector<Planned> plan;
    const std::size_t total = opt.chunks * opt.aggregate;
    std::size_t used = 0;
    for (;;) {
        auto t = mix.weights[draw(rng)].first;
        if (chunk_count(t) > opt.chunks) fail(ErrorCode::Config, std::string(op_name(t)) + " does not fit the block");
        if (used + chunk_count(t) > total) break;
        used += chunk_count(t);
        plan.push_back({t, TokenId{static_cast<std::uint32_t>(rng() & 1)}});
    }

    World w(opt.seed, opt.mode, opt.config, {}, opt.prover_workers);
    const GroupId g0 = w.create_group("governor", "validator-0");
    std::optional<GroupId> g1;
    if (opt.mode == ContractMode::Modified) g1 = w.create_group("governor", "validator-1");

    constexpr std::size_t kTraders = 16;
    auto trader = [](std::size_t i) { return "trader-" + std::to_string(i % kTraders); };
    for (std::size_t i = 0; i < kTraders; ++i)
        for (std::uint32_t tok : {0u, 1u}) w.deposit(trader(i), g0, TokenId{tok}, Amount{1'000'000'000'000'000});
    std::size_t exiters = 0;
    std::size_t mints = 0;
    for (const auto& p : plan) {
        if (p.type == OpType::FullExit || p.type == OpType::ForcedExit || p.type == OpType::FullChangeGroup)
            w.deposit("exiter-" + std::to_string(exiters++), g0, p.token, 1'000'000);
        if (p.type == OpType::WithdrawNFT) ++mints;
    }
    drain(w, g0, opt.chunks, opt.aggregate);
    for (std::size_t i = 0; i < kTraders; ++i) w.submit(g0, trader(i), TxRequest{.type = OpType::ChangePubKey});
    drain(w, g0, opt.chunks, opt.aggregate);
    for (std::size_t i = 0; i < mints; ++i)
        w.submit(g0, trader(i), TxRequest{.type = OpType::MintNFT, .content = "bench-" + std::to_string(i)});
    drain(w, g0, opt.chunks, opt.aggregate);

    std::vector<std::pair<std::string, TokenId>> nfts;
    for (std::size_t i = 0; i < std::min(mints, kTraders); ++i) {
        auto id = *w.account_of(g0, trader(i));
        for (const auto& [token, amount] : w.node(g0).state().account(id)->balances)
            if (token.nft() && amount > 0) nfts.emplace_back(trader(i), token);
    }

    const auto ledger_start = w.contract().gas_ledger().size();
    std::size_t next_trader = 0;
    std::size_t next_exiter = 0;
    std::size_t next_nft = 0;
    std::size_t fresh = 0;
    for (const auto& p : plan) {
        const auto name = trader(next_trader++);
        Admission a;
        switch (p.type) {
            case OpType::Deposit:
                w.deposit(name, g0, p.token, 1000);
                continue;
            case OpType::FullExit:
                w.request_exit("exiter-" + std::to_string(next_exiter++), g0, p.token, FullExitKind::FullExit);
                continue;
            case OpType::ForcedExit:
                w.request_exit(name, g0, p.token, FullExitKind::ForcedExit, "exiter-" + std::to_string(next_exiter++));
                continue;
            case OpType::FullChangeGroup:
                w.request_exit("exiter-" + std::to_string(next_exiter++), g0, p.token, FullExitKind::FullChangeGroup,
                               {}, g1);
                continue;
            case OpType::Transfer:
                a = w.submit(g0, name, {.type = p.type, .to = trader(next_trader), .token = p.token, .amount = 1000});
                break;
            case OpType::TransferToNew:
                a = w.submit(g0, name, {.type = p.type, .to = "new-" + std::to_string(fresh++), .token = p.token,
                                        .amount = 1000});
                break;
            case OpType::Withdraw:
                a = w.submit(g0, name, {.type = p.type, .token = p.token, .amount = 1000});
                break;
            case OpType::ChangePubKey:
                a = w.submit(g0, name, {.type = p.type});
                break;
            case OpType::MintNFT:
                a = w.submit(g0, name, {.type = p.type, .content = "m-" + std::to_string(fresh++)});
                break;
            case OpType::WithdrawNFT: {
                if (next_nft >= nfts.size()) fail(ErrorCode::Config, "bench ran out of minted NFTs");
                const auto& [owner, token] = nfts[next_nft++];
                a = w.submit(g0, owner, {.type = p.type, .token = token});
                break;
            }
            case OpType::Swap:
                a = w.submit(g0, name, {.type = p.type, .to = trader(next_trader), .token = TokenId{0},
                                        .token_b = TokenId{1}, .amount = 1000, .amount_b = 1000});
                break;
            case OpType::ChangeGroup:
                a = w.submit(g0, name, {.type = p.type, .token = p.token, .amount = 1000, .destination = *g1});
                break;
            default:
                fail(ErrorCode::Config, "unsupported op in mix");
        }
        if (!a) fail(ErrorCode::Config, "bench workload rejected: " + a.detail);
    }

    BenchResult res;
    res.options = opt;
    res.cycle = w.run_cycle(g0, opt.aggregate, opt.chunks, opt.aggregate);
    const auto ledger = w.contract().gas_ledger();
    res.report = build_cost_report(opt.mode, {res.cycle},
                                   std::span<const GasCharge>(ledger).subspan(ledger_start));
    res.report.metrics["deploy_gas"] = static_cast<double>(ledger.front().gas);
    for (const auto& c : ledger)
        if (c.function == "createGroup") {
            res.report.metrics["create_group_gas"] = static_cast<double>(c.gas);
            break;
        }
    return res;
}

double ChangeGroupComparison::savings() const {
    return indirect_gas == 0 ? 0.0 : 1.0 - static_cast<double>(direct_gas) / static_cast<double>(indirect_gas);
}

ChangeGroupComparison compare_changegroup(TokenProfile profile, const GasConfig& config, std::size_t chunks,
                                          std::size_t aggregate) {
    const TokenId token = token_for(profile);
    const Amount funds = 1'000'000;
    const Amount moved = 1000;
    ChangeGroupComparison cmp;
    cmp.token = profile;

    auto fund = [&](World& w, GroupId g) {
        w.deposit("alice", g, token, funds);
        w.run_cycle(g, aggregate, chunks, aggregate);
        w.submit(g, "alice", TxRequest{.type = OpType::ChangePubKey});
        w.run_cycle(g, aggregate, chunks, aggregate);
    };
    auto cost_of = [](const CycleReport& r, OpType t) {
        const auto* c = find_cost(r, t);
        if (!c) fail(ErrorCode::Config, std::string(op_name(t)) + " was not packed");
        return c->total();
    };

    {
        World w(1, ContractMode::Modified, config);
        auto src = w.create_group("governor", "validator-0");
        auto dst = w.create_group("governor", "validator-1");
        fund(w, src);
        auto a = w.submit(src, "alice",
                          TxRequest{.type = OpType::ChangeGroup, .token = token, .amount = moved, .destination = dst});
        if (!a) fail(ErrorCode::Config, "ChangeGroup rejected: " + a.detail);
        cmp.breakdown["changegroup_op"] = cost_of(w.run_cycle(src, aggregate, chunks, aggregate), OpType::ChangeGroup);
        cmp.breakdown["destination_deposit_inclusion"] =
            cost_of(w.run_cycle(dst, aggregate, chunks, aggregate), OpType::Deposit);
        cmp.direct_gas = cmp.breakdown["changegroup_op"] + cmp.breakdown["destination_deposit_inclusion"];
    }
    {
        World from(1, ContractMode::Baseline, config);
        World to(2, ContractMode::Baseline, config);
        auto ga = from.create_group("governor", "validator");
        auto gb = to.create_group("governor", "validator");
        fund(from, ga);
        auto a = from.submit(ga, "alice", TxRequest{.type = OpType::Withdraw, .token = token, .amount = moved});
        if (!a) fail(ErrorCode::Config, "Withdraw rejected: " + a.detail);
        cmp.breakdown["withdraw_op"] = cost_of(from.run_cycle(ga, aggregate, chunks, aggregate), OpType::Withdraw);
        from.withdraw_pending("alice", token);
        cmp.breakdown["withdraw_pending"] = last_charge(from.contract());
        to.deposit("alice", gb, token, moved);
        cmp.breakdown["deposit_call"] = last_charge(to.contract());
        cmp.breakdown["deposit_inclusion"] = cost_of(to.run_cycle(gb, aggregate, chunks, aggregate), OpType::Deposit);
        cmp.indirect_gas = cmp.breakdown["withdraw_op"] + cmp.breakdown["withdraw_pending"] +
                           cmp.breakdown["deposit_call"] + cmp.breakdown["deposit_inclusion"];
    }
    return cmp;
}

CostReport headline_report(const GasConfig& config, std::size_t chunks, std::size_t aggregate, std::uint64_t seed) {
    CostReport rep;
    std::map<ContractMode, BenchResult> runs;
    for (auto mode : {ContractMode::Baseline, ContractMode::Modified}) {
        BenchOptions opt;
        opt.chunks = chunks;
        opt.aggregate = aggregate;
        opt.mix = "all";
        opt.mode = mode;
        opt.seed = seed;
        opt.config = config;
        auto r = bench(opt);
        for (const auto& row : r.report.rows) rep.rows.push_back(row);
        runs.emplace(mode, std::move(r));
    }
    const auto& base = runs.at(ContractMode::Baseline).report;
    const auto& mod = runs.at(ContractMode::Modified).report;
    const double deploy_b = base.metrics.at("deploy_gas");
    const double deploy_m = mod.metrics.at("deploy_gas");
    rep.metrics["deploy_gas.baseline"] = deploy_b;
    rep.metrics["deploy_gas.modified"] = deploy_m;
    rep.metrics["deploy_overhead"] = deploy_m / deploy_b - 1.0;
    rep.metrics["create_group_gas"] = mod.metrics.at("create_group_gas");
    rep.metrics["create_group_share_of_deploy"] = mod.metrics.at("create_group_gas") / deploy_b;
    for (auto p : {TokenProfile::Eth, TokenProfile::Erc20})
        rep.metrics[std::string("changegroup_savings.") + (p == TokenProfile::Eth ? "eth" : "erc20")] =
            compare_changegroup(p, config, chunks, aggregate).savings();
    for (const auto& row : mod.rows) {
        if (row.type == OpType::Noop) continue;
        const auto* b = base.find("baseline", row.type, row.token);
        if (!b || b->count == 0 || row.count == 0) continue;
        std::string key = "ratio." + std::string(op_name(row.type));
        if (row.token != "-") key += "." + row.token;
        rep.metrics[key] = row.average_total() / b->average_total();
    }
    for (auto c : kBlockCapacities) {
        auto cb = estimate_constraints(c, CircuitVariant::Baseline);
        auto cm = estimate_constraints(c, CircuitVariant::Modified);
        rep.metrics["constraints." + std::to_string(c) + ".baseline"] = static_cast<double>(cb);
        rep.metrics["constraints." + std::to_string(c) + ".modified"] = static_cast<double>(cm);
        rep.metrics["constraint_overhead." + std::to_string(c)] =
            static_cast<double>(cm) / static_cast<double>(cb) - 1.0;
    }
    return rep;
}

std::string render_report(const CostReport& report, ReportFormat format) {
    std::ostringstream out;
    if (format == ReportFormat::Csv) {
        out << "record,mode,name,token,count,external_calls";
        for (auto c : kAllCategories) out << ',' << category_name(c);
        out << ",value\n";
        for (const auto& r : report.rows) {
            out << "op," << r.mode << ',' << op_name(r.type) << ',' << r.token << ',' << r.count << ','
                << r.external_calls;
            for (auto g : r.gas) out << ',' << g;
            out << ",\n";
        }
        for (const auto& [name, value] : report.metrics) out << "metric,," << name << ",,,,,,,,,," << format_double(value) << '\n';
        return out.str();
    }

    std::string mode;
    for (const auto& r : report.rows) {
        if (r.mode != mode) {
            mode = r.mode;
            out << "Average gas per operation, " << mode << " contract\n";
            out << std::left << std::setw(16) << "type" << std::setw(7) << "token" << std::right << std::setw(7)
                << "count";
            for (auto c : kAllCategories) out << std::setw(15) << category_name(c);
            out << std::setw(15) << "total" << '\n';
        }
        out << std::left << std::setw(16) << op_name(r.type) << std::setw(7) << r.token << std::right << std::setw(7)
            << r.count;
        for (auto c : kAllCategories) out << std::setw(15) << std::fixed << std::setprecision(1) << r.average(c);
        out << std::setw(15) << r.average_total() << '\n';
    }
    if (!report.metrics.empty()) {
        out << "Headline figures\n";
        for (const auto& [name, value] : report.metrics)
            out << std::left << std::setw(36) << name << std::right << std::setprecision(6) << value << '\n';
    }
    return out.str();
}

CostReport parse_report_csv(std::string_view csv) {
    CostReport rep;
    std::size_t line_no = 0;
    for (auto line : split(csv, '\n')) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 13) fail(ErrorCode::Parse, "report line " + std::to_string(line_no) + ": expected 13 fields");
        if (f[0] == "record") continue;
        if (f[0] == "op") {
            CostRow r;
            r.mode = std::string(f[1]);
            auto t = op_from_name(f[2]);
            if (!t) fail(ErrorCode::Parse, "report line " + std::to_string(line_no) + ": unknown op");
            r.type = *t;
            r.token = std::string(f[3]);
            r.count = parse_u64(f[4], line_no);
            r.external_calls = parse_u64(f[5], line_no);
            for (std::size_t i = 0; i < 6; ++i) r.gas[i] = parse_u64(f[6 + i], line_no);
            rep.rows.push_back(std::move(r));
        } else if (f[0] == "metric") {
            rep.metrics[std::string(f[2])] = parse_double(f[12], line_no);
        } else {
            fail(ErrorCode::Parse, "report line " + std::to_string(line_no) + ": unknown record");
        }
    }
    return rep;
}

void emit_report(const CostReport& report, ReportFormat format, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::Config, "cannot write " + path.string());
    f << render_report(report, format);
    if (!f) fail(ErrorCode::Config, "write failed for " + path.string());
}

}  // namespace zkg
