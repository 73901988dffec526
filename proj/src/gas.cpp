#include "zkg/gas.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace zkg {

namespace {

struct Field {
    std::string_view key;
    std::uint64_t GasConstants::*member;
};

constexpr std::array<Field, 22> kFields = {{
    {"deploy", &GasConstants::deploy},
    {"create_group", &GasConstants::create_group},
    {"set_whitelist", &GasConstants::set_whitelist},
    {"commit.call", &GasConstants::commit_call},
    {"commit.per_block", &GasConstants::commit_per_block},
    {"commit.per_byte", &GasConstants::commit_per_byte},
    {"commit.onchain_op", &GasConstants::commit_onchain_op},
    {"commit.priority_op", &GasConstants::commit_priority_op},
    {"prove.call", &GasConstants::prove_call},
    {"prove.per_block", &GasConstants::prove_per_block},
    {"execute.call", &GasConstants::execute_call},
    {"execute.per_block", &GasConstants::execute_per_block},
    {"execute.withdraw_eth", &GasConstants::execute_withdraw_eth},
    {"execute.withdraw_erc20", &GasConstants::execute_withdraw_erc20},
    {"execute.withdraw_nft", &GasConstants::execute_withdraw_nft},
    {"execute.change_group", &GasConstants::execute_change_group},
    {"external.deposit_eth", &GasConstants::deposit_eth},
    {"external.deposit_erc20", &GasConstants::deposit_erc20},
    {"external.full_exit_request", &GasConstants::full_exit_request},
    {"external.withdraw_pending_eth", &GasConstants::withdraw_pending_eth},
    {"external.withdraw_pending_erc20", &GasConstants::withdraw_pending_erc20},
    {"external.exodus_withdraw", &GasConstants::exodus_withdraw},
}};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view category_name(GasCategory c) {
    switch (c) {
        case GasCategory::CommitBase: return "commit_base";
        case GasCategory::ProveBase: return "prove_base";
        case GasCategory::ExecuteBase: return "execute_base";
        case GasCategory::CommitExtra: return "commit_extra";
        case GasCategory::ExecuteExtra: return "execute_extra";
        case GasCategory::External: return "external";
    }
    return "unknown";
}

std::string_view mode_name(ContractMode m) { return m == ContractMode::Baseline ? "baseline" : "modified"; }

GasConfig GasConfig::defaults() {
    GasConfig c;
    auto& b = c.baseline;
    b.deploy = 22'106'772;
    b.create_group = 0;  // the single rollup is part of the deployment
    b.set_whitelist = 0;
    b.commit_call = 45'000;
    b.commit_per_block = 22'000;
    b.commit_per_byte = 40;
    b.commit_onchain_op = 4'000;
    b.commit_priority_op = 9'000;
    b.prove_call = 480'000;
    b.prove_per_block = 6'000;
    b.execute_call = 32'000;
    b.execute_per_block = 14'000;
    b.execute_withdraw_eth = 24'000;
    b.execute_withdraw_erc20 = 26'000;
    b.execute_withdraw_nft = 45'000;
    b.execute_change_group = 0;
    b.deposit_eth = 62'000;
    b.deposit_erc20 = 98'000;
    b.full_exit_request = 75'000;
    b.withdraw_pending_eth = 33'000;
    b.withdraw_pending_erc20 = 52'000;
    b.exodus_withdraw = 120'000;

    // Group lookups: validator mapping read on every block call, public input
    // addition per block, group and whitelist checks on L1 requests.
    auto& m = c.modified;
    m = b;
    m.deploy = 22'904'219;
    m.create_group = 184'258;
    m.set_whitelist = 46'000;
    m.commit_call = b.commit_call + 2'300;
    m.commit_per_block = b.commit_per_block + 400;
    m.commit_priority_op = b.commit_priority_op + 100;
    m.prove_call = b.prove_call + 2'300;
    m.prove_per_block = b.prove_per_block + 350;
    m.execute_call = b.execute_call + 2'300;
    m.execute_per_block = b.execute_per_block + 300;
    m.execute_withdraw_eth = b.execute_withdraw_eth + 150;
    m.execute_withdraw_erc20 = b.execute_withdraw_erc20 + 150;
    m.execute_withdraw_nft = b.execute_withdraw_nft + 150;
    m.execute_change_group = 48'000;
    m.deposit_eth = b.deposit_eth + 1'300;
    m.deposit_erc20 = b.deposit_erc20 + 2'900;
    m.full_exit_request = b.full_exit_request + 600;
    m.exodus_withdraw = b.exodus_withdraw + 2'300;
    return c;
}

GasConfig GasConfig::parse(std::string_view text) {
    GasConfig c = defaults();
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        auto l = trim(std::string_view(line).substr(0, line.find('#')));
        if (l.empty()) continue;
        auto eq = l.find('=');
        auto where = "gas config line " + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos) throw RollupError(ErrorCode::Config, where + "expected key = value");
        auto key = trim(l.substr(0, eq));
        auto value = trim(l.substr(eq + 1));
        GasConstants* profile = nullptr;
        if (key.starts_with("baseline.")) {
            profile = &c.baseline;
            key.remove_prefix(9);
        } else if (key.starts_with("modified.")) {
            profile = &c.modified;
            key.remove_prefix(9);
        } else {
            throw RollupError(ErrorCode::Config, where + "key must start with baseline. or modified.");
        }
        auto it = std::find_if(kFields.begin(), kFields.end(), [&](const Field& f) { return f.key == key; });
        if (it == kFields.end()) throw RollupError(ErrorCode::Config, where + "unknown key " + std::string(key));
        std::uint64_t v = 0;
        if (value.empty()) throw RollupError(ErrorCode::Config, where + "missing value");
        for (char ch : value) {
            if (ch == '_' || ch == ',') continue;
            if (ch < '0' || ch > '9') throw RollupError(ErrorCode::Config, where + "value is not an integer");
            v = v * 10 + static_cast<std::uint64_t>(ch - '0');
        }
        profile->*(it->member) = v;
    }
    return c;
}

GasConfig GasConfig::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw RollupError(ErrorCode::Config, "cannot open gas config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

std::string GasConfig::to_text() const {
    std::ostringstream out;
    for (auto mode : {ContractMode::Baseline, ContractMode::Modified}) {
        const auto& p = profile(mode);
        for (const auto& f : kFields) out << mode_name(mode) << '.' << f.key << " = " << p.*(f.member) << '\n';
    }
    return out.str();
}

std::uint64_t GasMeter::total() const {
    std::uint64_t t = 0;
    for (const auto& c : ledger_) t += c.gas;
    return t;
}

std::vector<GasReportRow> GasMeter::report() const {
    std::vector<GasReportRow> rows;
    for (const auto& c : ledger_) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const GasReportRow& r) {
            return r.group == c.group && r.function == c.function && r.category == c.category;
        });
        if (it == rows.end())
            rows.push_back({c.group, c.function, c.category, c.gas});
        else
            it->gas += c.gas;
    }
    return rows;
}

std::string gas_report_csv(const std::vector<GasReportRow>& rows) {
    std::ostringstream out;
    out << "group,function,category,gas\n";
    for (const auto& r : rows) {
        if (r.group)
            out << r.group->value;
        else
            out << '-';
        out << ',' << r.function << ',' << category_name(r.category) << ',' << r.gas << '\n';
    }
    return out.str();
}

}  // namespace zkg
