#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "zkg/scenario.hpp"

namespace py = pybind11;
using namespace zkg;

namespace {

py::int_ to_py(Amount a) { return py::int_(py::str(amount_to_string(a))); }

Amount from_py(const py::int_& v) { return amount_from_string(py::str(py::handle(v)).cast<std::string>()); }

ContractMode mode_from(const std::string& s) {
    if (s == "baseline") return ContractMode::Baseline;
    if (s == "modified") return ContractMode::Modified;
    throw RollupError(ErrorCode::InvalidArgument, "mode must be baseline or modified");
}

OpType op_from(const std::string& s) {
    auto t = op_from_name(s);
    if (!t) throw RollupError(ErrorCode::InvalidArgument, "unknown op " + s);
    return *t;
}

py::dict report_dict(const CostReport& r) {
    py::list rows;
    for (const auto& row : r.rows) {
        py::dict gas;
        for (auto c : kAllCategories) gas[py::str(std::string(category_name(c)))] = row.gas[category_index(c)];
        py::dict d;
        d["mode"] = row.mode;
        d["type"] = std::string(op_name(row.type));
        d["token"] = row.token;
        d["count"] = row.count;
        d["external_calls"] = row.external_calls;
        d["gas"] = gas;
        d["average_total"] = row.average_total();
        rows.append(d);
    }
    py::dict out;
    out["rows"] = rows;
    out["metrics"] = r.metrics;
    return out;
}

FullExitKind exit_kind(const std::string& s) {
    if (s == "full_exit") return FullExitKind::FullExit;
    if (s == "forced_exit") return FullExitKind::ForcedExit;
    if (s == "full_change_group") return FullExitKind::FullChangeGroup;
    throw RollupError(ErrorCode::InvalidArgument, "unknown exit kind " + s);
}

}  // namespace

PYBIND11_MODULE(_zkgroup, m) {
    m.doc() = "Multi-group zk-rollup simulator";

    static py::exception<RollupError> rollup_error(m, "RollupError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const RollupError& e) {
            py::object exc = py::reinterpret_borrow<py::object>(rollup_error.ptr())(e.what());
            exc.attr("code") = std::string(error_code_name(e.code()));
            PyErr_SetObject(rollup_error.ptr(), exc.ptr());
        }
    });

    m.def("empty_root", [] { return to_hex(empty_root()); }, "Root of a group with no accounts, as hex");
    m.def("op_names", [] {
        std::vector<std::string> out;
        for (auto t : kAllOpTypes) out.emplace_back(op_name(t));
        return out;
    });
    m.def("chunk_count", [](const std::string& op) { return chunk_count(op_from(op)); }, py::arg("op"));
    m.def("pubdata_bytes", [](const std::string& op) { return layout_of(op_from(op)).pubdata_bytes; }, py::arg("op"));
    m.def(
        "estimate_constraints",
        [](std::size_t chunks, const std::string& variant) {
            return estimate_constraints(chunks, mode_from(variant) == ContractMode::Baseline ? CircuitVariant::Baseline
                                                                                              : CircuitVariant::Modified);
        },
        py::arg("chunks"), py::arg("variant") = "modified");
    m.def(
        "public_input",
        [](const std::string& block_hash, std::uint16_t group) {
            return to_hex(public_input_for(fixed_from_hex<Hash>(block_hash), GroupId{group}));
        },
        py::arg("block_hash"), py::arg("group"));

    m.def(
        "run_scenario",
        [](const std::string& text, std::optional<std::uint64_t> seed) {
            auto sc = Scenario::parse(text);
            ScenarioResult res;
            {
                py::gil_scoped_release release;
                res = run_scenario(sc, seed);
            }
            py::dict d;
            d["digest"] = to_hex(res.digest);
            d["log"] = res.log;
            d["report"] = report_dict(res.report);
            d["report_csv"] = render_report(res.report, ReportFormat::Csv);
            return d;
        },
        py::arg("text"), py::arg("seed") = py::none());
    m.def(
        "bench",
        [](std::size_t chunks, std::size_t aggregate, const std::string& mix, const std::string& mode,
           std::uint64_t seed) {
            BenchOptions o;
            o.chunks = chunks;
            o.aggregate = aggregate;
            o.mix = mix;
            o.mode = mode_from(mode);
            o.seed = seed;
            BenchResult r;
            {
                py::gil_scoped_release release;
                r = bench(o);
            }
            return report_dict(r.report);
        },
        py::arg("chunks") = 390, py::arg("aggregate") = 8, py::arg("mix") = "transfer", py::arg("mode") = "modified",
        py::arg("seed") = 1);
    m.def(
        "compare_changegroup",
        [](const std::string& token, std::size_t chunks, std::size_t aggregate) {
            auto c = compare_changegroup(token == "eth" ? TokenProfile::Eth : TokenProfile::Erc20,
                                         GasConfig::defaults(), chunks, aggregate);
            py::dict d;
            d["direct_gas"] = c.direct_gas;
            d["indirect_gas"] = c.indirect_gas;
            d["savings"] = c.savings();
            d["breakdown"] = c.breakdown;
            return d;
        },
        py::arg("token") = "eth", py::arg("chunks") = 390, py::arg("aggregate") = 8);
    m.def(
        "headline_metrics",
        [](std::size_t chunks, std::size_t aggregate) { return headline_report(GasConfig::defaults(), chunks, aggregate).metrics; },
        py::arg("chunks") = 390, py::arg("aggregate") = 8);

    py::class_<World>(m, "World")
        .def(py::init([](std::uint64_t seed, const std::string& mode) { return new World(seed, mode_from(mode)); }),
             py::arg("seed") = 0, py::arg("mode") = "modified")
        .def(
            "create_group",
            [](World& w, const std::string& validator, bool permissioned, const std::string& governor) {
                return w.create_group(governor, validator, permissioned).value;
            },
            py::arg("validator"), py::arg("permissioned") = false, py::arg("governor") = "governor")
        .def(
            "set_whitelist",
            [](World& w, std::uint16_t g, const std::string& user, bool allowed, const std::string& governor) {
                w.set_whitelist(governor, GroupId{g}, user, allowed);
            },
            py::arg("group"), py::arg("user"), py::arg("allowed") = true, py::arg("governor") = "governor")
        .def(
            "deposit",
            [](World& w, std::uint16_t g, const std::string& user, const py::int_& amount, std::uint32_t token) {
                return w.deposit(user, GroupId{g}, TokenId{token}, from_py(amount));
            },
            py::arg("group"), py::arg("user"), py::arg("amount"), py::arg("token") = 0)
        .def(
            "submit",
            [](World& w, std::uint16_t g, const std::string& user, const std::string& op, const std::string& to,
               const py::int_& amount, std::uint32_t token, std::uint64_t fee, std::uint16_t destination) {
                TxRequest req;
                req.type = op_from(op);
                req.to = to;
                req.amount = from_py(amount);
                req.token = TokenId{token};
                req.fee_token = TokenId{token};
                req.fee = fee;
                req.destination = GroupId{destination};
                auto adm = w.submit(GroupId{g}, user, req);
                return adm ? std::string("accepted") : std::string(reject_reason_name(*adm.reason));
            },
            py::arg("group"), py::arg("user"), py::arg("op"), py::arg("to") = "", py::arg("amount") = 0,
            py::arg("token") = 0, py::arg("fee") = 0, py::arg("destination") = 0)
        .def(
            "request_exit",
            [](World& w, std::uint16_t g, const std::string& user, std::uint32_t token, const std::string& kind,
               const std::string& target, std::optional<std::uint16_t> destination) {
                std::optional<GroupId> dest;
                if (destination) dest = GroupId{*destination};
                return w.request_exit(user, GroupId{g}, TokenId{token}, exit_kind(kind), target, dest);
            },
            py::arg("group"), py::arg("user"), py::arg("token") = 0, py::arg("kind") = "full_exit",
            py::arg("target") = "", py::arg("destination") = py::none())
        .def(
            "run_cycle",
            [](World& w, std::uint16_t g, std::size_t blocks, std::size_t capacity, std::size_t aggregate) {
                auto r = w.run_cycle(GroupId{g}, blocks, capacity, aggregate);
                py::dict d;
                d["first_block"] = r.first_block;
                d["last_block"] = r.last_block;
                d["ops"] = r.tx_costs.size();
                d["dropped"] = r.dropped.size();
                d["commit_gas"] = r.phase_gas("commit");
                d["prove_gas"] = r.phase_gas("prove");
                d["execute_gas"] = r.phase_gas("execute");
                return d;
            },
            py::arg("group"), py::arg("blocks") = 1, py::arg("capacity") = 26, py::arg("aggregate") = 1)
        .def(
            "withdraw_pending",
            [](World& w, const std::string& user, std::uint32_t token) {
                return to_py(w.withdraw_pending(user, TokenId{token}));
            },
            py::arg("user"), py::arg("token") = 0)
        .def(
            "balance",
            [](World& w, std::uint16_t g, const std::string& user, std::uint32_t token) {
                auto id = w.account_of(GroupId{g}, user);
                return to_py(id ? w.node(GroupId{g}).state().balance(*id, TokenId{token}) : 0);
            },
            py::arg("group"), py::arg("user"), py::arg("token") = 0)
        .def(
            "pending_balance",
            [](World& w, const std::string& user, std::uint32_t token) {
                return to_py(w.contract().pending_balance(w.user(user).address, TokenId{token}));
            },
            py::arg("user"), py::arg("token") = 0)
        .def("root", [](World& w, std::uint16_t g) { return to_hex(w.node(GroupId{g}).state().root()); })
        .def("stored_root", [](World& w, std::uint16_t g) { return to_hex(w.contract().stored_root(GroupId{g})); })
        .def("random_txs", [](World& w, std::uint16_t g, std::size_t n) { return w.random_txs(GroupId{g}, n); })
        .def("replay_mismatch", &World::replay_mismatch)
        .def("conservation_holds", [](const World& w) { return w.conservation().holds(); })
        .def("gas_total", [](const World& w) { return w.contract().gas_total(); })
        .def("digest", [](const World& w) { return to_hex(w.digest()); });
}
