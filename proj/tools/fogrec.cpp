// fogrecover: run the damage assessment / recovery engine from the shell.
//
// Exit codes: 0 success (and verification pass), 1 verification mismatch,
// 2 input error, 3 algorithm precondition or protocol violation.
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fogrec/fognet.hpp"

using namespace fogrec;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file " + path);
    out << text;
}

std::string default_format() {
    const char* env = std::getenv("FOGRECOVER_FORMAT");
    return env && *env ? env : "table";
}

// Pre-incident values for every local item in the log, used by recovery's
// upward scan when no former audit row holds the item.
std::map<std::string, Value> baseline_values(const TransactionLog& log, int before_seq) {
    std::map<std::string, Value> out;
    std::set<std::string> items;
    for (const auto& rec : log.records)
        if (rec.op.kind == Operation::Kind::read || rec.op.kind == Operation::Kind::write)
            if (!rec.op.item.is_remote()) items.insert(rec.op.item.item);
    for (const auto& item : items) {
        try {
            out[item] = committed_value_before(log, ItemRef::local(item),
                                               before_seq < 0 ? 0 : before_seq, {});
        } catch (const PreconditionError&) {
            // item first appears after the incident started; no baseline
        }
    }
    return out;
}

json patches_json(const std::map<std::string, Value>& patches) {
    json j = json::object();
    for (const auto& [item, v] : patches) j[item] = v;
    return j;
}

int cmd_assess(const std::string& log_path, const std::string& node_name,
               const std::vector<std::string>& malicious, const std::string& dit_path,
               const std::string& format, const std::string& out_prefix) {
    if (malicious.empty() == dit_path.empty())
        throw ParseError("pass exactly one of --malicious and --dit");

    FogId node = FogId::parse(node_name);
    TransactionLog log = parse_schedule(read_file(log_path), node);
    auto report = validate_schedule(log);
    if (!report.ok()) {
        for (const auto& e : report.errors)
            std::cerr << "log error (seq " << e.seq << "): " << e.message << "\n";
        throw ParseError("schedule failed validation");
    }

    AssessmentOutput a;
    if (!malicious.empty()) {
        MaliciousList mt_l{node, {}};
        for (const auto& t : malicious) mt_l.txns.push_back(txn_from_string(t, node));
        a = assess_primary(log, mt_l);
    } else {
        a = assess_secondary(log, dit_from_json(read_json(dit_path)));
    }

    DamagedItemSet dil{a.damaged};
    if (format == "json") {
        json out = {{"node", node.name()},
                    {"table", to_json(a.da_table)},
                    {"dil", to_json(dil)},
                    {"damage_table", to_json(a.damage_table)}};
        json outgoing = json::object();
        for (const auto& [target, dit] : a.outgoing) outgoing[target] = to_json(dit);
        out["outgoing"] = outgoing;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << to_table_text(a.da_table);
        for (const auto& [target, dit] : a.outgoing)
            std::cout << "\ndamage items -> " << target << "\n" << to_table_text(dit);
        std::cout << "\ndamaged:";
        for (const auto& i : a.damaged) std::cout << ' ' << i;
        std::cout << "\n";
    }

    if (!out_prefix.empty()) {
        json bundle = {{"node", node.name()},
                       {"table", to_json(a.da_table)},
                       {"dil", to_json(dil)},
                       {"fallback", patches_json(baseline_values(log, a.first_trigger_seq))}};
        write_file(out_prefix + ".da.json", bundle.dump(2) + "\n");
        write_file(out_prefix + ".dil.json", to_json(dil).dump(2) + "\n");
        write_file(out_prefix + ".dit.json", to_json(a.damage_table).dump(2) + "\n");
        for (const auto& [target, dit] : a.outgoing)
            write_file(out_prefix + ".dit." + target + ".json", to_json(dit).dump(2) + "\n");
    }
    return 0;
}

int cmd_recover(const std::string& da_path, const std::string& dil_path,
                const std::string& dit_path, const std::string& vit_path,
                const std::string& postlog_path, const std::string& format,
                const std::string& out_prefix) {
    json bundle = read_json(da_path);
    FogId node = FogId::parse(bundle.at("node").get<std::string>());
    DamageAuditTable table = audit_table_from_json(bundle.at("table"), node);

    RecoveryInput input;
    if (!dil_path.empty())
        input.damaged = dil_from_json(read_json(dil_path)).items;
    else if (!dit_path.empty())
        input.damaged = dit_from_json(read_json(dit_path)).local_items(node);
    else if (bundle.contains("dil"))
        input.damaged = dil_from_json(bundle.at("dil")).items;

    if (bundle.contains("fallback"))
        for (const auto& [item, v] : bundle.at("fallback").items())
            input.fallback[item] = v.get<Value>();

    if (!vit_path.empty()) input.vit_in = vit_from_json(read_json(vit_path)).rows;

    TransactionLog post_log;
    if (!postlog_path.empty()) {
        post_log = parse_schedule(read_file(postlog_path), node);
        input.post_log = &post_log;
    }

    RecoveryOutput r = recover(table, input);

    if (format == "json") {
        json out = {{"node", node.name()},
                    {"table", to_json(r.recovered)},
                    {"patches", patches_json(r.patches)}};
        json outgoing = json::object();
        for (const auto& [target, vit] : r.outgoing) outgoing[target] = to_json(vit);
        out["outgoing"] = outgoing;
        json blocked = json::array();
        for (const auto& i : r.still_blocked) blocked.push_back(i);
        out["still_blocked"] = blocked;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << to_table_text(r.recovered);
        for (const auto& [target, vit] : r.outgoing)
            std::cout << "\nvalid items -> " << target << "\n" << to_table_text(vit);
        std::cout << "\npatches\n" << to_patch_text(r.patches);
        if (!r.still_blocked.empty()) {
            std::cout << "still blocked:";
            for (const auto& i : r.still_blocked) std::cout << ' ' << i;
            std::cout << "\n";
        }
    }

    if (!out_prefix.empty()) {
        write_file(out_prefix + ".patches.json", patches_json(r.patches).dump(2) + "\n");
        for (const auto& [target, vit] : r.outgoing)
            write_file(out_prefix + ".vit." + target + ".json", to_json(vit).dump(2) + "\n");
    }
    return 0;
}

int cmd_run(const std::string& scenario_path, bool verify, bool show_trace,
            const std::string& format) {
    auto start = std::chrono::steady_clock::now();
    Scenario scenario = load_scenario(scenario_path);
    ExecutionResult exec = build_logs(scenario);
    Network net = Network::from_scenario(scenario, exec);

    // One alert per node that hosts malicious transactions.
    std::map<std::string, MaliciousList> alerts;
    for (const auto& t : scenario.malicious) {
        auto& mt_l = alerts[t.fog.name()];
        mt_l.target = t.fog;
        mt_l.txns.push_back(t);
    }
    for (const auto& [name, mt_l] : alerts) {
        (void)name;
        net.inject_alert(mt_l.target, mt_l);
    }

    CascadeTrace trace;
    if (!alerts.empty()) trace = net.run_to_quiescence();

    GroundTruth final_state = net.state_snapshot();
    StateDiff diff;
    if (verify) diff = compare_states(oracle_replay(scenario), final_state);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();

    if (format == "json") {
        json state = json::object();
        for (const auto& [node, items] : final_state) state[node] = patches_json(items);
        json out = {{"final_state", state},
                    {"events", trace.events.size()},
                    {"elapsed_ms", elapsed}};
        if (verify) out["verified"] = diff.empty();
        if (show_trace) out["trace"] = trace.to_text();
        std::cout << out.dump(2) << "\n";
    } else {
        if (show_trace) std::cout << trace.to_text();
        for (const auto& [node, items] : final_state) {
            std::cout << node << ":";
            for (const auto& [item, v] : items) std::cout << ' ' << item << '=' << v;
            std::cout << "\n";
        }
        std::cout << "events: " << trace.events.size() << ", elapsed: " << elapsed << " ms\n";
        if (verify) std::cout << "verify: " << (diff.empty() ? "pass" : "FAIL") << "\n";
    }
    if (verify && !diff.empty()) {
        std::cerr << diff.to_text();
        return 1;
    }
    return 0;
}

int cmd_gen(std::uint64_t seed, const GenParams& params, const std::string& out_path) {
    Scenario s = generate_random(seed, params);
    std::string text = to_json(s).dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transaction-log damage assessment and recovery for fog networks"};
    app.require_subcommand(1);

    std::string format = default_format();
    app.add_option("--format", format, "output format: table or json")
        ->check(CLI::IsMember({"table", "json"}));

    auto* assess_cmd = app.add_subcommand("assess", "build the damage audit table from a log");
    std::string log_path, node_name, dit_path, out_prefix;
    std::vector<std::string> malicious;
    assess_cmd->add_option("--log", log_path, "schedule file")->required();
    assess_cmd->add_option("--node", node_name, "fog id, e.g. fog1")->required();
    assess_cmd->add_option("--malicious", malicious, "malicious transactions, e.g. T1")
        ->delimiter(',');
    assess_cmd->add_option("--dit", dit_path, "incoming damage item table (JSON)");
    assess_cmd->add_option("--out", out_prefix, "write artifacts under this path prefix");

    auto* recover_cmd = app.add_subcommand("recover", "recover a damage audit table");
    std::string da_path, dil_path, r_dit_path, vit_path, postlog_path, r_out_prefix;
    recover_cmd->add_option("--da", da_path, "assessment bundle (JSON, from assess --out)")
        ->required();
    recover_cmd->add_option("--dil", dil_path, "damaged item list (JSON)");
    recover_cmd->add_option("--dit", r_dit_path, "damage item table (JSON)");
    recover_cmd->add_option("--vit", vit_path, "incoming valid items table (JSON)");
    recover_cmd->add_option("--postlog", postlog_path, "log of transactions run since");
    recover_cmd->add_option("--out", r_out_prefix, "write artifacts under this path prefix");

    auto* run_cmd = app.add_subcommand("run", "execute a scenario end to end");
    std::string scenario_path;
    bool verify = false, show_trace = false;
    run_cmd->add_option("--scenario", scenario_path, "scenario file (JSON)")->required();
    run_cmd->add_flag("--verify", verify, "compare the outcome against the replay oracle");
    run_cmd->add_flag("--trace", show_trace, "print the message cascade");

    auto* gen_cmd = app.add_subcommand("gen", "generate a random scenario");
    std::uint64_t seed = 0;
    GenParams params;
    std::string gen_out;
    gen_cmd->add_option("--seed", seed, "generator seed")->required();
    gen_cmd->add_option("--nodes", params.nodes, "fog node count");
    gen_cmd->add_option("--items", params.items_per_node, "items per node");
    gen_cmd->add_option("--txns", params.txns, "transaction count");
    gen_cmd->add_option("--malicious", params.malicious, "malicious transaction count");
    gen_cmd->add_option("--cross-prob", params.cross_prob, "cross-fog read probability");
    gen_cmd->add_option("--abort-prob", params.abort_prob, "abort probability");
    gen_cmd->add_option("--out", gen_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*assess_cmd)
            return cmd_assess(log_path, node_name, malicious, dit_path, format, out_prefix);
        if (*recover_cmd)
            return cmd_recover(da_path, dil_path, r_dit_path, vit_path, postlog_path, format,
                               r_out_prefix);
        if (*run_cmd) return cmd_run(scenario_path, verify, show_trace, format);
        if (*gen_cmd) return cmd_gen(seed, params, gen_out);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ProtocolError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
