#include "fogrec/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fogrec/recovery.hpp"

namespace fogrec {

using nlohmann::json;

DeliveryPolicy delivery_policy_from_string(const std::string& s) {
    if (s == "fifo") return DeliveryPolicy::fifo;
    if (s == "round_robin") return DeliveryPolicy::round_robin;
    if (s == "random") return DeliveryPolicy::seeded_random;
    throw ParseError("unknown delivery policy '" + s + "'");
}

std::string to_string(DeliveryPolicy p) {
    switch (p) {
        case DeliveryPolicy::fifo: return "fifo";
        case DeliveryPolicy::round_robin: return "round_robin";
        case DeliveryPolicy::seeded_random: return "random";
    }
    return "fifo";
}

bool Topology::has_node(const FogId& id) const {
    return std::any_of(nodes.begin(), nodes.end(), [&](const auto& n) { return n.first == id; });
}

FogKind Topology::kind_of(const FogId& id) const {
    for (const auto& [node, kind] : nodes)
        if (node == id) return kind;
    throw PreconditionError("unknown fog node " + id.name());
}

bool Topology::allows(const FogId& reader, const FogId& source) const {
    return std::any_of(edges.begin(), edges.end(), [&](const auto& e) {
        return (e.first == reader && e.second == source) ||
               (e.first == source && e.second == reader);
    });
}

void Topology::validate() const {
    std::set<std::string> seen;
    for (const auto& [node, kind] : nodes) {
        (void)kind;
        if (!seen.insert(node.label).second)
            throw ParseError("duplicate fog node " + node.name());
    }
    for (const auto& [a, b] : edges) {
        if (!has_node(a) || !has_node(b))
            throw ParseError("edge references unknown node " + a.name() + "-" + b.name());
        if (kind_of(a) == kind_of(b))
            throw ParseError("edge " + a.name() + "-" + b.name() +
                             " must connect a public and a utility node");
    }
}

bool Scenario::is_malicious(const TxnId& txn) const {
    return std::find(malicious.begin(), malicious.end(), txn) != malicious.end();
}

void Scenario::validate() const {
    topology.validate();
    for (const auto& [node, items] : initial) {
        (void)items;
        if (!topology.has_node(FogId::parse(node)))
            throw ParseError("initial state for unknown node " + node);
    }
    std::set<std::pair<std::string, int>> txns;
    for (const auto& p : programs) {
        if (!topology.has_node(p.txn.fog))
            throw ParseError("program " + p.txn.qualified() + " on unknown node");
        if (!txns.insert({p.txn.fog.label, p.txn.number}).second)
            throw ParseError("duplicate transaction " + p.txn.qualified());
        for (const auto& step : p.steps) {
            if (step.kind == ProgramStep::Kind::read_remote) {
                if (!topology.has_node(step.source))
                    throw ParseError("remote read from unknown node " + step.source.name());
                if (!topology.allows(p.txn.fog, step.source))
                    throw ParseError("remote read " + p.txn.qualified() + " -> " +
                                     step.source.name() + " violates the topology");
            }
            if (!valid_item_name(step.item)) throw ParseError("bad item name '" + step.item + "'");
        }
    }
    for (const auto& m : malicious) {
        auto it = std::find_if(programs.begin(), programs.end(),
                               [&](const auto& p) { return p.txn == m; });
        if (it == programs.end())
            throw ParseError("malicious transaction " + m.qualified() + " has no program");
        if (!it->commits)
            throw ParseError("malicious transaction " + m.qualified() + " must commit");
    }
}

namespace {

struct NodeExec {
    std::map<std::string, Value> db;
    TransactionLog log;
    int seq = 0;
    std::set<int> used_numbers;      // numbers seen so far (programs + access txns)
    std::set<int> declared_numbers;  // every program number on this node

    int allocate_access_number() {
        int n = 1;
        while (used_numbers.count(n) || declared_numbers.count(n)) ++n;
        used_numbers.insert(n);
        return n;
    }
    void append(const TxnId& txn, std::optional<FogId> origin, Operation op) {
        log.records.push_back({seq++, txn, std::move(origin), std::move(op)});
    }
};

ExecutionResult execute(const Scenario& scenario, bool suppress_malicious) {
    scenario.validate();
    ExecutionResult result;

    std::map<std::string, NodeExec> nodes;
    for (const auto& [id, kind] : scenario.topology.nodes) {
        (void)kind;
        auto& n = nodes[id.name()];
        n.log.node = id;
        auto it = scenario.initial.find(id.name());
        if (it != scenario.initial.end()) n.db = it->second;
    }
    for (const auto& p : scenario.programs)
        nodes.at(p.txn.fog.name()).declared_numbers.insert(p.txn.number);

    for (const auto& p : scenario.programs) {
        auto& home = nodes.at(p.txn.fog.name());
        home.used_numbers.insert(p.txn.number);
        bool mal = scenario.is_malicious(p.txn);
        bool suppress = mal && suppress_malicious;

        std::map<std::string, Value> overlay;  // own uncommitted writes
        std::vector<Value> reads_so_far;
        std::optional<Value> last_read;
        std::map<std::string, Value> read_by_item;
        auto& rules = result.write_rules[p.txn.fog.name()][p.txn.number];

        for (const auto& step : p.steps) {
            switch (step.kind) {
                case ProgramStep::Kind::read_local: {
                    auto ov = overlay.find(step.item);
                    Value v;
                    if (ov != overlay.end()) {
                        v = ov->second;
                    } else {
                        auto it = home.db.find(step.item);
                        if (it == home.db.end())
                            throw PreconditionError("read of undefined item " + step.item +
                                                    " on " + p.txn.fog.name());
                        v = it->second;
                    }
                    home.append(p.txn, std::nullopt,
                                Operation::read(ItemRef::local(step.item), v));
                    reads_so_far.push_back(v);
                    last_read = v;
                    read_by_item[step.item] = v;
                    break;
                }
                case ProgramStep::Kind::read_remote: {
                    auto& src = nodes.at(step.source.name());
                    auto it = src.db.find(step.item);
                    if (it == src.db.end())
                        throw PreconditionError("read of undefined item " + step.item + " on " +
                                                step.source.name());
                    Value v = it->second;
                    // The source logs an origin-tagged access transaction; the
                    // reader logs the qualified item.
                    int access = src.allocate_access_number();
                    TxnId access_txn{step.source, access};
                    src.append(access_txn, p.txn.fog,
                               Operation::read(ItemRef::local(step.item), v));
                    src.append(access_txn, std::nullopt, Operation::commit());
                    home.append(p.txn, std::nullopt,
                                Operation::read(
                                    ItemRef::remote_ref(step.source, access, step.item), v));
                    reads_so_far.push_back(v);
                    last_read = v;
                    break;
                }
                case ProgramStep::Kind::write: {
                    Value before;
                    auto ov = overlay.find(step.item);
                    if (ov != overlay.end()) {
                        before = ov->second;
                    } else {
                        auto it = home.db.find(step.item);
                        if (it == home.db.end())
                            throw PreconditionError("write of undefined item " + step.item +
                                                    " on " + p.txn.fog.name());
                        before = it->second;
                    }
                    Value honest =
                        apply_recompute(step.rule, reads_so_far, last_read, read_by_item);
                    Value after = honest;
                    if (mal) {
                        auto f = p.forged.find(step.item);
                        if (f != p.forged.end()) after = f->second;
                    }
                    home.append(p.txn, std::nullopt,
                                Operation::write(ItemRef::local(step.item), before, after));
                    rules.push_back(step.rule);
                    if (!suppress) overlay[step.item] = after;
                    break;
                }
            }
        }

        if (p.commits) {
            for (const auto& [item, v] : overlay) home.db[item] = v;
            home.append(p.txn, std::nullopt, Operation::commit());
        } else {
            home.append(p.txn, std::nullopt, Operation::abort());
        }
    }

    for (auto& [name, n] : nodes) {
        result.final_db[name] = n.db;
        result.logs[name] = std::move(n.log);
    }
    return result;
}

}  // namespace

ExecutionResult build_logs(const Scenario& scenario) { return execute(scenario, false); }

GroundTruth oracle_replay(const Scenario& scenario) {
    return execute(scenario, true).final_db;
}

StateDiff compare_states(const GroundTruth& expected, const GroundTruth& actual) {
    auto domain = [](const GroundTruth& g) {
        std::set<std::pair<std::string, std::string>> d;
        for (const auto& [node, items] : g)
            for (const auto& [item, v] : items) {
                (void)v;
                d.insert({node, item});
            }
        return d;
    };
    if (domain(expected) != domain(actual))
        throw PreconditionError("state domains differ; cannot diff");

    StateDiff diff;
    for (const auto& [node, items] : expected)
        for (const auto& [item, v] : items) {
            Value a = actual.at(node).at(item);
            if (a != v) diff.entries.push_back({node, item, v, a});
        }
    return diff;
}

std::string StateDiff::to_text() const {
    std::ostringstream out;
    for (const auto& e : entries)
        out << e.node << '.' << e.item << ": expected " << e.expected << ", actual " << e.actual
            << '\n';
    return out.str();
}

Scenario generate_random(std::uint64_t seed, const GenParams& params) {
    if (params.nodes < 1 || params.items_per_node < 1 || params.txns < 0 ||
        params.malicious < 0 || params.malicious > params.txns ||
        params.cross_prob < 0.0 || params.cross_prob > 1.0 || params.abort_prob < 0.0 ||
        params.abort_prob > 1.0)
        throw ParseError("infeasible generator parameters");
    if (params.cross_prob > 0.0 && params.nodes < 2)
        throw ParseError("cross-fog reads require at least two nodes");

    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    auto chance = [&](double p) { return static_cast<double>(rng() % 10000) < p * 10000.0; };

    Scenario s;
    s.seed = seed;
    s.policy = DeliveryPolicy::fifo;

    for (int i = 1; i <= params.nodes; ++i) {
        FogId id{std::to_string(i)};
        FogKind kind = (i % 2 == 1) ? FogKind::public_fog : FogKind::utility_fog;
        s.topology.nodes.emplace_back(id, kind);
    }
    for (const auto& [a, ka] : s.topology.nodes)
        for (const auto& [b, kb] : s.topology.nodes)
            if (a.label < b.label && ka != kb) s.topology.edges.emplace_back(a, b);

    for (const auto& [id, kind] : s.topology.nodes) {
        (void)kind;
        auto& items = s.initial[id.name()];
        for (int i = 1; i <= params.items_per_node; ++i)
            items["X" + std::to_string(i)] = static_cast<Value>(1 + pick(9));
    }

    auto random_item = [&] { return "X" + std::to_string(1 + pick(params.items_per_node)); };
    auto opposite_node = [&](const FogId& home) -> std::optional<FogId> {
        std::vector<FogId> candidates;
        for (const auto& [id, kind] : s.topology.nodes)
            if (kind != s.topology.kind_of(home)) candidates.push_back(id);
        if (candidates.empty()) return std::nullopt;
        return candidates[pick(candidates.size())];
    };

    for (int t = 1; t <= params.txns; ++t) {
        TransactionProgram p;
        p.txn = {s.topology.nodes[pick(s.topology.nodes.size())].first, t};
        p.commits = !chance(params.abort_prob);

        std::size_t nreads = 1 + pick(3);
        std::vector<std::string> local_reads;
        for (std::size_t i = 0; i < nreads; ++i) {
            if (chance(params.cross_prob)) {
                if (auto src = opposite_node(p.txn.fog)) {
                    p.steps.push_back({ProgramStep::Kind::read_remote, random_item(), *src, {}});
                    continue;
                }
            }
            std::string item = random_item();
            local_reads.push_back(item);
            p.steps.push_back({ProgramStep::Kind::read_local, item, {}, {}});
        }

        std::size_t nwrites = chance(0.85) ? 1 + pick(2) : 0;
        for (std::size_t i = 0; i < nwrites; ++i) {
            ProgramStep w{ProgramStep::Kind::write, random_item(), {}, {}};
            // Insert at a random position; rules that need reads go after one.
            std::size_t pos = pick(p.steps.size() + 1);
            std::size_t reads_before = 0;
            std::vector<std::string> locals_before;
            for (std::size_t j = 0; j < pos; ++j) {
                if (p.steps[j].kind != ProgramStep::Kind::write) {
                    ++reads_before;
                    if (p.steps[j].kind == ProgramStep::Kind::read_local)
                        locals_before.push_back(p.steps[j].item);
                }
            }
            switch (pick(10)) {
                case 0: case 1:
                    w.rule = RecomputeRule::const_value(static_cast<Value>(pick(20)));
                    break;
                case 2:
                    if (reads_before > 0) w.rule = RecomputeRule::last_read();
                    break;
                case 3:
                    if (!locals_before.empty())
                        w.rule = RecomputeRule::identity_of(locals_before[pick(locals_before.size())]);
                    break;
                default:
                    break;  // sum of reads so far
            }
            p.steps.insert(p.steps.begin() + static_cast<std::ptrdiff_t>(pos), w);
        }
        s.programs.push_back(std::move(p));
    }

    // Malicious choices must commit and write at least one item.
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < s.programs.size(); ++i) {
        const auto& p = s.programs[i];
        bool writes = std::any_of(p.steps.begin(), p.steps.end(), [](const auto& st) {
            return st.kind == ProgramStep::Kind::write;
        });
        if (p.commits && writes) candidates.push_back(i);
    }
    int want = params.malicious;
    for (std::size_t i = 0; i < s.programs.size() && static_cast<int>(candidates.size()) < want;
         ++i) {
        auto& p = s.programs[i];
        if (std::find(candidates.begin(), candidates.end(), i) != candidates.end()) continue;
        p.commits = true;
        if (!std::any_of(p.steps.begin(), p.steps.end(), [](const auto& st) {
                return st.kind == ProgramStep::Kind::write;
            }))
            p.steps.push_back({ProgramStep::Kind::write, random_item(), {}, {}});
        candidates.push_back(i);
    }
    for (int i = 0; i < want && !candidates.empty(); ++i) {
        std::size_t c = pick(candidates.size());
        auto& p = s.programs[candidates[c]];
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(c));
        s.malicious.push_back(p.txn);
        for (const auto& st : p.steps)
            if (st.kind == ProgramStep::Kind::write)
                p.forged[st.item] = static_cast<Value>(100 + pick(900));
    }

    s.validate();
    return s;
}

// --- JSON ---

json to_json(const Scenario& s) {
    json nodes = json::array();
    for (const auto& [id, kind] : s.topology.nodes)
        nodes.push_back({{"id", id.name()},
                         {"kind", kind == FogKind::public_fog ? "public" : "utility"}});
    json edges = json::array();
    for (const auto& [a, b] : s.topology.edges) edges.push_back({a.name(), b.name()});

    json programs = json::array();
    for (const auto& p : s.programs) {
        json steps = json::array();
        for (const auto& st : p.steps) {
            switch (st.kind) {
                case ProgramStep::Kind::read_local:
                    steps.push_back({{"read", st.item}});
                    break;
                case ProgramStep::Kind::read_remote:
                    steps.push_back({{"read_remote", st.source.name() + "." + st.item}});
                    break;
                case ProgramStep::Kind::write: {
                    json rule;
                    switch (st.rule.kind) {
                        case RecomputeRule::Kind::sum_of_reads: rule = "sum"; break;
                        case RecomputeRule::Kind::constant:
                            rule = json{{"const", st.rule.constant}};
                            break;
                        case RecomputeRule::Kind::last_read: rule = "last_read"; break;
                        case RecomputeRule::Kind::identity_of:
                            rule = json{{"identity_of", st.rule.ref_item}};
                            break;
                    }
                    steps.push_back({{"write", st.item}, {"rule", rule}});
                    break;
                }
            }
        }
        json prog = {{"txn", p.txn.qualified()}, {"steps", steps}, {"commit", p.commits}};
        if (!p.forged.empty()) {
            json forged = json::object();
            for (const auto& [item, v] : p.forged) forged[item] = v;
            prog["forged"] = forged;
        }
        programs.push_back(std::move(prog));
    }

    json malicious = json::array();
    for (const auto& m : s.malicious) malicious.push_back(m.qualified());

    json initial = json::object();
    for (const auto& [node, items] : s.initial) {
        json m = json::object();
        for (const auto& [item, v] : items) m[item] = v;
        initial[node] = std::move(m);
    }

    return {{"nodes", nodes},       {"edges", edges},   {"initial", initial},
            {"programs", programs}, {"malicious", malicious},
            {"policy", to_string(s.policy)}, {"seed", s.seed}};
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    for (const auto& n : j.at("nodes")) {
        FogId id = FogId::parse(n.at("id").get<std::string>());
        std::string kind = n.at("kind").get<std::string>();
        if (kind != "public" && kind != "utility")
            throw ParseError("node kind must be 'public' or 'utility'");
        s.topology.nodes.emplace_back(
            id, kind == "public" ? FogKind::public_fog : FogKind::utility_fog);
    }
    for (const auto& e : j.at("edges"))
        s.topology.edges.emplace_back(FogId::parse(e.at(0).get<std::string>()),
                                      FogId::parse(e.at(1).get<std::string>()));
    for (const auto& [node, items] : j.at("initial").items())
        for (const auto& [item, v] : items.items())
            s.initial[node][item] = v.get<Value>();

    for (const auto& pj : j.at("programs")) {
        TransactionProgram p;
        p.txn = txn_from_string(pj.at("txn").get<std::string>(), FogId{"?"});
        for (const auto& stj : pj.at("steps")) {
            ProgramStep st;
            if (stj.contains("read")) {
                st.kind = ProgramStep::Kind::read_local;
                st.item = stj.at("read").get<std::string>();
            } else if (stj.contains("read_remote")) {
                st.kind = ProgramStep::Kind::read_remote;
                std::string ref = stj.at("read_remote").get<std::string>();
                auto dot = ref.find('.');
                if (dot == std::string::npos)
                    throw ParseError("read_remote must be '<fog>.<item>': " + ref);
                st.source = FogId::parse(ref.substr(0, dot));
                st.item = ref.substr(dot + 1);
            } else if (stj.contains("write")) {
                st.kind = ProgramStep::Kind::write;
                st.item = stj.at("write").get<std::string>();
                if (stj.contains("rule")) {
                    const auto& r = stj.at("rule");
                    if (r.is_string()) {
                        std::string rs = r.get<std::string>();
                        if (rs == "sum")
                            st.rule = RecomputeRule::sum();
                        else if (rs == "last_read")
                            st.rule = RecomputeRule::last_read();
                        else
                            throw ParseError("unknown rule '" + rs + "'");
                    } else if (r.contains("const")) {
                        st.rule = RecomputeRule::const_value(r.at("const").get<Value>());
                    } else if (r.contains("identity_of")) {
                        st.rule =
                            RecomputeRule::identity_of(r.at("identity_of").get<std::string>());
                    } else {
                        throw ParseError("unknown rule: " + r.dump());
                    }
                }
            } else {
                throw ParseError("program step must be read/read_remote/write: " + stj.dump());
            }
            p.steps.push_back(std::move(st));
        }
        p.commits = pj.value("commit", true);
        if (pj.contains("forged"))
            for (const auto& [item, v] : pj.at("forged").items()) p.forged[item] = v.get<Value>();
        s.programs.push_back(std::move(p));
    }
    for (const auto& m : j.at("malicious"))
        s.malicious.push_back(txn_from_string(m.get<std::string>(), FogId{"?"}));
    s.policy = delivery_policy_from_string(j.value("policy", "fifo"));
    s.seed = j.value("seed", std::uint64_t{0});
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid scenario JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

void save_scenario(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write scenario file " + path);
    out << to_json(scenario).dump(2) << '\n';
}

}  // namespace fogrec
