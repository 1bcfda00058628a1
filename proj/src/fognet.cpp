#include "fogrec/fognet.hpp"

#include <algorithm>
#include <sstream>

namespace fogrec {

namespace {

std::string set_text(const std::set<std::string>& items) {
    std::string out = "{";
    bool first = true;
    for (const auto& i : items) {
        if (!first) out += ", ";
        out += i;
        first = false;
    }
    return out + "}";
}

}  // namespace

std::string CascadeTrace::to_text() const {
    std::ostringstream out;
    for (const auto& e : events) {
        out << e.seq << ' ' << e.node << " <- " << e.kind << " from " << e.sender;
        if (!e.newly_blocked.empty()) out << "; +blocked " << set_text(e.newly_blocked);
        for (const auto& [target, n] : e.damage_sent)
            out << "; damage -> " << target << " (" << n << ")";
        for (const auto& [target, n] : e.valid_sent)
            out << "; valid -> " << target << " (" << n << ")";
        if (!e.patches.empty()) {
            out << "; patched {";
            bool first = true;
            for (const auto& [item, v] : e.patches) {
                if (!first) out << ", ";
                out << item << "=" << v;
                first = false;
            }
            out << "}";
        }
        if (!e.unblocked.empty()) out << "; unblocked " << set_text(e.unblocked);
        out << "; blocked " << set_text(e.blocked_after) << '\n';
    }
    return out.str();
}

Network::Network(DeliveryPolicy policy, std::uint64_t seed) : policy_(policy), rng_(seed) {}

Network Network::from_scenario(const Scenario& scenario, const ExecutionResult& exec) {
    Network net(scenario.policy, scenario.seed);
    for (const auto& [id, kind] : scenario.topology.nodes) {
        FogNode n;
        n.id = id;
        n.node_kind = kind;
        if (auto it = exec.logs.find(id.name()); it != exec.logs.end())
            n.log = it->second;
        else
            n.log.node = id;
        if (auto it = exec.final_db.find(id.name()); it != exec.final_db.end()) n.db = it->second;
        if (auto it = scenario.initial.find(id.name()); it != scenario.initial.end())
            n.baseline = it->second;
        if (auto it = exec.write_rules.find(id.name()); it != exec.write_rules.end())
            n.rules = it->second;
        net.add_node(std::move(n));
    }
    return net;
}

void Network::add_node(FogNode node) {
    if (has_node(node.id))
        throw PreconditionError("duplicate fog node " + node.id.name());
    nodes_.push_back(std::move(node));
    std::sort(nodes_.begin(), nodes_.end(),
              [](const FogNode& a, const FogNode& b) { return a.id < b.id; });
}

bool Network::has_node(const FogId& id) const {
    return std::any_of(nodes_.begin(), nodes_.end(),
                       [&](const FogNode& n) { return n.id == id; });
}

const FogNode& Network::node(const FogId& id) const {
    return const_cast<Network*>(this)->node_mut(id);
}

FogNode& Network::node_mut(const FogId& id) {
    for (auto& n : nodes_)
        if (n.id == id) return n;
    throw PreconditionError("unknown fog node " + id.name());
}

void Network::inject_alert(const FogId& target, const MaliciousList& mt_l) {
    FogNode& n = node_mut(target);
    if (mt_l.txns.empty()) throw PreconditionError("malicious list is empty");
    for (const auto& t : mt_l.txns) {
        bool seen = std::any_of(n.log.records.begin(), n.log.records.end(),
                                [&](const LogRecord& rec) {
                                    return !rec.origin && rec.txn.number == t.number;
                                });
        if (!seen)
            throw PreconditionError("transaction " + t.local_name() + " is absent from " +
                                    target.name() + "'s log");
    }
    Message msg;
    msg.kind = Message::Kind::alert;
    msg.sender = target;
    msg.receiver = target;
    msg.alert = mt_l;
    post(std::move(msg));
}

void Network::post(Message msg) {
    msg.delivery_seq = next_seq_++;
    queue_.push_back(std::move(msg));
}

std::size_t Network::pick_next() {
    auto lowest_for = [&](const FogId& receiver) -> std::ptrdiff_t {
        std::ptrdiff_t best = -1;
        for (std::size_t i = 0; i < queue_.size(); ++i)
            if (queue_[i].receiver == receiver &&
                (best < 0 || queue_[i].delivery_seq < queue_[best].delivery_seq))
                best = static_cast<std::ptrdiff_t>(i);
        return best;
    };

    switch (policy_) {
        case DeliveryPolicy::fifo: {
            std::size_t best = 0;
            for (std::size_t i = 1; i < queue_.size(); ++i)
                if (queue_[i].delivery_seq < queue_[best].delivery_seq) best = i;
            return best;
        }
        case DeliveryPolicy::round_robin: {
            // Cycle over nodes in id order; deliver per-receiver FIFO.
            for (std::size_t step = 0; step < nodes_.size(); ++step) {
                const FogId& id = nodes_[(rr_cursor_ + step) % nodes_.size()].id;
                auto i = lowest_for(id);
                if (i >= 0) {
                    rr_cursor_ = (rr_cursor_ + step + 1) % nodes_.size();
                    return static_cast<std::size_t>(i);
                }
            }
            return 0;  // unreachable: queue_ is non-empty
        }
        case DeliveryPolicy::seeded_random: {
            std::set<std::string> pending;
            for (const auto& m : queue_) pending.insert(m.receiver.label);
            auto it = pending.begin();
            std::advance(it, static_cast<std::ptrdiff_t>(rng_() % pending.size()));
            return static_cast<std::size_t>(lowest_for(FogId{*it}));
        }
    }
    return 0;
}

CascadeEvent Network::process(const Message& msg) {
    FogNode& n = node_mut(msg.receiver);
    CascadeEvent event;
    event.seq = msg.delivery_seq;
    event.node = n.id.name();
    event.sender = msg.sender.name();

    switch (msg.kind) {
        case Message::Kind::alert: {
            event.kind = "alert";
            for (const auto& t : msg.alert.txns) {
                TxnId local{n.id, t.number};
                if (std::find(n.malicious_seeds.begin(), n.malicious_seeds.end(), local) ==
                    n.malicious_seeds.end())
                    n.malicious_seeds.push_back(local);
            }
            break;
        }
        case Message::Kind::damage: {
            event.kind = "damage";
            if (msg.damage.target != n.id)
                throw ProtocolError("damage table for " + msg.damage.target.name() +
                                    " delivered to " + n.id.name());
            for (const auto& r : msg.damage.rows) {
                bool known = std::any_of(
                    n.dit_seeds.begin(), n.dit_seeds.end(), [&](const DamageItemRow& s) {
                        return s.txn == r.txn && s.item == r.item;
                    });
                if (!known) n.dit_seeds.push_back({r.txn, r.item, true});
            }
            break;
        }
        case Message::Kind::valid: {
            event.kind = "valid";
            if (msg.valid.target != n.id)
                throw ProtocolError("valid items table for " + msg.valid.target.name() +
                                    " delivered to " + n.id.name());
            for (const auto& r : msg.valid.rows) {
                bool known = std::any_of(
                    n.dit_seeds.begin(), n.dit_seeds.end(), [&](const DamageItemRow& s) {
                        return s.txn == r.txn && s.item == r.item;
                    });
                if (!known)
                    throw ProtocolError("valid value for " + r.txn.qualified() + "." + r.item +
                                        " arrived at " + n.id.name() +
                                        " without the matching damage table");
                bool replaced = false;
                for (auto& v : n.vit_in)
                    if (v.txn == r.txn && v.item == r.item) {
                        v.value = r.value;
                        replaced = true;
                    }
                if (!replaced) n.vit_in.push_back(r);
            }
            break;
        }
    }

    // One full pass from the accumulated seeds. Assessment is monotone in
    // its seeds, so recomputing from scratch is safe and keeps each pass
    // independent of delivery order.
    AssessmentSeeds seeds;
    seeds.malicious = n.malicious_seeds;
    seeds.incoming = n.dit_seeds;
    AssessmentOutput a = assess(n.log, seeds);

    for (auto& row : a.da_table) {
        auto it = n.rules.find(row.txn.number);
        if (it == n.rules.end()) continue;
        std::size_t wi = 0;
        for (auto& op : row.ops)
            if (op.kind == RowOp::Kind::write) {
                if (wi < it->second.size()) op.rule = it->second[wi];
                ++wi;
            }
    }

    // Damage travels before corrected values: queue the new rows now.
    for (const auto& [target, dit] : a.outgoing) {
        auto& sent = n.dit_sent[target];
        DamageItemTable fresh;
        fresh.target = dit.target;
        for (const auto& row : dit.rows)
            if (sent.insert({row.txn.qualified(), row.item}).second) fresh.rows.push_back(row);
        if (fresh.rows.empty()) continue;
        event.damage_sent[target] = static_cast<int>(fresh.rows.size());
        Message out;
        out.kind = Message::Kind::damage;
        out.sender = n.id;
        out.receiver = dit.target;
        out.damage = std::move(fresh);
        post(std::move(out));
    }

    std::set<std::string> before = n.blocked;
    n.blocked = a.damaged;

    RecoveryInput input;
    input.damaged = a.damaged;
    input.fallback = n.baseline;
    input.vit_in = n.vit_in;
    input.allow_partial = true;
    RecoveryOutput r = recover(a.da_table, input);

    for (const auto& [target, vit] : r.outgoing) {
        auto& sent = n.vit_sent[target];
        ValidItemsTable fresh;
        fresh.target = vit.target;
        for (const auto& row : vit.rows) {
            auto key = std::make_pair(row.txn.qualified(), row.item);
            auto it = sent.find(key);
            if (it != sent.end() && it->second == row.value) continue;
            sent[key] = row.value;
            fresh.rows.push_back(row);
        }
        if (fresh.rows.empty()) continue;
        event.valid_sent[target] = static_cast<int>(fresh.rows.size());
        Message out;
        out.kind = Message::Kind::valid;
        out.sender = n.id;
        out.receiver = vit.target;
        out.valid = std::move(fresh);
        post(std::move(out));
    }

    if (r.rows_recovered == r.recovered.size()) {
        for (const auto& [item, v] : r.patches) n.db[item] = v;
        event.patches = r.patches;
        n.blocked = r.still_blocked;
    }

    for (const auto& i : a.damaged)
        if (!before.count(i)) event.newly_blocked.insert(i);
    for (const auto& i : before)
        if (!n.blocked.count(i)) event.unblocked.insert(i);
    for (const auto& i : a.damaged)
        if (!n.blocked.count(i)) event.unblocked.insert(i);
    event.blocked_after = n.blocked;
    return event;
}

CascadeTrace Network::run_to_quiescence() {
    if (queue_.empty()) throw PreconditionError("no queued messages");
    CascadeTrace trace;
    // Seeds grow monotonically and sent-row caches dedupe traffic, so the
    // cascade is finite; the cap only guards against protocol bugs.
    std::size_t cap = 64 + 16 * nodes_.size() * nodes_.size() * 64;
    for (const auto& n : nodes_) cap += 4 * n.log.records.size();
    while (!queue_.empty()) {
        if (trace.events.size() > cap) throw ProtocolError("cascade did not quiesce");
        std::size_t i = pick_next();
        Message msg = std::move(queue_[i]);
        queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(i));
        trace.events.push_back(process(msg));
    }
    return trace;
}

const std::set<std::string>& Network::blocked_items(const FogId& id) const {
    return node(id).blocked;
}

const std::map<std::string, Value>& Network::final_state(const FogId& id) const {
    const FogNode& n = node(id);
    if (!quiescent() || !n.blocked.empty())
        throw PreconditionError("final state requested mid-cascade for " + id.name());
    return n.db;
}

GroundTruth Network::state_snapshot() const {
    GroundTruth g;
    for (const auto& n : nodes_) g[n.id.name()] = n.db;
    return g;
}

}  // namespace fogrec
