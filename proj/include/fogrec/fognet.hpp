#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fogrec/assessment.hpp"
#include "fogrec/recovery.hpp"
#include "fogrec/scenario.hpp"
#include "fogrec/tables.hpp"

namespace fogrec {

/// One queued delivery. Exactly one payload is meaningful per kind.
struct Message {
    enum class Kind { alert, damage, valid };

    Kind kind = Kind::alert;
    FogId sender;
    FogId receiver;
    int delivery_seq = 0;

    MaliciousList alert;
    DamageItemTable damage;
    ValidItemsTable valid;
};

struct CascadeEvent {
    int seq = 0;
    std::string node;    // receiver
    std::string kind;    // "alert" | "damage" | "valid"
    std::string sender;
    /// Damage found by this pass (relative to the previous blocked set).
    std::set<std::string> newly_blocked;
    /// Items released by this pass.
    std::set<std::string> unblocked;
    /// Blocked set once the pass finished.
    std::set<std::string> blocked_after;
    std::map<std::string, Value> patches;
    std::map<std::string, int> damage_sent;  // target fog -> rows
    std::map<std::string, int> valid_sent;   // target fog -> rows
};

struct CascadeTrace {
    std::vector<CascadeEvent> events;
    std::string to_text() const;
};

/// A fog node's state plus the protocol bookkeeping accumulated over the
/// cascade. Seeds only ever grow, which is what bounds the run.
struct FogNode {
    FogId id;
    FogKind node_kind = FogKind::public_fog;
    std::map<std::string, Value> db;        // current (post-attack) state
    std::map<std::string, Value> baseline;  // pre-incident values, scan fallback
    TransactionLog log;
    std::set<std::string> blocked;
    /// Per-transaction write recompute rules in write order, when known.
    std::map<int, std::vector<RecomputeRule>> rules;

    // Accumulated inputs: alerts, upstream damage rows, corrected values.
    std::vector<TxnId> malicious_seeds;
    std::vector<DamageItemRow> dit_seeds;
    std::vector<ValidItemRow> vit_in;

    // Already-sent rows, so each pass forwards only what is new. Corrected
    // values are re-sent when a later pass changes them.
    std::map<std::string, std::set<std::pair<std::string, std::string>>> dit_sent;
    std::map<std::string, std::map<std::pair<std::string, std::string>, Value>> vit_sent;
};

/// In-process network of fog nodes with a deterministic delivery order.
/// Every delivered message triggers a full assessment pass from the node's
/// accumulated seeds, forwards newly found damage, recovers the maximal
/// prefix allowed by the corrected values received so far, and patches the
/// database once the whole table recovers.
class Network {
  public:
    explicit Network(DeliveryPolicy policy = DeliveryPolicy::fifo, std::uint64_t seed = 0);

    /// Nodes from the topology, logs/state from an executed scenario.
    static Network from_scenario(const Scenario& scenario, const ExecutionResult& exec);

    void add_node(FogNode node);
    bool has_node(const FogId& id) const;
    const FogNode& node(const FogId& id) const;

    /// Queues an IDS alert; no processing happens until run_to_quiescence.
    void inject_alert(const FogId& node, const MaliciousList& mt_l);

    /// Queues an arbitrary message (tools and tests; inject_alert covers the
    /// normal entry point).
    void post(Message msg);

    /// Delivers queued messages under the policy until every inbox is empty.
    CascadeTrace run_to_quiescence();

    const std::set<std::string>& blocked_items(const FogId& id) const;

    /// The node's database after all patches. Only valid at quiescence with
    /// nothing blocked.
    const std::map<std::string, Value>& final_state(const FogId& id) const;

    /// Every node's current database, in GroundTruth shape.
    GroundTruth state_snapshot() const;

    bool quiescent() const { return queue_.empty(); }

  private:
    FogNode& node_mut(const FogId& id);
    std::size_t pick_next();
    CascadeEvent process(const Message& msg);

    std::vector<FogNode> nodes_;
    std::vector<Message> queue_;
    DeliveryPolicy policy_;
    std::mt19937_64 rng_;
    int next_seq_ = 0;
    std::size_t rr_cursor_ = 0;
};

}  // namespace fogrec
