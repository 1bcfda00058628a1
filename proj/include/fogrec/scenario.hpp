#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fogrec/log_model.hpp"
#include "fogrec/tables.hpp"

namespace fogrec {

enum class DeliveryPolicy { fifo, round_robin, seeded_random };

DeliveryPolicy delivery_policy_from_string(const std::string& s);
std::string to_string(DeliveryPolicy p);

/// Allowed cross-fog read topology: public nodes pair with utility nodes.
struct Topology {
    std::vector<std::pair<FogId, FogKind>> nodes;
    std::vector<std::pair<FogId, FogId>> edges;  // unordered pairs

    bool has_node(const FogId& id) const;
    FogKind kind_of(const FogId& id) const;
    bool allows(const FogId& reader, const FogId& source) const;
    void validate() const;  // throws ParseError on structural violations
};

struct ProgramStep {
    enum class Kind { read_local, read_remote, write };

    Kind kind = Kind::read_local;
    std::string item;
    FogId source;        // read_remote
    RecomputeRule rule;  // write
};

struct TransactionProgram {
    TxnId txn;
    std::vector<ProgramStep> steps;
    bool commits = true;
    // Forged after-images written instead of the honest value when the
    // transaction is in the scenario's malicious set.
    std::map<std::string, Value> forged;
};

/// Per-node final database states; the oracle's ground truth shape.
using GroundTruth = std::map<std::string, std::map<std::string, Value>>;

struct Scenario {
    Topology topology;
    GroundTruth initial;  // per-node item -> value
    std::vector<TransactionProgram> programs;  // global serialization order
    std::vector<TxnId> malicious;
    DeliveryPolicy policy = DeliveryPolicy::fifo;
    std::uint64_t seed = 0;

    bool is_malicious(const TxnId& txn) const;
    void validate() const;
};

struct ExecutionResult {
    std::map<std::string, TransactionLog> logs;  // keyed by fog name
    GroundTruth final_db;
    /// Per-write recompute rules in step order, keyed by fog name then txn
    /// number; used to annotate audit rows before recovery.
    std::map<std::string, std::map<int, std::vector<RecomputeRule>>> write_rules;
};

/// Executes the programs in order against live per-node state, recording
/// remote reads in both logs (origin-tagged on the source node, qualified
/// item on the reader). The resulting logs validate with zero warnings.
ExecutionResult build_logs(const Scenario& scenario);

/// Attacker-nullified replay: malicious writes are suppressed and every
/// clean transaction recomputes from the values it now reads. Defines the
/// consistent state recovery must restore.
GroundTruth oracle_replay(const Scenario& scenario);

struct GenParams {
    int nodes = 3;
    int items_per_node = 8;
    int txns = 40;
    int malicious = 2;
    double cross_prob = 0.2;
    double abort_prob = 0.05;
};

/// Deterministic in seed; the result satisfies all Scenario invariants.
Scenario generate_random(std::uint64_t seed, const GenParams& params);

struct StateDiff {
    struct Entry {
        std::string node, item;
        Value expected, actual;
    };
    std::vector<Entry> entries;
    bool empty() const { return entries.empty(); }
    std::string to_text() const;
};

/// Exact per-node, per-item comparison. Throws PreconditionError when the
/// two states cover different domains.
StateDiff compare_states(const GroundTruth& expected, const GroundTruth& actual);

nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

}  // namespace fogrec
