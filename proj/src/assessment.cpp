#include "fogrec/assessment.hpp"

#include <algorithm>

namespace fogrec {

namespace {

struct PendingRow {
    DamageAuditRow row;
    bool started = false;
    bool has_invalid = false;
    // Damage-set deltas, applied at commit and discarded at abort.
    std::vector<std::pair<bool, std::string>> deltas;  // (add, item)
    // Outgoing DIT entries (target fog name, item), emitted at commit.
    std::vector<std::pair<FogId, std::string>> exports;
};

void add_invalid(DamageAuditRow& row, const ItemRef& item) {
    auto it = std::lower_bound(row.invalid_read.begin(), row.invalid_read.end(), item);
    if (it == row.invalid_read.end() || *it != item) row.invalid_read.insert(it, item);
}

}  // namespace

AssessmentOutput assess(const TransactionLog& log, const AssessmentSeeds& seeds) {
    AssessmentOutput out;
    out.damage_table.target = log.node;

    // Preconditions.
    for (const auto& m : seeds.malicious) {
        bool seen = false, committed = false;
        for (const auto& rec : log.records) {
            if (rec.txn.number != m.number || rec.origin) continue;
            seen = true;
            if (rec.op.kind == Operation::Kind::commit) committed = true;
        }
        if (!seen)
            throw PreconditionError("malicious transaction " + m.local_name() +
                                    " is absent from the log of " + log.node.name());
        if (!committed)
            throw PreconditionError("malicious transaction " + m.local_name() +
                                    " never committed on " + log.node.name());
    }

    auto matches_seed = [&](const ItemRef& ref) {
        if (!ref.is_remote()) return false;
        return std::any_of(seeds.incoming.begin(), seeds.incoming.end(),
                           [&](const DamageItemRow& r) {
                               return r.txn.fog == ref.remote->first &&
                                      r.txn.number == ref.remote->second && r.item == ref.item;
                           });
    };
    for (const auto& r : seeds.incoming) {
        if (!r.marked_affected) continue;
        bool seen = std::any_of(log.records.begin(), log.records.end(), [&](const LogRecord& rec) {
            return rec.op.kind == Operation::Kind::read && matches_seed(rec.op.item);
        });
        if (!seen)
            throw PreconditionError("damage item table references " + r.txn.qualified() + "." +
                                    r.item + ", which no read of " + log.node.name() +
                                    "'s log mentions");
    }

    // Seed the damage table with the upstream entries, in arrival order.
    for (const auto& r : seeds.incoming)
        if (!out.damage_table.contains(r.txn, r.item)) out.damage_table.rows.push_back(r);

    std::set<int> malicious_numbers;
    for (const auto& m : seeds.malicious) malicious_numbers.insert(m.number);

    // First record involved in the incident.
    int first = -1;
    for (const auto& rec : log.records) {
        bool hit = (!rec.origin && malicious_numbers.count(rec.txn.number)) ||
                   (rec.op.kind == Operation::Kind::read && matches_seed(rec.op.item));
        if (hit) {
            first = rec.seq;
            break;
        }
    }
    out.first_trigger_seq = first;
    if (first < 0) return out;

    std::set<std::string> damaged;  // committed local damage (the DI_L)
    std::map<int, PendingRow> pending;

    auto pending_adds = [&](const PendingRow& p, const std::string& item) {
        return std::any_of(p.deltas.begin(), p.deltas.end(),
                           [&](const auto& d) { return d.first && d.second == item; });
    };

    auto finalize = [&](PendingRow& p, bool committed) {
        if (!committed) return;  // aborted transactions leave no trace
        for (const auto& [add, item] : p.deltas) {
            if (add) {
                if (damaged.insert(item).second)
                    out.damage_table.rows.push_back({{log.node, p.row.txn.number}, item, false});
            } else {
                damaged.erase(item);
                auto& rows = out.damage_table.rows;
                rows.erase(std::remove_if(rows.begin(), rows.end(),
                                          [&](const DamageItemRow& r) {
                                              return r.txn.fog == log.node && r.item == item;
                                          }),
                           rows.end());
            }
        }
        for (const auto& [fog, item] : p.exports) {
            auto& dit = out.outgoing[fog.name()];
            dit.target = fog;
            TxnId qualified{log.node, p.row.txn.number};
            if (!dit.contains(qualified, item))
                dit.rows.push_back({qualified, item, true});
        }

        bool keep = false;
        switch (p.row.kind) {
            case DamageAuditRow::Kind::malicious: keep = true; break;
            case DamageAuditRow::Kind::remote_read: keep = !p.row.fog_ids.empty(); break;
            default:
                // Read-only victims propagate no damage; drop them.
                keep = !p.row.data_written.empty();
                break;
        }
        if (keep) {
            out.da_table.push_back(std::move(p.row));
            out.damaged_timeline.push_back(damaged);
        }
    };

    // The whole log is scanned: transactions that finished before the first
    // trigger have nothing damaged to read and no recorded writes, so they
    // drop out, but one still active at the trigger keeps its earlier reads.
    for (const auto& rec : log.records) {
        int n = rec.txn.number;

        if (rec.origin) {
            // Access read issued by another fog against this node's data.
            if (rec.op.kind != Operation::Kind::read) continue;
            if (!damaged.count(rec.op.item.item)) continue;
            auto& p = pending[n];
            if (!p.started) {
                p.started = true;
                p.row.txn = rec.txn;
                p.row.kind = DamageAuditRow::Kind::remote_read;
            }
            add_invalid(p.row, rec.op.item);
            if (std::find(p.row.fog_ids.begin(), p.row.fog_ids.end(), *rec.origin) ==
                p.row.fog_ids.end())
                p.row.fog_ids.push_back(*rec.origin);
            p.exports.emplace_back(*rec.origin, rec.op.item.item);
            continue;
        }

        bool is_malicious = malicious_numbers.count(n) > 0;

        switch (rec.op.kind) {
            case Operation::Kind::commit:
            case Operation::Kind::abort: {
                auto it = pending.find(n);
                if (it != pending.end()) {
                    finalize(it->second, rec.op.kind == Operation::Kind::commit);
                    pending.erase(it);
                } else if (is_malicious && rec.op.kind == Operation::Kind::commit) {
                    // A malicious transaction gets a row even with no operations.
                    PendingRow p;
                    p.row.txn = rec.txn;
                    p.row.kind = DamageAuditRow::Kind::malicious;
                    finalize(p, true);
                }
                break;
            }
            case Operation::Kind::read: {
                if (is_malicious) break;  // only a malicious transaction's writes matter
                auto& p = pending[n];
                if (!p.started) {
                    p.started = true;
                    p.row.txn = rec.txn;
                    p.row.kind = DamageAuditRow::Kind::updating;
                }
                bool invalid = rec.op.item.is_remote() ? matches_seed(rec.op.item)
                                                       : damaged.count(rec.op.item.item) > 0;
                p.row.ops.push_back(RowOp::read(rec.op.item, rec.op.value, invalid));
                if (invalid) {
                    add_invalid(p.row, rec.op.item);
                    p.has_invalid = true;
                    if (rec.op.item.is_remote()) p.row.kind = DamageAuditRow::Kind::affected;
                } else {
                    p.row.valid_read.emplace_back(rec.op.item, rec.op.value);
                }
                break;
            }
            case Operation::Kind::write: {
                auto& p = pending[n];
                if (!p.started) {
                    p.started = true;
                    p.row.txn = rec.txn;
                    p.row.kind = is_malicious ? DamageAuditRow::Kind::malicious
                                              : DamageAuditRow::Kind::updating;
                }
                const std::string& item = rec.op.item.item;
                if (is_malicious) {
                    // Record the before-image as the pre-attack value, unless the
                    // item is already damaged (then the before-image is corrupt too).
                    bool clean_before = !damaged.count(item) && !pending_adds(p, item);
                    p.row.ops.push_back(
                        RowOp::write(rec.op.item, rec.op.before, clean_before, {}));
                    if (clean_before) p.row.data_written.emplace_back(rec.op.item, rec.op.before);
                    p.deltas.emplace_back(true, item);
                } else if (p.has_invalid) {
                    // Damage spreads: the write follows an invalid read.
                    p.row.ops.push_back(RowOp::write(rec.op.item, rec.op.after, true, {}));
                    p.row.data_written.emplace_back(rec.op.item, rec.op.after);
                    p.deltas.emplace_back(true, item);
                } else if (damaged.count(item)) {
                    // Blind-write refresh: a clean write restores the item.
                    p.row.ops.push_back(RowOp::write(rec.op.item, rec.op.after, true, {}));
                    p.row.data_written.emplace_back(rec.op.item, rec.op.after);
                    p.deltas.emplace_back(false, item);
                } else {
                    p.row.ops.push_back(RowOp::write(rec.op.item, rec.op.after, false, {}));
                }
                break;
            }
        }
    }

    out.damaged = damaged;
    return out;
}

AssessmentOutput assess_primary(const TransactionLog& log, const MaliciousList& mt_l) {
    if (mt_l.target != log.node)
        throw PreconditionError("malicious list targets " + mt_l.target.name() + ", log is " +
                                log.node.name());
    AssessmentSeeds seeds;
    seeds.malicious = mt_l.txns;
    return assess(log, seeds);
}

AssessmentOutput assess_secondary(const TransactionLog& log, const DamageItemTable& incoming) {
    if (incoming.target != log.node)
        throw PreconditionError("damage item table targets " + incoming.target.name() +
                                ", log is " + log.node.name());
    AssessmentSeeds seeds;
    seeds.incoming = incoming.rows;
    for (auto& r : seeds.incoming) r.marked_affected = true;
    return assess(log, seeds);
}

}  // namespace fogrec
