#include "fogrec/recovery.hpp"

#include <algorithm>

namespace fogrec {

Value apply_recompute(const RecomputeRule& rule, const std::vector<Value>& reads_so_far,
                      const std::optional<Value>& last_read,
                      const std::map<std::string, Value>& read_by_item) {
    switch (rule.kind) {
        case RecomputeRule::Kind::sum_of_reads: {
            Value sum = 0;
            for (Value v : reads_so_far) sum += v;
            return sum;
        }
        case RecomputeRule::Kind::constant:
            return rule.constant;
        case RecomputeRule::Kind::last_read:
            if (!last_read) throw PreconditionError("rule last_read has no preceding read");
            return *last_read;
        case RecomputeRule::Kind::identity_of: {
            auto it = read_by_item.find(rule.ref_item);
            if (it == read_by_item.end())
                throw PreconditionError("rule identity_of(" + rule.ref_item +
                                        ") references an item not read");
            return it->second;
        }
    }
    throw PreconditionError("unknown recompute rule");
}

namespace {

Value apply_rule(const RecomputeRule& rule, const std::vector<Value>& reads_so_far,
                 const std::optional<Value>& last_read,
                 const std::map<std::string, Value>& read_by_item, const TxnId& txn) {
    try {
        return apply_recompute(rule, reads_so_far, last_read, read_by_item);
    } catch (const PreconditionError& e) {
        throw PreconditionError(std::string(e.what()) + " (in " + txn.qualified() + ")");
    }
}

/// Re-derives every recorded write of the row from its corrected reads,
/// walking the operations in original log order.
void recompute_row_ops(DamageAuditRow& row, const std::map<std::string, Value>& corrections) {
    std::vector<Value> reads_so_far;
    std::optional<Value> last_read;
    std::map<std::string, Value> read_by_item;
    std::map<std::string, Value> own_written;  // this txn's preceding writes
    std::map<std::string, std::size_t> written_occurrence;

    for (auto& op : row.ops) {
        const std::string key = op.item.display();
        if (op.kind == RowOp::Kind::read) {
            Value v;
            if (auto w = own_written.find(key); w != own_written.end())
                v = w->second;  // a transaction reads its own writes
            else if (op.invalid)
                v = corrections.at(key);
            else
                v = op.value;
            op.value = v;
            op.invalid = false;
            reads_so_far.push_back(v);
            last_read = v;
            read_by_item[key] = v;
        } else {
            if (op.recorded) {
                Value v = apply_rule(op.rule, reads_so_far, last_read, read_by_item, row.txn);
                op.value = v;
                // Map this (the n-th) recorded write of the item onto the
                // matching data_written entry.
                std::size_t want = written_occurrence[key]++;
                std::size_t seen = 0;
                for (auto& [item, value] : row.data_written) {
                    if (item.display() != key) continue;
                    if (seen++ == want) {
                        value = v;
                        break;
                    }
                }
            }
            own_written[key] = op.value;
        }
    }
}

}  // namespace

Value last_valid_before(const DamageAuditTable& table, std::size_t row_index,
                        const std::string& item, const std::map<std::string, Value>& fallback) {
    for (std::size_t j = row_index; j-- > 0;) {
        const auto& written = table[j].data_written;
        for (auto it = written.rbegin(); it != written.rend(); ++it)
            if (!it->first.is_remote() && it->first.item == item) return it->second;
    }
    auto it = fallback.find(item);
    if (it != fallback.end()) return it->second;
    throw PreconditionError("no former value for item '" + item +
                            "' and no fallback entry");
}

std::vector<std::pair<ItemRef, Value>> recompute_row(
    const std::vector<std::pair<ItemRef, Value>>& reads_in_order,
    const std::vector<std::pair<ItemRef, std::size_t>>& writes_with_reads_before,
    const RecomputeRule& rule) {
    std::vector<std::pair<ItemRef, Value>> out;
    for (const auto& [item, reads_before] : writes_with_reads_before) {
        std::vector<Value> prefix;
        std::optional<Value> last;
        std::map<std::string, Value> by_item;
        for (std::size_t i = 0; i < reads_before && i < reads_in_order.size(); ++i) {
            prefix.push_back(reads_in_order[i].second);
            last = reads_in_order[i].second;
            by_item[reads_in_order[i].first.display()] = reads_in_order[i].second;
        }
        out.emplace_back(item, apply_rule(rule, prefix, last, by_item, TxnId{}));
    }
    return out;
}

RecoveryOutput recover(DamageAuditTable table, const RecoveryInput& input) {
    RecoveryOutput out;
    std::size_t processed = 0;

    for (std::size_t i = 0; i < table.size(); ++i) {
        auto& row = table[i];
        if (row.invalid_read.empty()) {
            processed = i + 1;
            continue;
        }

        // Step 1: a corrected value for every invalid item.
        std::map<std::string, Value> corrections;
        bool satisfied = true;
        for (const auto& item : row.invalid_read) {
            if (item.is_remote()) {
                const ValidItemRow* found = nullptr;
                TxnId via{item.remote->first, item.remote->second};
                for (const auto& r : input.vit_in)
                    if (r.txn == via && r.item == item.item) found = &r;
                if (!found) {
                    if (input.allow_partial) {
                        satisfied = false;
                        break;
                    }
                    throw PreconditionError("upstream recovery incomplete: no valid value for " +
                                            item.display());
                }
                corrections[item.display()] = found->value;
            } else {
                corrections[item.display()] =
                    last_valid_before(table, i, item.item, input.fallback);
            }
        }
        if (!satisfied) break;

        std::vector<ItemRef> was_invalid = row.invalid_read;
        for (const auto& item : was_invalid)
            row.valid_read.emplace_back(item, corrections.at(item.display()));
        row.invalid_read.clear();

        // Step 2: recompute written values from the corrected reads.
        recompute_row_ops(row, corrections);

        // Step 3: corrected values for every fog that read this row's items.
        for (const auto& fog : row.fog_ids) {
            auto& vit = out.outgoing[fog.name()];
            vit.target = fog;
            for (const auto& item : was_invalid)
                if (!vit.find(row.txn, item.item))
                    vit.rows.push_back({row.txn, item.item, corrections.at(item.display())});
        }
        processed = i + 1;
    }

    out.rows_recovered = processed;
    bool complete = processed == table.size();
    out.recovered = std::move(table);

    if (complete) {
        for (const auto& item : input.damaged) {
            bool modified = false;
            if (input.post_log) {
                std::set<int> committed;
                for (const auto& rec : input.post_log->records)
                    if (rec.op.kind == Operation::Kind::commit) committed.insert(rec.txn.number);
                for (const auto& rec : input.post_log->records)
                    if (rec.op.kind == Operation::Kind::write && rec.op.item.item == item &&
                        committed.count(rec.txn.number))
                        modified = true;
            }
            if (modified) {
                out.still_blocked.insert(item);
                continue;
            }
            out.patches[item] =
                last_valid_before(out.recovered, out.recovered.size(), item, input.fallback);
        }
    }
    return out;
}

RecoveryOutput recover_primary(const DamageAuditTable& table, const DamagedItemSet& di_l,
                               const TransactionLog* post_log,
                               const std::map<std::string, Value>& fallback) {
    RecoveryInput input;
    input.damaged = di_l.items;
    input.post_log = post_log;
    input.fallback = fallback;
    return recover(table, input);
}

RecoveryOutput recover_secondary(const DamageAuditTable& table, const DamageItemTable& dit,
                                 const ValidItemsTable& incoming,
                                 const TransactionLog* post_log,
                                 const std::map<std::string, Value>& fallback) {
    RecoveryInput input;
    input.damaged = dit.local_items(dit.target);
    input.post_log = post_log;
    input.fallback = fallback;
    input.vit_in = incoming.rows;
    return recover(table, input);
}

}  // namespace fogrec
