#include "fogrec/log_model.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace fogrec {

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() const { return pos < text.size() ? text[pos] : '\0'; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg + " at offset " + std::to_string(pos), pos);
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos;
    }

    // A run of name characters: letters, digits, '_'.
    std::string word() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size()) {
            char c = text[pos];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
                ++pos;
            else
                break;
        }
        if (pos == start) fail("expected identifier");
        return text.substr(start, pos - start);
    }

    Value integer() {
        skip_ws();
        std::size_t start = pos;
        if (peek() == '-' || peek() == '+') ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start || (pos == start + 1 && !std::isdigit(static_cast<unsigned char>(text[start]))))
            fail("expected integer");
        return std::stoll(text.substr(start, pos - start));
    }
};

// "r5" / "w12" / "c1" / "a3" -> (op letter, txn number)
std::optional<std::pair<char, int>> op_token(const std::string& w) {
    if (w.size() < 2) return std::nullopt;
    char c = w[0];
    if (c != 'r' && c != 'w' && c != 'c' && c != 'a') return std::nullopt;
    for (std::size_t i = 1; i < w.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(w[i]))) return std::nullopt;
    return std::make_pair(c, std::stoi(w.substr(1)));
}

}  // namespace

TransactionLog parse_schedule(const std::string& text, const FogId& node) {
    TransactionLog log{node, {}};
    Cursor cur{text};
    std::set<int> terminated;
    int seq = 0;

    auto check_terminator = [&](int txn, const Cursor& c) {
        if (terminated.count(txn))
            throw ParseError("duplicate terminator for T" + std::to_string(txn) +
                                 " at offset " + std::to_string(c.pos),
                             c.pos);
    };

    while (!cur.done()) {
        std::string w = cur.word();

        std::optional<FogId> origin;
        if (auto fog = FogId::try_parse(w); fog && cur.peek() == '.') {
            // origin-qualified read: fogx.r3(G, 9)
            origin = *fog;
            cur.expect('.');
            w = cur.word();
        }

        auto tok = op_token(w);
        if (!tok) cur.fail("expected operation token, got '" + w + "'");
        auto [kind, num] = *tok;
        TxnId txn{node, num};

        if (origin && kind != 'r') cur.fail("origin prefix is allowed on reads only");

        switch (kind) {
            case 'r': {
                cur.expect('(');
                std::string iw = cur.word();
                ItemRef item;
                if (auto fog = FogId::try_parse(iw); fog && cur.peek() == '.') {
                    // remote item: fog1.T3.G
                    cur.expect('.');
                    std::string tw = cur.word();
                    if (tw.size() < 2 || tw[0] != 'T') cur.fail("expected T<num> in remote item");
                    for (std::size_t i = 1; i < tw.size(); ++i)
                        if (!std::isdigit(static_cast<unsigned char>(tw[i])))
                            cur.fail("expected T<num> in remote item");
                    int via = std::stoi(tw.substr(1));
                    cur.expect('.');
                    std::string name = cur.word();
                    if (!valid_item_name(name)) cur.fail("invalid item name '" + name + "'");
                    item = ItemRef::remote_ref(*fog, via, name);
                } else {
                    if (!valid_item_name(iw)) cur.fail("invalid item name '" + iw + "'");
                    item = ItemRef::local(iw);
                }
                cur.expect(',');
                Value v = cur.integer();
                cur.expect(')');
                log.records.push_back({seq++, txn, origin, Operation::read(item, v)});
                break;
            }
            case 'w': {
                cur.expect('(');
                std::string iw = cur.word();
                if (auto fog = FogId::try_parse(iw); fog && cur.peek() == '.')
                    cur.fail("remote item reference in a write");
                if (!valid_item_name(iw)) cur.fail("invalid item name '" + iw + "'");
                cur.expect(',');
                Value v1 = cur.integer();
                cur.expect(',');
                Value v2 = cur.integer();
                cur.expect(')');
                log.records.push_back({seq++, txn, std::nullopt,
                                       Operation::write(ItemRef::local(iw), v1, v2)});
                break;
            }
            case 'c': {
                check_terminator(num, cur);
                terminated.insert(num);
                log.records.push_back({seq++, txn, std::nullopt, Operation::commit()});
                break;
            }
            case 'a': {
                check_terminator(num, cur);
                terminated.insert(num);
                log.records.push_back({seq++, txn, std::nullopt, Operation::abort()});
                break;
            }
        }
    }
    return log;
}

std::string format_record(const LogRecord& rec) {
    std::ostringstream out;
    switch (rec.op.kind) {
        case Operation::Kind::read:
            if (rec.origin) out << rec.origin->name() << '.';
            out << 'r' << rec.txn.number << '(' << rec.op.item.display() << ", " << rec.op.value
                << ')';
            break;
        case Operation::Kind::write:
            out << 'w' << rec.txn.number << '(' << rec.op.item.item << ", " << rec.op.before
                << ", " << rec.op.after << ')';
            break;
        case Operation::Kind::commit:
            out << 'c' << rec.txn.number;
            break;
        case Operation::Kind::abort:
            out << 'a' << rec.txn.number;
            break;
    }
    return out.str();
}

std::string format_schedule(const TransactionLog& log) {
    std::string out;
    for (const auto& rec : log.records) {
        if (!out.empty()) out += ' ';
        out += format_record(rec);
    }
    return out;
}

ValidationReport validate_schedule(const TransactionLog& log) {
    ValidationReport report;
    auto error = [&](int seq, std::string msg) { report.errors.push_back({seq, std::move(msg)}); };
    auto warn = [&](int seq, std::string msg) { report.warnings.push_back({seq, std::move(msg)}); };

    // Structural pass.
    std::map<int, int> terminator_seq;  // txn number -> seq of terminator
    int last_seq = -1;
    for (const auto& rec : log.records) {
        if (rec.seq <= last_seq) error(rec.seq, "seq not strictly increasing");
        last_seq = rec.seq;

        bool is_term = rec.op.kind == Operation::Kind::commit ||
                       rec.op.kind == Operation::Kind::abort;
        auto it = terminator_seq.find(rec.txn.number);
        if (it != terminator_seq.end()) {
            if (is_term)
                error(rec.seq, "duplicate terminator for " + rec.txn.local_name());
            else
                error(rec.seq, "operation of " + rec.txn.local_name() + " after its terminator");
        } else if (is_term) {
            terminator_seq[rec.txn.number] = rec.seq;
        }

        if (rec.op.kind == Operation::Kind::write && rec.op.item.is_remote())
            error(rec.seq, "remote item reference in a write");
        if (rec.origin && rec.op.kind != Operation::Kind::read)
            error(rec.seq, "origin set on a non-read record");
    }
    for (const auto& rec : log.records) {
        if (rec.op.kind == Operation::Kind::read || rec.op.kind == Operation::Kind::write) {
            if (!terminator_seq.count(rec.txn.number))
                error(rec.seq, "missing terminator for " + rec.txn.local_name());
        }
    }

    // Value-chain pass. State advances at commit points; a transaction's own
    // pending writes are visible to its later operations.
    std::map<std::string, Value> known;  // last committed after-image, or first observed read
    std::map<int, std::map<std::string, Value>> pending;  // txn -> own writes so far
    std::map<int, std::vector<const LogRecord*>> txn_ops;

    auto lookup = [&](int txn, const std::string& item) -> std::optional<Value> {
        auto pit = pending.find(txn);
        if (pit != pending.end()) {
            auto vit = pit->second.find(item);
            if (vit != pit->second.end()) return vit->second;
        }
        auto kit = known.find(item);
        if (kit != known.end()) return kit->second;
        return std::nullopt;
    };

    for (const auto& rec : log.records) {
        int n = rec.txn.number;
        switch (rec.op.kind) {
            case Operation::Kind::read: {
                if (rec.op.item.is_remote()) break;  // checked on the exporting node
                auto v = lookup(n, rec.op.item.item);
                if (v && *v != rec.op.value)
                    warn(rec.seq, "read of " + rec.op.item.item + " observes " +
                                      std::to_string(rec.op.value) + " but last value is " +
                                      std::to_string(*v));
                txn_ops[n].push_back(&rec);
                break;
            }
            case Operation::Kind::write: {
                auto v = lookup(n, rec.op.item.item);
                if (v && *v != rec.op.before)
                    warn(rec.seq, "before-image of " + rec.op.item.item + " is " +
                                      std::to_string(rec.op.before) + " but last value is " +
                                      std::to_string(*v));
                pending[n][rec.op.item.item] = rec.op.after;
                txn_ops[n].push_back(&rec);
                break;
            }
            case Operation::Kind::commit: {
                for (const LogRecord* op : txn_ops[n]) {
                    if (op->op.kind == Operation::Kind::write)
                        known[op->op.item.item] = op->op.after;
                    else if (!op->op.item.is_remote() && !known.count(op->op.item.item))
                        known[op->op.item.item] = op->op.value;
                }
                pending.erase(n);
                txn_ops.erase(n);
                break;
            }
            case Operation::Kind::abort:
                pending.erase(n);
                txn_ops.erase(n);
                break;
        }
    }
    return report;
}

Value committed_value_before(const TransactionLog& log, const ItemRef& item, int seq,
                             const std::map<std::string, Value>& initial) {
    if (item.is_remote())
        throw PreconditionError("committed_value_before takes a local item");

    std::map<int, int> commit_seq;
    for (const auto& rec : log.records)
        if (rec.op.kind == Operation::Kind::commit) commit_seq[rec.txn.number] = rec.seq;

    // Last write whose transaction committed before seq.
    std::optional<Value> best;
    int best_seq = -1;
    for (const auto& rec : log.records) {
        if (rec.op.kind != Operation::Kind::write || rec.op.item.item != item.item) continue;
        auto it = commit_seq.find(rec.txn.number);
        if (it == commit_seq.end() || it->second >= seq) continue;
        if (rec.seq > best_seq) {
            best_seq = rec.seq;
            best = rec.op.after;
        }
    }
    if (best) return *best;

    // Earliest logged read of the item anywhere in the log.
    for (const auto& rec : log.records)
        if (rec.op.kind == Operation::Kind::read && !rec.op.item.is_remote() &&
            rec.op.item.item == item.item)
            return rec.op.value;

    auto it = initial.find(item.item);
    if (it != initial.end()) return it->second;
    throw PreconditionError("no value source for item '" + item.item + "'");
}

}  // namespace fogrec
