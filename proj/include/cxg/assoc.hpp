#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cxg/annotate.hpp"
#include "cxg/error.hpp"
#include "cxg/parallel.hpp"
#include "cxg/slot.hpp"

namespace cxg {

// Interning table for slot constraints. Ids are assigned in first-encounter
// order by a sequential pass, so a given corpus always yields the same ids.
class ConstraintIndex {
public:
    static constexpr std::uint32_t npos = 0xffffffffu;

    std::uint32_t intern_lex(std::string_view word) {
        auto it = lex_.find(word);
        if (it != lex_.end()) return it->second;
        auto id = push(SlotConstraint{SlotKind::lex, std::string(word)});
        lex_.emplace(items_[id].value, id);
        return id;
    }
    std::uint32_t intern_syn(Upos tag) {
        auto& slot = syn_[static_cast<int>(tag)];
        if (slot == npos) slot = push(slot_syn(tag));
        return slot;
    }
    std::uint32_t intern_sem(std::int32_t cluster) {
        auto c = static_cast<std::size_t>(cluster);
        if (c >= sem_.size()) sem_.resize(c + 1, npos);
        if (sem_[c] == npos) sem_[c] = push(slot_sem(cluster));
        return sem_[c];
    }
    std::uint32_t intern(const SlotConstraint& slot) {
        switch (slot.kind) {
            case SlotKind::lex: return intern_lex(slot.value);
            case SlotKind::syn: {
                auto tag = parse_upos(slot.value);
                if (!tag) throw std::invalid_argument("bad SYN value: " + slot.value);
                return intern_syn(*tag);
            }
            case SlotKind::sem: {
                auto v = parse_sem_value(slot.value);
                if (!v) throw std::invalid_argument("bad SEM value: " + slot.value);
                return intern_sem(*v);
            }
        }
        throw std::invalid_argument("bad slot kind");
    }

    std::uint32_t find_lex(std::string_view word) const {
        auto it = lex_.find(word);
        return it == lex_.end() ? npos : it->second;
    }
    std::uint32_t find_syn(Upos tag) const { return syn_[static_cast<int>(tag)]; }
    std::uint32_t find_sem(std::int32_t cluster) const {
        auto c = static_cast<std::size_t>(cluster);
        return c < sem_.size() ? sem_[c] : npos;
    }
    std::uint32_t find(const SlotConstraint& slot) const {
        switch (slot.kind) {
            case SlotKind::lex: return find_lex(slot.value);
            case SlotKind::syn: {
                auto tag = parse_upos(slot.value);
                return tag ? find_syn(*tag) : npos;
            }
            case SlotKind::sem: {
                auto v = parse_sem_value(slot.value);
                return v ? find_sem(*v) : npos;
            }
        }
        return npos;
    }

    const SlotConstraint& at(std::uint32_t id) const { return items_[id]; }
    std::size_t size() const { return items_.size(); }

private:
    struct SvHash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const {
            return std::hash<std::string_view>{}(s);
        }
    };
    struct SvEq {
        using is_transparent = void;
        bool operator()(std::string_view a, std::string_view b) const { return a == b; }
    };

    std::uint32_t push(SlotConstraint slot) {
        items_.push_back(std::move(slot));
        return static_cast<std::uint32_t>(items_.size() - 1);
    }

    std::vector<SlotConstraint> items_;
    std::unordered_map<std::string, std::uint32_t, SvHash, SvEq> lex_;
    std::array<std::uint32_t, kUposCount> syn_{
        npos, npos, npos, npos, npos, npos, npos, npos, npos,
        npos, npos, npos, npos, npos, npos, npos, npos,
    };
    std::vector<std::uint32_t> sem_;
};

// Token with its layer constraints resolved to interned ids. sem (and, for
// lookup-only indexing, lex) may be ConstraintIndex::npos.
struct IndexedToken {
    std::uint32_t lex = ConstraintIndex::npos;
    std::uint32_t syn = ConstraintIndex::npos;
    std::uint32_t sem = ConstraintIndex::npos;
};

using IndexedSentence = std::vector<IndexedToken>;

inline std::vector<IndexedSentence> index_corpus(std::span<const AnnotatedSentence> corpus,
                                                 ConstraintIndex& index, bool intern_new) {
    std::vector<IndexedSentence> out;
    out.reserve(corpus.size());
    for (const auto& sentence : corpus) {
        IndexedSentence ids;
        ids.reserve(sentence.size());
        for (const auto& tok : sentence.tokens) {
            IndexedToken t;
            t.lex = intern_new ? index.intern_lex(tok.lex) : index.find_lex(tok.lex);
            t.syn = intern_new ? index.intern_syn(tok.syn) : index.find_syn(tok.syn);
            if (tok.sem >= 0)
                t.sem = intern_new ? index.intern_sem(tok.sem) : index.find_sem(tok.sem);
            ids.push_back(t);
        }
        out.push_back(std::move(ids));
    }
    return out;
}

// 2x2 contingency table for one directed cue -> outcome pair over adjacent
// positions. n_cue_total + n_nocue_total equals the total adjacent-position
// count of the corpus.
struct ContingencyCounts {
    std::uint64_t n_cue_outcome = 0;   // cue present, outcome present
    std::uint64_t n_cue_total = 0;     // cue present
    std::uint64_t n_nocue_outcome = 0; // cue absent, outcome present
    std::uint64_t n_nocue_total = 0;   // cue absent
};

// dP = p(outcome | cue) - p(outcome | no cue). Either conditional undefined
// (zero denominator) -> nullopt and the pair is omitted.
inline std::optional<double> delta_p(const ContingencyCounts& c) {
    if (c.n_cue_total == 0 || c.n_nocue_total == 0) return std::nullopt;
    return static_cast<double>(c.n_cue_outcome) / static_cast<double>(c.n_cue_total) -
           static_cast<double>(c.n_nocue_outcome) / static_cast<double>(c.n_nocue_total);
}

// Left-to-right: cue is the left element of the pair.
inline std::optional<double> delta_p_lr(const ContingencyCounts& c) { return delta_p(c); }
// Right-to-left: same formula over counts built with cue = right element.
inline std::optional<double> delta_p_rl(const ContingencyCounts& c) { return delta_p(c); }

namespace detail {

// Matrix-internal convention: a cue (or its absence) that never occurs
// contributes probability 0 instead of omitting the pair, so a corpus where
// the cue precedes every position still yields dP = p(outcome | cue).
inline double delta_p_limit(const ContingencyCounts& c) {
    double p1 = c.n_cue_total
                    ? static_cast<double>(c.n_cue_outcome) / static_cast<double>(c.n_cue_total)
                    : 0.0;
    double p2 = c.n_nocue_total
                    ? static_cast<double>(c.n_nocue_outcome) / static_cast<double>(c.n_nocue_total)
                    : 0.0;
    return p1 - p2;
}

}  // namespace detail

struct CountOptions {
    bool same_layer_only = false;  // restrict joint counts to LEX-LEX / SYN-SYN / SEM-SEM
    int jobs = 1;
};

// Raw adjacency statistics. positions counts every adjacent token pair once;
// marginals count positions where a constraint appears on the given side;
// joint counts (cue at i, outcome at i+1) co-occurrences per layer channel.
// Tokens outside the semantic lexicon contribute no SEM constraints but still
// count as positions.
struct PairCounts {
    ConstraintIndex constraints;
    std::uint64_t positions = 0;
    std::vector<std::uint64_t> left;
    std::vector<std::uint64_t> right;
    std::unordered_map<std::uint64_t, std::uint64_t> joint;
    bool same_layer_only = false;

    static constexpr std::uint64_t key(std::uint32_t cue, std::uint32_t outcome) {
        return (static_cast<std::uint64_t>(cue) << 32) | outcome;
    }
    std::uint64_t joint_count(std::uint32_t cue, std::uint32_t outcome) const {
        auto it = joint.find(key(cue, outcome));
        return it == joint.end() ? 0 : it->second;
    }
};

namespace detail {

inline int token_constraints(const IndexedToken& t, std::uint32_t out[3]) {
    int n = 0;
    out[n++] = t.lex;
    out[n++] = t.syn;
    if (t.sem != ConstraintIndex::npos) out[n++] = t.sem;
    return n;
}

}  // namespace detail

inline PairCounts count_pairs(std::span<const AnnotatedSentence> corpus,
                              const CountOptions& options = {}) {
    PairCounts counts;
    counts.same_layer_only = options.same_layer_only;
    std::vector<IndexedSentence> indexed = index_corpus(corpus, counts.constraints, true);
    counts.left.assign(counts.constraints.size(), 0);
    counts.right.assign(counts.constraints.size(), 0);

    int jobs = options.jobs < 1 ? 1 : options.jobs;
    struct Block {
        std::uint64_t positions = 0;
        std::vector<std::uint64_t> left, right;
        std::unordered_map<std::uint64_t, std::uint64_t> joint;
    };
    std::vector<Block> blocks(static_cast<std::size_t>(jobs));

    parallel_blocks(indexed.size(), jobs, [&](std::size_t b, std::size_t begin, std::size_t end) {
        Block& blk = blocks[b];
        blk.left.assign(counts.constraints.size(), 0);
        blk.right.assign(counts.constraints.size(), 0);
        std::uint32_t lhs[3], rhs[3];
        for (std::size_t s = begin; s < end; ++s) {
            const IndexedSentence& sent = indexed[s];
            for (std::size_t i = 0; i + 1 < sent.size(); ++i) {
                ++blk.positions;
                int nl = detail::token_constraints(sent[i], lhs);
                int nr = detail::token_constraints(sent[i + 1], rhs);
                for (int a = 0; a < nl; ++a) ++blk.left[lhs[a]];
                for (int a = 0; a < nr; ++a) ++blk.right[rhs[a]];
                for (int a = 0; a < nl; ++a)
                    for (int c = 0; c < nr; ++c) {
                        if (options.same_layer_only &&
                            counts.constraints.at(lhs[a]).kind != counts.constraints.at(rhs[c]).kind)
                            continue;
                        ++blk.joint[PairCounts::key(lhs[a], rhs[c])];
                    }
            }
        }
    });

    for (auto& blk : blocks) {
        counts.positions += blk.positions;
        for (std::size_t i = 0; i < blk.left.size(); ++i) {
            counts.left[i] += blk.left[i];
            counts.right[i] += blk.right[i];
        }
        for (const auto& [k, v] : blk.joint) counts.joint[k] += v;
    }
    return counts;
}

// cue = left element of the adjacent pair.
inline ContingencyCounts contingency_lr(const PairCounts& pc, std::uint32_t left_id,
                                        std::uint32_t right_id) {
    std::uint64_t n11 = pc.joint_count(left_id, right_id);
    ContingencyCounts c;
    c.n_cue_outcome = n11;
    c.n_cue_total = pc.left[left_id];
    c.n_nocue_outcome = pc.right[right_id] - n11;
    c.n_nocue_total = pc.positions - pc.left[left_id];
    return c;
}

// cue = right element of the adjacent pair.
inline ContingencyCounts contingency_rl(const PairCounts& pc, std::uint32_t left_id,
                                        std::uint32_t right_id) {
    std::uint64_t n11 = pc.joint_count(left_id, right_id);
    ContingencyCounts c;
    c.n_cue_outcome = n11;
    c.n_cue_total = pc.right[right_id];
    c.n_nocue_outcome = pc.left[left_id] - n11;
    c.n_nocue_total = pc.positions - pc.right[right_id];
    return c;
}

struct PairAssociation {
    double lr = 0.0;
    double rl = 0.0;
    std::uint64_t joint = 0;
};

// Directional association lookup for every adjacent pair that occurred at
// least min_pair_count times. Absent pairs mean "no usable association".
class AssociationMatrix {
public:
    ConstraintIndex constraints;
    std::uint64_t positions = 0;
    std::uint64_t min_pair_count = 3;
    bool same_layer_only = false;
    std::vector<std::uint64_t> left, right;
    std::unordered_map<std::uint64_t, PairAssociation> pairs;

    const PairAssociation* find(std::uint32_t cue, std::uint32_t outcome) const {
        auto it = pairs.find(PairCounts::key(cue, outcome));
        return it == pairs.end() ? nullptr : &it->second;
    }

    std::optional<double> lr(const SlotConstraint& cue, const SlotConstraint& outcome) const {
        auto a = constraints.find(cue), b = constraints.find(outcome);
        if (a == ConstraintIndex::npos || b == ConstraintIndex::npos) return std::nullopt;
        const PairAssociation* p = find(a, b);
        if (!p) return std::nullopt;
        return p->lr;
    }
    std::optional<double> rl(const SlotConstraint& left_slot,
                             const SlotConstraint& right_slot) const {
        auto a = constraints.find(left_slot), b = constraints.find(right_slot);
        if (a == ConstraintIndex::npos || b == ConstraintIndex::npos) return std::nullopt;
        const PairAssociation* p = find(a, b);
        if (!p) return std::nullopt;
        return p->rl;
    }

    std::size_t pair_count() const { return pairs.size(); }
};

inline AssociationMatrix build_matrix(std::span<const AnnotatedSentence> corpus,
                                      std::uint64_t min_pair_count = 3,
                                      const CountOptions& options = {}) {
    if (min_pair_count == 0) throw std::invalid_argument("min_pair_count must be positive");
    PairCounts pc = count_pairs(corpus, options);
    AssociationMatrix m;
    m.constraints = std::move(pc.constraints);
    m.positions = pc.positions;
    m.min_pair_count = min_pair_count;
    m.same_layer_only = pc.same_layer_only;
    m.left = std::move(pc.left);
    m.right = std::move(pc.right);
    for (const auto& [key, n11] : pc.joint) {
        if (n11 < min_pair_count) continue;
        auto cue = static_cast<std::uint32_t>(key >> 32);
        auto outcome = static_cast<std::uint32_t>(key & 0xffffffffu);
        ContingencyCounts lr{n11, m.left[cue], m.right[outcome] - n11, m.positions - m.left[cue]};
        ContingencyCounts rl{n11, m.right[outcome], m.left[cue] - n11, m.positions - m.right[outcome]};
        m.pairs.emplace(key, PairAssociation{detail::delta_p_limit(lr), detail::delta_p_limit(rl), n11});
    }
    return m;
}

// Explicit association values for diagnostics and tests; carries no counts,
// so only lr/rl lookups are meaningful.
struct ExplicitAssociation {
    SlotConstraint cue;
    SlotConstraint outcome;
    double lr = 0.0;
    double rl = 0.0;
};

inline AssociationMatrix matrix_from_values(std::span<const ExplicitAssociation> values,
                                            std::uint64_t min_pair_count = 1) {
    AssociationMatrix m;
    m.min_pair_count = min_pair_count;
    for (const auto& v : values) {
        std::uint32_t a = m.constraints.intern(v.cue);
        std::uint32_t b = m.constraints.intern(v.outcome);
        m.pairs[PairCounts::key(a, b)] = PairAssociation{v.lr, v.rl, min_pair_count};
    }
    m.left.assign(m.constraints.size(), 0);
    m.right.assign(m.constraints.size(), 0);
    return m;
}

// Binary cache round-trip. Pairs are written key-sorted so the bytes for a
// given matrix are unique.
inline void save_matrix(const AssociationMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write matrix cache: " + path.string());
    auto put_u64 = [&](std::uint64_t v) {
        char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(v >> (8 * i));
        out.write(b, 8);
    };
    out.write("CXGM0001", 8);
    put_u64(m.same_layer_only ? 1 : 0);
    put_u64(m.min_pair_count);
    put_u64(m.positions);
    put_u64(m.constraints.size());
    for (std::uint32_t i = 0; i < m.constraints.size(); ++i) {
        const SlotConstraint& s = m.constraints.at(i);
        out.put(static_cast<char>(s.kind));
        put_u64(s.value.size());
        out.write(s.value.data(), static_cast<std::streamsize>(s.value.size()));
    }
    for (std::uint64_t v : m.left) put_u64(v);
    for (std::uint64_t v : m.right) put_u64(v);
    put_u64(m.pairs.size());
    std::vector<std::uint64_t> keys;
    keys.reserve(m.pairs.size());
    for (const auto& [k, _] : m.pairs) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (std::uint64_t k : keys) {
        const PairAssociation& p = m.pairs.at(k);
        put_u64(k);
        std::uint64_t lr_bits, rl_bits;
        static_assert(sizeof(double) == 8);
        std::memcpy(&lr_bits, &p.lr, 8);
        std::memcpy(&rl_bits, &p.rl, 8);
        put_u64(lr_bits);
        put_u64(rl_bits);
        put_u64(p.joint);
    }
    if (!out) throw ParseError("write failed: " + path.string());
}

inline AssociationMatrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open matrix cache: " + path.string());
    auto get_u64 = [&]() {
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    };
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string_view(magic, 8) != "CXGM0001")
        throw ParseError("bad matrix cache header: " + path.string());
    AssociationMatrix m;
    m.same_layer_only = get_u64() != 0;
    m.min_pair_count = get_u64();
    m.positions = get_u64();
    std::uint64_t n = get_u64();
    for (std::uint64_t i = 0; i < n; ++i) {
        auto kind = static_cast<SlotKind>(in.get());
        std::uint64_t len = get_u64();
        std::string value(len, '\0');
        in.read(value.data(), static_cast<std::streamsize>(len));
        if (!in) throw ParseError("truncated matrix cache: " + path.string());
        m.constraints.intern(SlotConstraint{kind, std::move(value)});
    }
    m.left.resize(n);
    m.right.resize(n);
    for (auto& v : m.left) v = get_u64();
    for (auto& v : m.right) v = get_u64();
    std::uint64_t npairs = get_u64();
    for (std::uint64_t i = 0; i < npairs; ++i) {
        std::uint64_t k = get_u64();
        std::uint64_t lr_bits = get_u64(), rl_bits = get_u64(), joint = get_u64();
        PairAssociation p;
        std::memcpy(&p.lr, &lr_bits, 8);
        std::memcpy(&p.rl, &rl_bits, 8);
        p.joint = joint;
        m.pairs.emplace(k, p);
    }
    if (!in) throw ParseError("truncated matrix cache: " + path.string());
    return m;
}

}  // namespace cxg
