#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cxg/assoc.hpp"
#include "cxg/parallel.hpp"
#include "cxg/slot.hpp"

namespace cxg {

inline constexpr int kMaxSlotsHard = 12;

struct SearchParams {
    double threshold = 0.1;
    int min_slots = 3;
    int max_slots = 8;

    void validate() const {
        if (min_slots < 2) throw std::invalid_argument("min_slots must be at least 2");
        if (max_slots < min_slots) throw std::invalid_argument("max_slots must be >= min_slots");
        if (max_slots > kMaxSlotsHard)
            throw std::invalid_argument("max_slots must be <= " + std::to_string(kMaxSlotsHard));
    }
};

// One explored constraint path anchored at a sentence position.
struct Candidate {
    std::vector<SlotConstraint> slots;
    double total_dp = 0.0;
    std::size_t start = 0;
};

namespace detail {

constexpr double kNoAssociation = -std::numeric_limits<double>::infinity();

// Per-sentence view of the association matrix: constraint ids per token and
// kind, and the LR association for every adjacent kind channel. The search
// then runs on plain array reads.
struct SentenceChannels {
    std::vector<std::array<std::uint32_t, kSlotKindCount>> ids;
    std::vector<std::array<std::array<double, kSlotKindCount>, kSlotKindCount>> trans;

    void build(const IndexedSentence& sent, const AssociationMatrix& m) {
        ids.resize(sent.size());
        trans.resize(sent.size() > 0 ? sent.size() - 1 : 0);
        for (std::size_t i = 0; i < sent.size(); ++i)
            ids[i] = {sent[i].lex, sent[i].syn, sent[i].sem};
        for (std::size_t i = 0; i + 1 < sent.size(); ++i) {
            for (int a = 0; a < kSlotKindCount; ++a) {
                for (int b = 0; b < kSlotKindCount; ++b) {
                    double v = kNoAssociation;
                    if (ids[i][a] != ConstraintIndex::npos &&
                        ids[i + 1][b] != ConstraintIndex::npos) {
                        const PairAssociation* p = m.find(ids[i][a], ids[i + 1][b]);
                        if (p) v = p->lr;
                    }
                    trans[i][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = v;
                }
            }
        }
    }

    IndexedSentence index(const AnnotatedSentence& sent, const AssociationMatrix& m) {
        IndexedSentence out;
        out.reserve(sent.size());
        for (const auto& tok : sent.tokens) {
            IndexedToken t;
            t.lex = m.constraints.find_lex(tok.lex);
            t.syn = m.constraints.find_syn(tok.syn);
            if (tok.sem >= 0) t.sem = m.constraints.find_sem(tok.sem);
            out.push_back(t);
        }
        return out;
    }
};

// Depth-first walk over kind choices from one start position. Kind order
// LEX < SYN < SEM fixes the emission order. sink(len, kinds_code, total_dp)
// fires for every path whose length lies in [min_slots, max_slots];
// kinds_code is the base-3 kind sequence with the first slot most
// significant, so for one span a smaller code is lexicographically earlier.
template <class Sink>
void search_from(const SentenceChannels& ch, std::size_t start, const SearchParams& params,
                 Sink&& sink) {
    const std::size_t len = ch.ids.size();
    if (start >= len) return;
    // depth d == path length d+1; path occupies tokens [start, start+d].
    auto dfs = [&](auto&& self, std::size_t depth, std::uint32_t code, double dp) -> void {
        std::size_t slot_count = depth + 1;
        if (slot_count >= static_cast<std::size_t>(params.min_slots))
            sink(slot_count, code, dp);
        if (slot_count == static_cast<std::size_t>(params.max_slots)) return;
        std::size_t pos = start + depth;
        if (pos + 1 >= len) return;
        for (int k = 0; k < kSlotKindCount; ++k) {
            if (ch.ids[pos + 1][static_cast<std::size_t>(k)] == ConstraintIndex::npos) continue;
            double step = ch.trans[pos][static_cast<std::size_t>(code % 3)]
                                  [static_cast<std::size_t>(k)];
            if (!(step > params.threshold)) continue;
            self(self, depth + 1, code * 3 + static_cast<std::uint32_t>(k), dp + step);
        }
    };
    for (int k = 0; k < kSlotKindCount; ++k) {
        if (ch.ids[start][static_cast<std::size_t>(k)] == ConstraintIndex::npos) continue;
        dfs(dfs, 0, static_cast<std::uint32_t>(k), 0.0);
    }
}

// code holds the kind trits with the first slot most significant.
inline void decode_kinds(std::uint32_t code, std::size_t len, int out[]) {
    for (std::size_t j = len; j-- > 0;) {
        out[j] = static_cast<int>(code % 3);
        code /= 3;
    }
}

}  // namespace detail

// Enumerates every constraint path from `start` whose every adjacent
// transition has LR association strictly above the threshold and whose length
// lies in [min_slots, max_slots]. Paths are emitted in depth-first kind
// order. Tokens outside the semantic lexicon expose no SEM constraint.
inline std::vector<Candidate> recursive_search(const AnnotatedSentence& sentence,
                                               std::size_t start, const AssociationMatrix& matrix,
                                               const SearchParams& params) {
    params.validate();
    std::vector<Candidate> out;
    if (start >= sentence.size()) return out;
    detail::SentenceChannels ch;
    ch.build(ch.index(sentence, matrix), matrix);
    detail::search_from(ch, start, params, [&](std::size_t len, std::uint32_t code, double dp) {
        int kinds[kMaxSlotsHard];
        detail::decode_kinds(code, len, kinds);
        Candidate c;
        c.start = start;
        c.total_dp = dp;
        c.slots.reserve(len);
        for (std::size_t j = 0; j < len; ++j) {
            std::uint32_t id = ch.ids[start + j][static_cast<std::size_t>(kinds[j])];
            c.slots.push_back(matrix.constraints.at(id));
        }
        out.push_back(std::move(c));
    });
    return out;
}

namespace detail {

struct IdSeq {
    std::array<std::uint32_t, kMaxSlotsHard> ids;
    std::uint32_t len = 0;

    static IdSeq make(const std::uint32_t* data, std::size_t n) {
        IdSeq s;
        s.ids.fill(ConstraintIndex::npos);
        for (std::size_t i = 0; i < n; ++i) s.ids[i] = data[i];
        s.len = static_cast<std::uint32_t>(n);
        return s;
    }
    bool operator==(const IdSeq&) const = default;
};

struct IdSeqHash {
    std::size_t operator()(const IdSeq& s) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&](std::uint32_t v) {
            h ^= v;
            h *= 0x100000001b3ULL;
        };
        mix(s.len);
        for (std::uint32_t i = 0; i < s.len; ++i) mix(s.ids[i]);
        return static_cast<std::size_t>(h);
    }
};

}  // namespace detail

// Deduplicated candidate sequences with occurrence counts. A sequence's
// total_dp is a function of the sequence alone (association depends only on
// the constraint pair), so merging keeps the max, which equals every
// contributing value.
struct StackEntry {
    std::vector<SlotConstraint> slots;
    std::uint64_t count = 0;
    double total_dp = 0.0;
};

class CandidateStack {
public:
    explicit CandidateStack(const ConstraintIndex* constraints = nullptr)
        : constraints_(constraints) {}

    void add(const detail::IdSeq& seq, double dp, std::uint64_t count = 1) {
        auto [it, fresh] = map_.try_emplace(seq, Agg{count, dp});
        if (!fresh) {
            it->second.count += count;
            if (dp > it->second.dp) it->second.dp = dp;
        }
    }

    void merge(const CandidateStack& other) {
        for (const auto& [seq, agg] : other.map_) add(seq, agg.dp, agg.count);
    }

    std::size_t size() const { return map_.size(); }
    bool empty() const { return map_.empty(); }
    const ConstraintIndex* constraints() const { return constraints_; }

    std::vector<StackEntry> entries() const {
        std::vector<StackEntry> out;
        out.reserve(map_.size());
        for (const auto& [seq, agg] : map_) {
            StackEntry e;
            e.count = agg.count;
            e.total_dp = agg.dp;
            e.slots.reserve(seq.len);
            for (std::uint32_t i = 0; i < seq.len; ++i)
                e.slots.push_back(constraints_->at(seq.ids[i]));
            out.push_back(std::move(e));
        }
        return out;
    }

private:
    struct Agg {
        std::uint64_t count;
        double dp;
    };
    std::unordered_map<detail::IdSeq, Agg, detail::IdSeqHash> map_;
    const ConstraintIndex* constraints_ = nullptr;
};

// Runs the search from every position of every sentence and keeps, for each
// (sentence, start, end) span, only the maximal-total_dp path (ties broken by
// kind order, slot by slot). Winners are merged across spans by sequence,
// summing the spans won.
inline CandidateStack collect_candidates(std::span<const IndexedSentence> corpus,
                                         const AssociationMatrix& matrix,
                                         const SearchParams& params, int jobs = 1) {
    params.validate();
    std::vector<CandidateStack> blocks(
        static_cast<std::size_t>(jobs < 1 ? 1 : jobs), CandidateStack(&matrix.constraints));

    parallel_blocks(corpus.size(), jobs, [&](std::size_t b, std::size_t begin, std::size_t end) {
        CandidateStack& stack = blocks[b];
        detail::SentenceChannels ch;
        struct Winner {
            double dp = detail::kNoAssociation;
            std::uint32_t code = 0;
        };
        std::vector<Winner> winners;  // start * (max_slots+1) + len
        const auto stride = static_cast<std::size_t>(params.max_slots) + 1;
        for (std::size_t s = begin; s < end; ++s) {
            const IndexedSentence& sent = corpus[s];
            if (sent.size() < static_cast<std::size_t>(params.min_slots)) continue;
            ch.build(sent, matrix);
            winners.assign(sent.size() * stride, Winner{});
            for (std::size_t start = 0; start < sent.size(); ++start) {
                detail::search_from(ch, start, params,
                                    [&](std::size_t len, std::uint32_t code, double dp) {
                                        Winner& w = winners[start * stride + len];
                                        if (dp > w.dp || (dp == w.dp && code < w.code)) {
                                            w.dp = dp;
                                            w.code = code;
                                        }
                                    });
            }
            int kinds[kMaxSlotsHard];
            std::uint32_t ids[kMaxSlotsHard];
            for (std::size_t start = 0; start < sent.size(); ++start) {
                for (std::size_t len = static_cast<std::size_t>(params.min_slots);
                     len < stride; ++len) {
                    const Winner& w = winners[start * stride + len];
                    if (w.dp == detail::kNoAssociation) continue;
                    detail::decode_kinds(w.code, len, kinds);
                    for (std::size_t j = 0; j < len; ++j)
                        ids[j] = ch.ids[start + j][static_cast<std::size_t>(kinds[j])];
                    stack.add(detail::IdSeq::make(ids, len), w.dp);
                }
            }
        }
    });

    CandidateStack merged(&matrix.constraints);
    for (const auto& b : blocks) merged.merge(b);
    return merged;
}

inline CandidateStack collect_candidates(std::span<const AnnotatedSentence> corpus,
                                         const AssociationMatrix& matrix,
                                         const SearchParams& params, int jobs = 1) {
    std::vector<IndexedSentence> indexed;
    indexed.reserve(corpus.size());
    detail::SentenceChannels ch;
    for (const auto& s : corpus) indexed.push_back(ch.index(s, matrix));
    return collect_candidates(std::span<const IndexedSentence>(indexed), matrix, params, jobs);
}

// Ranks the stack: strongest association first, then higher occurrence count,
// then canonical slot order. The result is a total order, so the ranking is
// unique.
inline std::vector<StackEntry> score_stack(const CandidateStack& stack) {
    std::vector<StackEntry> entries = stack.entries();
    std::sort(entries.begin(), entries.end(), [](const StackEntry& a, const StackEntry& b) {
        if (a.total_dp != b.total_dp) return a.total_dp > b.total_dp;
        if (a.count != b.count) return a.count > b.count;
        return a.slots < b.slots;
    });
    return entries;
}

}  // namespace cxg
