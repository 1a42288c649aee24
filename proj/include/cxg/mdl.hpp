#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cxg/annotate.hpp"
#include "cxg/assoc.hpp"
#include "cxg/error.hpp"
#include "cxg/grammar.hpp"
#include "cxg/induct.hpp"
#include "cxg/parallel.hpp"

namespace cxg {

struct MdlScore {
    double l1_bits = 0.0;  // grammar code length
    double l2_bits = 0.0;  // data code length given the grammar
    double total_bits() const { return l1_bits + l2_bits; }
};

// Per-layer unigram filler model with add-one smoothing:
// p = (count+1) / (N+V); a value never seen gets 1 / (N+V).
class FillerDistribution {
public:
    static FillerDistribution estimate(std::span<const AnnotatedSentence> train) {
        FillerDistribution fd;
        for (const auto& sent : train) {
            for (const auto& tok : sent.tokens) {
                ++fd.lex_[tok.lex];
                ++fd.lex_n_;
                ++fd.syn_[static_cast<int>(tok.syn)];
                ++fd.syn_n_;
                if (tok.sem >= 0) {
                    ++fd.sem_[tok.sem];
                    ++fd.sem_n_;
                }
            }
        }
        for (auto c : fd.syn_)
            if (c > 0) ++fd.syn_v_;
        return fd;
    }

    double log2p(const SlotConstraint& slot) const {
        switch (slot.kind) {
            case SlotKind::lex: return log2p_lex(slot.value);
            case SlotKind::syn: {
                auto tag = parse_upos(slot.value);
                std::uint64_t c = tag ? syn_[static_cast<int>(*tag)] : 0;
                return smoothed(c, syn_n_, syn_v_);
            }
            case SlotKind::sem: {
                auto v = parse_sem_value(slot.value);
                std::uint64_t c = 0;
                if (v) {
                    auto it = sem_.find(*v);
                    if (it != sem_.end()) c = it->second;
                }
                return smoothed(c, sem_n_, sem_.size());
            }
        }
        return 0.0;
    }

    double log2p_lex(const std::string& lex) const {
        auto it = lex_.find(lex);
        return smoothed(it == lex_.end() ? 0 : it->second, lex_n_, lex_.size());
    }

    std::uint64_t lex_tokens() const { return lex_n_; }
    std::uint64_t lex_types() const { return lex_.size(); }

private:
    static double smoothed(std::uint64_t count, std::uint64_t n, std::uint64_t v) {
        // A layer with no observations at all carries no information; code
        // such a value in 0 bits. Never reached by learned grammars.
        if (n + v == 0) return 0.0;
        return std::log2(static_cast<double>(count + 1) / static_cast<double>(n + v));
    }

    std::unordered_map<std::string, std::uint64_t> lex_;
    std::array<std::uint64_t, kUposCount> syn_{};
    std::unordered_map<std::int32_t, std::uint64_t> sem_;
    std::uint64_t lex_n_ = 0, syn_n_ = 0, sem_n_ = 0, syn_v_ = 0;
};

inline constexpr double kLog2Kinds = 1.5849625007211561814537389439478;  // log2(3)

// Grammar code: each slot costs a kind tag (log2 3) plus the filler under the
// training unigram model; each construction ends with one more kind-alphabet
// symbol as terminator.
inline double l1_cost(const Constructicon& grammar, const FillerDistribution& fd) {
    double bits = 0.0;
    for (const Construction& c : grammar.constructions) {
        for (const SlotConstraint& s : c.slots) bits += kLog2Kinds - fd.log2p(s);
        bits += kLog2Kinds;
    }
    return bits;
}

inline double l1_cost(const Constructicon& grammar, std::span<const AnnotatedSentence> train) {
    return l1_cost(grammar, FillerDistribution::estimate(train));
}

namespace detail {

// Smoothed construction-usage model over the first `size` ranks:
// p = (m+1) / (M + size) with M the summed train matches of those ranks.
struct UsageModel {
    const std::vector<std::uint64_t>* counts = nullptr;
    std::uint64_t total = 0;
    std::size_t size = 0;

    double log2p(std::size_t rank) const {
        return std::log2(static_cast<double>((*counts)[rank] + 1) /
                         static_cast<double>(total + size));
    }
};

// Greedy left-to-right coverage of one sentence: at each position take the
// longest match with rank < usage.size (ties: higher train count, then lower
// rank); covered span = 1 flag bit + usage code, uncovered token = 1 flag bit
// + lexical unigram code.
inline double l2_sentence(const AnnotatedSentence& sent, const GrammarMatcher& matcher,
                          const UsageModel& usage, const FillerDistribution& fd) {
    double bits = 0.0;
    std::size_t i = 0;
    while (i < sent.size()) {
        std::size_t best_rank = 0, best_len = 0;
        bool found = false;
        matcher.match_at(sent, i, [&](std::size_t rank, std::size_t len) {
            if (rank >= usage.size) return;
            if (!found || len > best_len ||
                (len == best_len && ((*usage.counts)[rank] > (*usage.counts)[best_rank] ||
                                     ((*usage.counts)[rank] == (*usage.counts)[best_rank] &&
                                      rank < best_rank)))) {
                found = true;
                best_rank = rank;
                best_len = len;
            }
        });
        if (found) {
            bits += 1.0 - usage.log2p(best_rank);
            i += best_len;
        } else {
            bits += 1.0 - fd.log2p_lex(sent.tokens[i].lex);
            i += 1;
        }
    }
    return bits;
}

// Per-sentence costs are computed in parallel but reduced in sentence order,
// so the sum does not depend on jobs.
inline double l2_corpus(std::span<const AnnotatedSentence> test, const GrammarMatcher& matcher,
                        const UsageModel& usage, const FillerDistribution& fd, int jobs) {
    std::vector<double> per_sentence(test.size());
    parallel_blocks(test.size(), jobs, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s)
            per_sentence[s] = l2_sentence(test[s], matcher, usage, fd);
    });
    double bits = 0.0;
    for (double b : per_sentence) bits += b;
    return bits;
}

}  // namespace detail

// Data code length of the test corpus under the grammar, with construction
// usage estimated from the train-side match counts.
inline double l2_cost(const Constructicon& grammar, std::span<const AnnotatedSentence> test,
                      const std::map<Construction, std::uint64_t>& train_counts,
                      const FillerDistribution& fd, int jobs = 1) {
    std::vector<Construction> ordered;
    std::vector<std::uint64_t> counts;
    ordered.reserve(grammar.size());
    counts.reserve(grammar.size());
    for (const Construction& c : grammar.constructions) {
        ordered.push_back(c);
        auto it = train_counts.find(c);
        counts.push_back(it == train_counts.end() ? 0 : it->second);
    }
    detail::GrammarMatcher matcher{std::span<const Construction>(ordered)};
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    detail::UsageModel usage{&counts, total, ordered.size()};
    return detail::l2_corpus(test, matcher, usage, fd, jobs);
}

inline double l2_cost(const Constructicon& grammar, std::span<const AnnotatedSentence> test,
                      std::span<const AnnotatedSentence> train, int jobs = 1) {
    return l2_cost(grammar, test, count_tokens(grammar, train, jobs),
                   FillerDistribution::estimate(train), jobs);
}

inline MdlScore mdl_score(const Constructicon& grammar, std::span<const AnnotatedSentence> train,
                          std::span<const AnnotatedSentence> test, int jobs = 1) {
    FillerDistribution fd = FillerDistribution::estimate(train);
    MdlScore score;
    score.l1_bits = l1_cost(grammar, fd);
    score.l2_bits = l2_cost(grammar, test, count_tokens(grammar, train, jobs), fd, jobs);
    return score;
}

// Grammar-selection grid. top_n -1 keeps the whole ranked stack.
struct MdlGrid {
    std::vector<double> thresholds{0.05, 0.1, 0.2, 0.3};
    std::vector<long long> top_ns{250, 500, 1000, 2000, -1};
};

struct GridPoint {
    double threshold = 0.0;
    long long top_n = 0;
    std::size_t grammar_size = 0;
    MdlScore score;
};

struct SelectionResult {
    Constructicon grammar;
    MdlScore score;     // of the selected grammar
    MdlScore baseline;  // empty grammar: lexical unigram code only
    std::vector<GridPoint> grid;
    std::vector<std::string> warnings;
};

// Ranked candidates at one threshold, strongest first.
struct RankedCandidates {
    double threshold = 0.0;
    std::vector<Construction> ranked;
};

namespace detail {

// Streaming argmin over grid points. Selection order: fewest total bits, then
// smaller grammar, then lower threshold, then smaller top_n. The empty
// grammar is seeded as the baseline, so any winner must beat it outright.
struct SelectionState {
    FillerDistribution fd;
    SelectionResult result;
    double best_total = 0.0;
    std::size_t best_size = 0;
    double best_threshold = 0.0;
    long long best_top_n = 0;
    std::vector<Construction> best_slots;

    SelectionState(std::span<const AnnotatedSentence> train,
                   std::span<const AnnotatedSentence> test)
        : fd(FillerDistribution::estimate(train)) {
        if (test.empty()) throw InsufficientDataError("empty test corpus in grammar selection");
        double bits = 0.0;
        for (const auto& sent : test)
            for (const auto& tok : sent.tokens) bits += 1.0 - fd.log2p_lex(tok.lex);
        result.baseline = MdlScore{0.0, bits};
        result.score = result.baseline;
        best_total = result.baseline.total_bits();
    }

    bool improves(double total, std::size_t size, double threshold, long long top_n) const {
        if (total != best_total) return total < best_total;
        if (size != best_size) return size < best_size;
        if (threshold != best_threshold) return threshold < best_threshold;
        return top_n < best_top_n;
    }

    void evaluate(const RankedCandidates& cand, const std::vector<long long>& top_ns,
                  std::span<const AnnotatedSentence> train,
                  std::span<const AnnotatedSentence> test, int jobs) {
        GrammarMatcher matcher{std::span<const Construction>(cand.ranked)};
        std::vector<std::uint64_t> counts = count_matches(matcher, train, jobs);  // by rank
        std::vector<double> l1_prefix(cand.ranked.size() + 1, 0.0);
        std::vector<std::uint64_t> count_prefix(cand.ranked.size() + 1, 0);
        for (std::size_t r = 0; r < cand.ranked.size(); ++r) {
            double bits = kLog2Kinds;
            for (const SlotConstraint& s : cand.ranked[r].slots) bits += kLog2Kinds - fd.log2p(s);
            l1_prefix[r + 1] = l1_prefix[r] + bits;
            count_prefix[r + 1] = count_prefix[r] + counts[r];
        }

        for (long long top_n : top_ns) {
            std::size_t size = top_n < 0
                                   ? cand.ranked.size()
                                   : std::min<std::size_t>(static_cast<std::size_t>(top_n),
                                                           cand.ranked.size());
            UsageModel usage{&counts, count_prefix[size], size};
            MdlScore score;
            score.l1_bits = l1_prefix[size];
            score.l2_bits = size == 0 ? result.baseline.l2_bits
                                      : l2_corpus(test, matcher, usage, fd, jobs);
            result.grid.push_back(GridPoint{cand.threshold, top_n, size, score});
            if (improves(score.total_bits(), size, cand.threshold, top_n)) {
                best_total = score.total_bits();
                best_size = size;
                best_threshold = cand.threshold;
                best_top_n = top_n;
                best_slots.assign(cand.ranked.begin(),
                                  cand.ranked.begin() + static_cast<std::ptrdiff_t>(size));
                result.score = score;
            }
        }
    }

    SelectionResult finish(const GrammarParams& base) {
        if (best_size == 0) {
            best_slots.clear();
            result.score = result.baseline;
            result.warnings.push_back("no grammar beat the empty baseline; selecting empty grammar");
        }
        result.grammar.constructions.insert(best_slots.begin(), best_slots.end());
        result.grammar.meta.params = base;
        result.grammar.meta.params.threshold = best_threshold;
        result.grammar.meta.params.top_n = best_top_n;
        return std::move(result);
    }
};

}  // namespace detail

// Evaluates every (threshold, top_n) grid point over pre-ranked candidate
// lists and returns the description-length winner; the empty grammar is the
// baseline every point must beat. Ties prefer the smaller grammar, then the
// lower threshold.
inline SelectionResult select_from_candidates(std::span<const RankedCandidates> per_threshold,
                                              std::span<const AnnotatedSentence> train,
                                              std::span<const AnnotatedSentence> test,
                                              const std::vector<long long>& top_ns,
                                              const GrammarParams& base, int jobs = 1) {
    detail::SelectionState state(train, test);
    for (const RankedCandidates& cand : per_threshold)
        state.evaluate(cand, top_ns, train, test, jobs);
    return state.finish(base);
}

// Full selection: builds the candidate stack at one grid threshold at a time
// from the association matrix, ranks it, and evaluates the grid points.
inline SelectionResult select_grammar(std::span<const AnnotatedSentence> train,
                                      std::span<const AnnotatedSentence> test,
                                      const AssociationMatrix& matrix, const MdlGrid& grid,
                                      const GrammarParams& base, int jobs = 1) {
    std::vector<IndexedSentence> indexed;
    indexed.reserve(train.size());
    detail::SentenceChannels ch;
    for (const auto& s : train) indexed.push_back(ch.index(s, matrix));

    detail::SelectionState state(train, test);
    bool any_candidates = false;
    for (double threshold : grid.thresholds) {
        SearchParams params{threshold, base.min_slots, base.max_slots};
        CandidateStack stack =
            collect_candidates(std::span<const IndexedSentence>(indexed), matrix, params, jobs);
        RankedCandidates cand;
        cand.threshold = threshold;
        std::vector<StackEntry> ranked = score_stack(stack);
        cand.ranked.reserve(ranked.size());
        for (auto& e : ranked) cand.ranked.push_back(Construction{std::move(e.slots)});
        any_candidates = any_candidates || !cand.ranked.empty();
        state.evaluate(cand, grid.top_ns, train, test, jobs);
    }

    SelectionResult result = state.finish(base);
    if (!any_candidates)
        result.warnings.push_back("candidate stack empty at every threshold");
    return result;
}

}  // namespace cxg
