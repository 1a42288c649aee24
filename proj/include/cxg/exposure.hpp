#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "cxg/annotate.hpp"
#include "cxg/assoc.hpp"
#include "cxg/corpus.hpp"
#include "cxg/error.hpp"
#include "cxg/grammar.hpp"
#include "cxg/mdl.hpp"
#include "cxg/metrics.hpp"

namespace cxg {

// Settings for one learning run (and for the incremental protocols built on
// top of it). base.threshold / base.top_n are filled by grammar selection.
// matrix_cache_dir, when set, caches association matrices keyed by train
// content and counting options; a cache hit is bit-identical to a rebuild.
struct LearnParams {
    std::uint64_t increment = 100000;
    std::uint64_t max_words = 2000000;
    double test_fraction = 0.1;
    MdlGrid grid;
    GrammarParams base;
    bool same_layer_only = false;
    int jobs = 1;
    std::string matrix_cache_dir;
};

namespace detail {

inline std::string matrix_cache_key(std::span<const AnnotatedSentence> train,
                                    std::uint64_t min_pair_count, bool same_layer_only) {
    Fnv1a64 h;
    h.update_u64(min_pair_count);
    h.update_u64(same_layer_only ? 1 : 0);
    for (const auto& sent : train) {
        for (const auto& tok : sent.tokens) {
            h.update(tok.lex);
            h.update("\x1f");
            h.update(to_string(tok.syn));
            h.update("\x1f");
            h.update_u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(tok.sem)));
        }
        h.update("\x1e");
    }
    return h.hex();
}

inline AssociationMatrix cached_matrix(std::span<const AnnotatedSentence> train,
                                       const LearnParams& params) {
    CountOptions options{params.same_layer_only, params.jobs};
    if (params.matrix_cache_dir.empty())
        return build_matrix(train, params.base.min_pair_count, options);
    std::filesystem::path dir(params.matrix_cache_dir);
    std::filesystem::path file =
        dir / (matrix_cache_key(train, params.base.min_pair_count, params.same_layer_only) +
               ".mtx");
    if (std::filesystem::exists(file)) return load_matrix(file);
    AssociationMatrix matrix = build_matrix(train, params.base.min_pair_count, options);
    std::filesystem::create_directories(dir);
    save_matrix(matrix, file);
    return matrix;
}

}  // namespace detail

// One grammar learned from a fixed corpus: deterministic split, association
// matrix over the train side, grid-selected grammar.
inline SelectionResult learn_grammar(std::span<const AnnotatedSentence> annotated,
                                     const LearnParams& params, const std::string& language,
                                     const std::string& register_label,
                                     std::uint64_t exposure_words,
                                     const std::string& lexicon_digest) {
    std::uint64_t stride = test_stride(params.test_fraction);
    if (annotated.size() < 10)
        throw InsufficientDataError("need at least 10 sentences to learn, got " +
                                    std::to_string(annotated.size()));
    std::vector<AnnotatedSentence> train, test;
    for (std::size_t i = 0; i < annotated.size(); ++i)
        (is_test_sentence(i, stride) ? test : train).push_back(annotated[i]);

    AssociationMatrix matrix = detail::cached_matrix(train, params);
    SelectionResult sel =
        select_grammar(train, test, matrix, params.grid, params.base, params.jobs);
    sel.grammar.meta.language = language;
    sel.grammar.meta.register_label = register_label;
    sel.grammar.meta.exposure_words = exposure_words;
    sel.grammar.meta.lexicon_digest = lexicon_digest;
    return sel;
}

// Grammars re-learned independently from each increment prefix, plus the
// cumulative lexicon growth over the same prefixes.
struct PrefixGrammars {
    std::string register_label;
    std::vector<std::uint64_t> words;            // actual cumulative words per prefix
    std::vector<SelectionResult> selections;     // one per prefix
    std::vector<std::uint64_t> lexicon_sizes;    // distinct word forms per prefix
    std::vector<std::string> warnings;
};

inline PrefixGrammars learn_prefix_grammars(std::span<const RawSentence> corpus,
                                            const SemanticLexicon* lexicon,
                                            const LearnParams& params,
                                            const std::string& language,
                                            const std::string& register_label) {
    std::vector<CorpusSlice> slices =
        slice_increments(corpus, params.increment, params.max_words, register_label);

    PrefixGrammars out;
    out.register_label = register_label;
    std::vector<AnnotatedSentence> annotated;
    std::vector<std::uint64_t> prefix_sentences;
    for (const CorpusSlice& slice : slices) {
        std::vector<AnnotatedSentence> part = annotate_corpus(slice.sentences, lexicon, params.jobs);
        annotated.insert(annotated.end(), std::make_move_iterator(part.begin()),
                         std::make_move_iterator(part.end()));
        prefix_sentences.push_back(annotated.size());
        out.words.push_back(slice.end_word);
    }

    std::unordered_set<std::string> vocabulary;
    std::size_t vocab_done = 0;
    std::string digest = lexicon ? lexicon->digest : "";
    for (std::size_t i = 0; i < slices.size(); ++i) {
        std::span<const AnnotatedSentence> prefix(annotated.data(), prefix_sentences[i]);
        for (; vocab_done < prefix.size(); ++vocab_done)
            for (const auto& tok : prefix[vocab_done].tokens) vocabulary.insert(tok.lex);
        out.lexicon_sizes.push_back(vocabulary.size());

        SelectionResult sel =
            learn_grammar(prefix, params, language, register_label, out.words[i], digest);
        for (const std::string& w : sel.warnings)
            out.warnings.push_back("increment " + std::to_string(i + 1) + ": " + w);
        out.selections.push_back(std::move(sel));
    }
    return out;
}

// Growth experiment: inventory sizes per increment prefix and their power-law
// fits. The lexicon curve is non-decreasing by construction; the grammar
// curve is re-selected per prefix and may dip, which is recorded as a
// warning, not an error.
struct GrowthRun {
    std::string register_label;
    std::vector<GrowthPoint> lexicon_points;
    std::vector<GrowthPoint> grammar_points;
    std::optional<HeapsFit> lexicon_fit;
    std::optional<HeapsFit> grammar_fit;
    std::vector<Constructicon> grammars;
    std::vector<std::string> warnings;
};

inline GrowthRun run_growth(std::span<const RawSentence> corpus, const SemanticLexicon* lexicon,
                            const LearnParams& params, const std::string& language,
                            const std::string& register_label) {
    PrefixGrammars prefixes = learn_prefix_grammars(corpus, lexicon, params, language,
                                                    register_label);
    if (prefixes.selections.size() < 3)
        throw InsufficientDataError("growth experiment needs at least 3 increments, got " +
                                    std::to_string(prefixes.selections.size()));

    GrowthRun run;
    run.register_label = register_label;
    run.warnings = std::move(prefixes.warnings);
    for (std::size_t i = 0; i < prefixes.selections.size(); ++i) {
        run.lexicon_points.push_back(GrowthPoint{prefixes.words[i], prefixes.lexicon_sizes[i]});
        run.grammar_points.push_back(
            GrowthPoint{prefixes.words[i], prefixes.selections[i].grammar.size()});
        if (i > 0 && run.grammar_points[i].count < run.grammar_points[i - 1].count)
            run.warnings.push_back("grammar size dipped at increment " + std::to_string(i + 1));
        run.grammars.push_back(std::move(prefixes.selections[i].grammar));
    }
    for (auto [points, fit, name] :
         {std::tuple{&run.lexicon_points, &run.lexicon_fit, "lexicon"},
          std::tuple{&run.grammar_points, &run.grammar_fit, "grammar"}}) {
        try {
            *fit = heaps_fit(*points);
        } catch (const std::exception& e) {
            run.warnings.push_back(std::string(name) + " growth fit unavailable: " + e.what());
        }
    }
    return run;
}

enum class ConvergenceMode { fuzzy, weighted };

struct ConvergencePoint {
    std::uint64_t words = 0;  // nominal shared exposure (increment multiple)
    double value = 0.0;
};

struct ConvergencePair {
    std::string register_a;
    std::string register_b;
    std::vector<ConvergencePoint> points;
};

struct ConvergenceRun {
    ConvergenceMode mode = ConvergenceMode::fuzzy;
    std::vector<ConvergencePair> pairs;
    std::vector<std::string> warnings;
};

// Cross-register similarity at matched exposure, per register pair in label
// order. Weighted mode scores constructions by their match frequency in a
// shared background corpus.
inline ConvergenceRun run_convergence(
    const std::map<std::string, std::vector<RawSentence>>& registers,
    const SemanticLexicon* lexicon, const LearnParams& params, ConvergenceMode mode,
    double fuzzy_threshold = 0.71,
    std::span<const AnnotatedSentence> background = {}) {
    if (registers.size() < 2)
        throw InsufficientDataError("convergence needs at least 2 registers, got " +
                                    std::to_string(registers.size()));
    if (mode == ConvergenceMode::weighted && background.empty())
        throw std::invalid_argument("weighted convergence needs a background corpus");

    ConvergenceRun run;
    run.mode = mode;
    std::vector<std::pair<std::string, PrefixGrammars>> learned;
    for (const auto& [label, corpus] : registers) {
        PrefixGrammars p = learn_prefix_grammars(corpus, lexicon, params, "", label);
        for (const std::string& w : p.warnings) run.warnings.push_back(label + ": " + w);
        learned.emplace_back(label, std::move(p));
    }

    std::size_t common = learned.front().second.selections.size();
    for (const auto& [label, p] : learned) common = std::min(common, p.selections.size());
    for (const auto& [label, p] : learned)
        if (p.selections.size() != common)
            run.warnings.push_back(label + " has more increments than the smallest register; " +
                                   "comparing the first " + std::to_string(common));

    std::map<Construction, std::uint64_t> background_counts;
    if (mode == ConvergenceMode::weighted) {
        Constructicon all;
        for (const auto& [label, p] : learned)
            for (std::size_t t = 0; t < common; ++t)
                all.constructions.insert(p.selections[t].grammar.constructions.begin(),
                                         p.selections[t].grammar.constructions.end());
        background_counts = count_tokens(all, background, params.jobs);
    }

    for (std::size_t i = 0; i < learned.size(); ++i) {
        for (std::size_t j = i + 1; j < learned.size(); ++j) {
            ConvergencePair pair;
            pair.register_a = learned[i].first;
            pair.register_b = learned[j].first;
            for (std::size_t t = 0; t < common; ++t) {
                const Constructicon& ga = learned[i].second.selections[t].grammar;
                const Constructicon& gb = learned[j].second.selections[t].grammar;
                SimilarityScore s = mode == ConvergenceMode::fuzzy
                                        ? fuzzy_jaccard(ga, gb, fuzzy_threshold, params.jobs)
                                        : weighted_jaccard(ga, gb, background_counts);
                if (s.degenerate)
                    run.warnings.push_back("degenerate similarity at increment " +
                                           std::to_string(t + 1) + " for " + pair.register_a +
                                           "-" + pair.register_b);
                pair.points.push_back(
                    ConvergencePoint{(t + 1) * params.increment, s.value});
            }
            run.pairs.push_back(std::move(pair));
        }
    }
    return run;
}

// Activation bookkeeping for the forgetting protocol. Weights start at 1; an
// increment without any occurrence of a construction costs `decay`; any
// occurrence resets to 1; a weight below zero removes the construction for
// good.
struct ActivationState {
    std::map<Construction, double> weights;
    std::set<Construction> removed;
};

inline void unentrench_step(ActivationState& state, const std::set<Construction>& observed,
                            double decay = 0.25) {
    if (!(decay > 0.0)) throw std::invalid_argument("decay must be positive");
    for (auto it = state.weights.begin(); it != state.weights.end();) {
        if (observed.count(it->first)) {
            it->second = 1.0;
            ++it;
        } else {
            it->second -= decay;
            if (it->second < 0.0) {
                state.removed.insert(it->first);
                it = state.weights.erase(it);
            } else {
                ++it;
            }
        }
    }
}

struct PrunePoint {
    std::uint32_t increment = 0;     // 1-based step
    std::uint64_t words_seen = 0;    // cumulative fresh exposure
    std::uint64_t live = 0;          // constructions still held
};

struct PruneTrace {
    std::vector<PrunePoint> points;
};

struct UnentrenchParams {
    double decay = 0.25;
    std::uint64_t increment = 100000;
    std::uint32_t increments = 20;
    int jobs = 1;
};

struct UnentrenchResult {
    PruneTrace trace;
    Constructicon final_grammar;
    std::vector<std::string> warnings;
};

// Streams fresh register increments past a merged grammar in round-robin
// order (the order of `streams`), decaying unobserved constructions each
// step. The live count is non-increasing: a construction is only ever reset
// or removed, never added.
inline UnentrenchResult run_unentrenchment(
    const Constructicon& merged,
    std::span<const std::pair<std::string, std::vector<RawSentence>>> streams,
    const SemanticLexicon* lexicon, const UnentrenchParams& params) {
    if (streams.empty()) throw InsufficientDataError("no fresh streams to observe");
    if (merged.size() == 0) throw InsufficientDataError("merged grammar is empty");

    UnentrenchResult out;
    std::vector<std::vector<CorpusSlice>> queues;
    for (const auto& [label, corpus] : streams) {
        std::uint64_t total = 0;
        for (const auto& s : corpus) total += s.word_count();
        if (total < params.increment)
            throw InsufficientDataError("stream '" + label + "' has " + std::to_string(total) +
                                        " words; one increment needs " +
                                        std::to_string(params.increment));
        queues.push_back(slice_increments(corpus, params.increment,
                                          std::numeric_limits<std::uint64_t>::max(), label));
    }

    std::vector<Construction> ordered(merged.constructions.begin(), merged.constructions.end());
    detail::GrammarMatcher matcher{std::span<const Construction>(ordered)};

    ActivationState state;
    for (const Construction& c : ordered) state.weights.emplace(c, 1.0);

    std::vector<std::size_t> next(queues.size(), 0);
    std::uint64_t words_seen = 0;
    for (std::uint32_t t = 1; t <= params.increments; ++t) {
        std::size_t reg = (t - 1) % queues.size();
        if (next[reg] >= queues[reg].size()) {
            out.warnings.push_back("stream '" + streams[reg].first + "' exhausted; stopping after " +
                                   std::to_string(t - 1) + " increments");
            break;
        }
        const CorpusSlice& slice = queues[reg][next[reg]++];
        std::vector<AnnotatedSentence> annotated =
            annotate_corpus(slice.sentences, lexicon, params.jobs);
        std::vector<std::uint64_t> counts =
            detail::count_matches(matcher, annotated, params.jobs);
        std::set<Construction> observed;
        for (std::size_t i = 0; i < ordered.size(); ++i)
            if (counts[i] > 0) observed.insert(ordered[i]);

        unentrench_step(state, observed, params.decay);
        words_seen += slice.word_count();
        out.trace.points.push_back(PrunePoint{t, words_seen, state.weights.size()});
    }

    out.final_grammar.meta = merged.meta;
    for (const auto& [c, w] : state.weights) out.final_grammar.constructions.insert(c);
    return out;
}

// Power-law fit of the live-count trace against fresh exposure.
inline HeapsFit forgetting_fit(const PruneTrace& trace) {
    std::vector<GrowthPoint> points;
    points.reserve(trace.points.size());
    for (const PrunePoint& p : trace.points)
        points.push_back(GrowthPoint{p.words_seen, p.live});
    return heaps_fit(points);
}

}  // namespace cxg
