// Acceptance battery: one independently computed check per numbered
// criterion, each ending in a single PASS or FAIL line. Run with a criterion
// number (1-8) or with no argument for the full battery; exit 0 iff every
// requested criterion passed. Criteria 7 and 8 need the bundled sample
// (make_sample --out <dir>) and the cxglab binary; their locations come from
// the build system.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cxg/cxg.hpp"

namespace fs = std::filesystem;
using namespace cxg;

namespace {

struct Check {
    bool ok = true;
    std::string why;
    void fail(const std::string& reason) {
        if (ok) why = reason;  // keep the first failure
        ok = false;
    }
    void expect(bool cond, const std::string& reason) {
        if (!cond) fail(reason);
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Random annotated corpora built directly, bypassing the annotation path, so
// every layer is exercised without depending on it.
std::vector<AnnotatedSentence> random_annotated(Rng& rng, int n_sentences, int max_len,
                                                int vocab, int n_clusters) {
    static constexpr Upos tags[6] = {Upos::NOUN, Upos::VERB, Upos::ADJ,
                                     Upos::DET,  Upos::ADP,  Upos::X};
    std::vector<AnnotatedSentence> out;
    out.reserve(static_cast<std::size_t>(n_sentences));
    for (int i = 0; i < n_sentences; ++i) {
        AnnotatedSentence s;
        int len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len)));
        for (int t = 0; t < len; ++t) {
            AnnotatedToken tok;
            tok.lex = "w" + std::to_string(rng.below(static_cast<std::uint64_t>(vocab)));
            tok.syn = tags[rng.below(6)];
            tok.sem = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_clusters + 1))) - 1;
            s.tokens.push_back(std::move(tok));
        }
        out.push_back(std::move(s));
    }
    return out;
}

bool token_matches(const AnnotatedToken& tok, const SlotConstraint& slot) {
    switch (slot.kind) {
        case SlotKind::lex: return tok.lex == slot.value;
        case SlotKind::syn: return std::string(to_string(tok.syn)) == slot.value;
        case SlotKind::sem: return tok.sem >= 0 && std::to_string(tok.sem) == slot.value;
    }
    return false;
}

// --------------------------------------------------------------------------
// 1. Every stored association equals a from-scratch contingency computation.

bool criterion1() {
    auto start = std::chrono::steady_clock::now();
    Check c;
    std::size_t pairs_checked = 0;
    for (std::uint64_t trial = 0; trial < 200 && c.ok; ++trial) {
        Rng rng(1000 + trial);
        int vocab = 2 + static_cast<int>(rng.below(9));
        int n_sentences = 20 + static_cast<int>(rng.below(60));
        auto corpus = random_annotated(rng, n_sentences, 12, vocab, 4);
        std::uint64_t tokens = 0;
        for (auto& s : corpus) tokens += s.size();
        while (tokens > 1000) {
            tokens -= corpus.back().size();
            corpus.pop_back();
        }
        std::uint64_t min_pair = 1 + rng.below(3);
        bool same_layer = trial % 3 == 0;
        AssociationMatrix m = build_matrix(corpus, min_pair, CountOptions{same_layer, 1});

        for (const auto& [key, assoc] : m.pairs) {
            const SlotConstraint& cue = m.constraints.at(static_cast<std::uint32_t>(key >> 32));
            const SlotConstraint& outcome =
                m.constraints.at(static_cast<std::uint32_t>(key & 0xffffffffu));
            // Brute force over every adjacent token pair in the corpus.
            double a = 0, b = 0, cc = 0, d = 0;
            for (const auto& sent : corpus) {
                for (std::size_t i = 0; i + 1 < sent.size(); ++i) {
                    bool has_cue = token_matches(sent.tokens[i], cue);
                    bool has_out = token_matches(sent.tokens[i + 1], outcome);
                    if (has_cue && has_out) ++a;
                    else if (has_cue) ++b;
                    else if (has_out) ++cc;
                    else ++d;
                }
            }
            auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
            double want_lr = ratio(a, a + b) - ratio(cc, cc + d);
            double want_rl = ratio(a, a + cc) - ratio(b, b + d);
            if (std::abs(assoc.lr - want_lr) > 1e-12 || std::abs(assoc.rl - want_rl) > 1e-12) {
                c.fail("trial " + std::to_string(trial) + ": stored (" + fmt(assoc.lr) + "," +
                       fmt(assoc.rl) + ") vs brute force (" + fmt(want_lr) + "," + fmt(want_rl) +
                       ") for " + cue.value + " -> " + outcome.value);
                break;
            }
            ++pairs_checked;
        }
    }
    double elapsed = seconds_since(start);
    c.expect(pairs_checked > 1000, "too few stored pairs exercised: " +
                                       std::to_string(pairs_checked));
    c.expect(elapsed < 10.0, "runtime " + fmt(elapsed) + "s exceeds 10s");
    std::printf("  associations checked: %zu across 200 corpora in %.2fs\n", pairs_checked,
                elapsed);
    if (!c.ok) std::printf("  first failure: %s\n", c.why.c_str());
    return c.ok;
}

// --------------------------------------------------------------------------
// 2. Beam search equals exhaustive enumerate-and-filter over every span.

struct OracleEntry {
    std::uint64_t count = 0;
    double total_dp = 0.0;
};

std::vector<int> kind_rank(const std::vector<SlotConstraint>& slots) {
    std::vector<int> r;
    r.reserve(slots.size());
    for (const auto& s : slots) r.push_back(static_cast<int>(s.kind));
    return r;
}

bool criterion2() {
    auto start = std::chrono::steady_clock::now();
    Check c;
    std::size_t stacks_compared = 0, entries_compared = 0;
    const double thresholds[3] = {0.05, 0.1, 0.3};
    for (std::uint64_t seed = 0; seed < 50 && c.ok; ++seed) {
        Rng rng(2000 + seed);
        auto corpus = random_annotated(rng, 30 + static_cast<int>(rng.below(50)), 6, 5, 3);
        SearchParams params{thresholds[seed % 3], 2, 2 + static_cast<int>(seed % 5)};
        AssociationMatrix m = build_matrix(corpus, 1 + seed % 2);

        // Oracle: enumerate every kind assignment over every span, gate each
        // adjacent transition on the stored association, keep one winner per
        // (sentence, start, length) by max dp then lexical kind order, and
        // aggregate winners by slot sequence.
        std::map<std::vector<SlotConstraint>, OracleEntry> want;
        for (const auto& sent : corpus) {
            for (std::size_t begin = 0; begin < sent.size(); ++begin) {
                for (int len = params.min_slots; len <= params.max_slots; ++len) {
                    if (begin + static_cast<std::size_t>(len) > sent.size()) break;
                    std::size_t best = std::size_t(-1);
                    double best_dp = 0.0;
                    std::vector<std::vector<SlotConstraint>> pool;
                    std::vector<int> kinds(static_cast<std::size_t>(len), 0);
                    while (true) {
                        bool ok = true;
                        double dp = 0.0;
                        std::vector<SlotConstraint> slots;
                        for (int j = 0; ok && j < len; ++j) {
                            const AnnotatedToken& tok = sent.tokens[begin + j];
                            SlotConstraint s;
                            switch (kinds[j]) {
                                case 0: s = slot_lex(tok.lex); break;
                                case 1: s = slot_syn(tok.syn); break;
                                default:
                                    if (tok.sem < 0) { ok = false; }
                                    else s = slot_sem(tok.sem);
                            }
                            if (!ok) break;
                            if (j > 0) {
                                auto v = m.lr(slots.back(), s);
                                if (!v || !(*v > params.threshold)) {
                                    ok = false;
                                    break;
                                }
                                dp += *v;
                            }
                            slots.push_back(std::move(s));
                        }
                        if (ok) {
                            pool.push_back(std::move(slots));
                            if (best == std::size_t(-1) || dp > best_dp ||
                                (dp == best_dp &&
                                 kind_rank(pool.back()) < kind_rank(pool[best]))) {
                                best = pool.size() - 1;
                                best_dp = dp;
                            }
                        }
                        int j = len - 1;
                        while (j >= 0 && kinds[j] == 2) kinds[j--] = 0;
                        if (j < 0) break;
                        ++kinds[j];
                    }
                    if (best != std::size_t(-1)) {
                        OracleEntry& e = want[pool[best]];
                        e.count += 1;
                        e.total_dp = std::max(e.total_dp, best_dp);
                    }
                }
            }
        }

        auto ranked = score_stack(collect_candidates(corpus, m, params));
        if (ranked.size() != want.size()) {
            c.fail("seed " + std::to_string(seed) + ": stack size " +
                   std::to_string(ranked.size()) + " vs oracle " + std::to_string(want.size()));
            break;
        }
        for (const auto& entry : ranked) {
            auto it = want.find(entry.slots);
            if (it == want.end()) {
                c.fail("seed " + std::to_string(seed) + ": candidate missing from oracle");
                break;
            }
            if (entry.count != it->second.count ||
                std::abs(entry.total_dp - it->second.total_dp) > 1e-12) {
                c.fail("seed " + std::to_string(seed) + ": count/dp mismatch");
                break;
            }
            ++entries_compared;
        }
        ++stacks_compared;
    }
    double elapsed = seconds_since(start);
    c.expect(entries_compared > 200,
             "too few candidates exercised: " + std::to_string(entries_compared));
    c.expect(elapsed < 60.0, "runtime " + fmt(elapsed) + "s exceeds 60s");
    std::printf("  stacks compared: %zu (%zu candidates) in %.2fs\n", stacks_compared,
                entries_compared, elapsed);
    if (!c.ok) std::printf("  first failure: %s\n", c.why.c_str());
    return c.ok;
}

// --------------------------------------------------------------------------
// 3. Description length: hand arithmetic, monotone cost of dead weight, and
//    the exhaustive-subset selection oracle.

std::vector<AnnotatedSentence> repeated_abc(int reps) {
    std::vector<AnnotatedSentence> out;
    for (int i = 0; i < reps; ++i) {
        AnnotatedSentence s;
        for (const char* w : {"a", "b", "c"}) {
            AnnotatedToken tok;
            tok.lex = w;
            tok.syn = Upos::X;
            tok.sem = -1;
            s.tokens.push_back(std::move(tok));
        }
        out.push_back(std::move(s));
    }
    return out;
}

Construction lex_chain(const std::vector<std::string>& words) {
    Construction c;
    for (const auto& w : words) c.slots.push_back(slot_lex(w));
    return c;
}

bool criterion3() {
    Check c;

    // (a) hand-computed bits on "a b c" x20. Slot kinds and the terminator
    // cost log2(3) each; each word has smoothed probability (20+1)/(60+3).
    {
        auto corpus = repeated_abc(20);
        Constructicon g;
        g.constructions.insert(lex_chain({"a", "b", "c"}));
        MdlScore score = mdl_score(g, corpus, corpus);
        double log2_3 = std::log2(3.0);
        double want_l1 = 4.0 * log2_3 + 3.0 * log2_3;
        // Sole construction holds all usage mass: each covered sentence costs
        // exactly its one flag bit.
        double want_l2 = 20.0;
        c.expect(std::abs(score.l1_bits - want_l1) <= 1e-9,
                 "l1 " + fmt(score.l1_bits) + " vs hand " + fmt(want_l1));
        c.expect(std::abs(score.l2_bits - want_l2) <= 1e-9,
                 "l2 " + fmt(score.l2_bits) + " vs hand " + fmt(want_l2));
        // Empty grammar: every token costs a flag bit plus a 1/3 unigram.
        MdlScore empty = mdl_score(Constructicon{}, corpus, corpus);
        double want_empty = 60.0 * (1.0 + log2_3);
        c.expect(std::abs(empty.total_bits() - want_empty) <= 1e-9,
                 "empty total " + fmt(empty.total_bits()) + " vs hand " + fmt(want_empty));
    }

    // (b) an unused construction is pure dead weight: total strictly rises.
    for (std::uint64_t round = 0; round < 100 && c.ok; ++round) {
        Rng rng(3000 + round);
        auto corpus = random_annotated(rng, 30, 8, 6, 3);
        Constructicon g;
        g.constructions.insert(lex_chain({"w0", "w1"}));
        g.meta.params.min_slots = 2;
        Constructicon g_plus = g;
        g_plus.constructions.insert(lex_chain({"never-a", "never-b"}));
        double before = mdl_score(g, corpus, corpus).total_bits();
        double after = mdl_score(g_plus, corpus, corpus).total_bits();
        c.expect(after > before, "round " + std::to_string(round) + ": unused construction "
                                 "did not increase total bits");
    }

    // (c) grid selection reaches the exhaustive 2^n subset optimum. Chunks of
    // one length with dedicated words and well separated counts keep the
    // candidate stack in utility order, so the optimal subset is reachable.
    int nontrivial = 0;
    static constexpr Upos tags[4] = {Upos::NOUN, Upos::VERB, Upos::ADJ, Upos::ADP};
    for (std::uint64_t seed = 1; seed <= 25 && c.ok; ++seed) {
        Rng rng(seed);
        int n = 4 + static_cast<int>(rng.below(7));
        std::vector<int> reps(static_cast<std::size_t>(n));
        int r = 4;
        for (int k = n - 1; k >= 0; --k) {
            reps[static_cast<std::size_t>(k)] = r;
            r += 5 + static_cast<int>(rng.below(4));
        }
        std::vector<std::array<Upos, 3>> chunk_tags(static_cast<std::size_t>(n));
        for (auto& ct : chunk_tags)
            for (auto& t : ct) t = tags[rng.below(4)];
        auto sentence = [&](int k) {
            AnnotatedSentence s;
            for (int p = 0; p < 3; ++p) {
                AnnotatedToken tok;
                tok.lex = "c" + std::to_string(k) + "_" + std::to_string(p);
                tok.syn = chunk_tags[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)];
                tok.sem = -1;
                s.tokens.push_back(std::move(tok));
            }
            return s;
        };
        std::vector<AnnotatedSentence> train, test;
        for (int k = 0; k < n; ++k) {
            for (int i = 0; i < reps[static_cast<std::size_t>(k)]; ++i)
                train.push_back(sentence(k));
            for (int i = 0; i < (reps[static_cast<std::size_t>(k)] + 3) / 4; ++i)
                test.push_back(sentence(k));
        }
        AssociationMatrix m = build_matrix(train, 2);
        auto ranked = score_stack(collect_candidates(train, m, SearchParams{0.5, 3, 8}));
        if (static_cast<int>(ranked.size()) != n) {
            c.fail("seed " + std::to_string(seed) + ": stack size " +
                   std::to_string(ranked.size()) + " != planted " + std::to_string(n));
            break;
        }
        MdlGrid grid;
        grid.thresholds = {0.5};
        grid.top_ns.clear();
        for (int i = 1; i <= n; ++i) grid.top_ns.push_back(i);
        SelectionResult sel = select_grammar(train, test, m, grid, GrammarParams{}, 1);

        double best = l2_cost(Constructicon{}, test, train);
        unsigned best_mask = 0;
        for (unsigned mask = 1; mask < (1u << n); ++mask) {
            Constructicon g;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) g.constructions.insert(Construction{ranked[i].slots});
            double total = mdl_score(g, train, test).total_bits();
            if (total < best) {
                best = total;
                best_mask = mask;
            }
        }
        if (best_mask != 0 && best_mask != (1u << n) - 1) ++nontrivial;
        if (std::abs(sel.score.total_bits() - best) > 1e-9) {
            c.fail("seed " + std::to_string(seed) + ": selected " +
                   fmt(sel.score.total_bits()) + " bits vs subset optimum " + fmt(best));
            break;
        }
    }
    c.expect(nontrivial >= 20, "subset optima were mostly trivial (" +
                                   std::to_string(nontrivial) + "/25 strict)");
    std::printf("  hand bits, 100 dead-weight cases, 25 subset oracles "
                "(%d with a strict subset optimum)\n", nontrivial);
    if (!c.ok) std::printf("  first failure: %s\n", c.why.c_str());
    return c.ok;
}

// --------------------------------------------------------------------------
// 4. Growth-curve fitting: exact recovery, noisy recovery, CI coverage.

bool criterion4() {
    Check c;
    const double true_alpha = 0.6, true_k = 2.0;
    // Words at fifth powers make k * w^0.6 exactly integral.
    auto noiseless_points = [&]() {
        std::vector<GrowthPoint> pts;
        for (std::uint64_t m = 2; m <= 9; ++m) {
            std::uint64_t w = m * m * m * m * m;
            pts.push_back(GrowthPoint{w, 2 * m * m * m});
        }
        return pts;
    };
    {
        HeapsFit fit = heaps_fit(noiseless_points());
        c.expect(std::abs(fit.alpha - true_alpha) <= 1e-9,
                 "noiseless alpha " + fmt(fit.alpha));
        c.expect(std::abs(std::exp(fit.log_k) - true_k) <= 1e-9,
                 "noiseless k " + fmt(std::exp(fit.log_k)));
        c.expect(fit.rss <= 1e-18, "noiseless rss " + fmt(fit.rss));
    }

    const double sigma = std::log(1.01);
    auto noisy_points = [&](Rng& rng) {
        std::vector<GrowthPoint> pts;
        for (std::uint64_t m = 3; m <= 14; ++m) {
            std::uint64_t w = m * m * m * m * m;
            double v = true_k * std::pow(static_cast<double>(w), true_alpha) *
                       std::exp(sigma * rng.normal());
            pts.push_back(GrowthPoint{w, static_cast<std::uint64_t>(std::llround(v))});
        }
        return pts;
    };
    {
        Rng rng(404);
        HeapsFit fit = heaps_fit(noisy_points(rng));
        c.expect(std::abs(fit.alpha - true_alpha) <= 0.02,
                 "noisy alpha " + fmt(fit.alpha) + " off by more than 0.02");
    }
    int covered = 0;
    Rng rng(4242);
    for (int sim = 0; sim < 1000; ++sim) {
        HeapsFit fit = heaps_fit(noisy_points(rng), 0.95);
        if (fit.ci_low <= true_alpha && true_alpha <= fit.ci_high) ++covered;
    }
    c.expect(covered >= 900, "95% CI covered the true slope in only " +
                                 std::to_string(covered) + "/1000 simulations");
    std::printf("  noiseless exact; noisy within 0.02; CI coverage %d/1000\n", covered);
    if (!c.ok) std::printf("  first failure: %s\n", c.why.c_str());
    return c.ok;
}

// --------------------------------------------------------------------------
// 5. Similarity: the 6-slot rule and metric properties on random grammars.

Constructicon random_grammar(Rng& rng, const std::string& pool, int max_size) {
    Constructicon g;
    g.meta.params.min_slots = 2;
    int size = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_size + 1)));
    static constexpr Upos tags[4] = {Upos::NOUN, Upos::VERB, Upos::ADJ, Upos::DET};
    for (int i = 0; i < size; ++i) {
        Construction cxn;
        int len = 2 + static_cast<int>(rng.below(4));
        for (int s = 0; s < len; ++s) {
            switch (rng.below(3)) {
                case 0:
                    cxn.slots.push_back(slot_lex(pool + std::to_string(rng.below(6))));
                    break;
                case 1: cxn.slots.push_back(slot_syn(tags[rng.below(4)])); break;
                default: cxn.slots.push_back(slot_sem(static_cast<int>(rng.below(4))));
            }
        }
        g.constructions.insert(std::move(cxn));
    }
    return g;
}

double exact_jaccard(const Constructicon& a, const Constructicon& b) {
    std::size_t inter = 0;
    for (const auto& cxn : a.constructions) inter += b.constructions.count(cxn);
    std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

bool criterion5() {
    Check c;

    // Six-slot rule: one differing slot leaves 5/6 shared, above the 0.71
    // bar; two differing slots leave 4/6, below it.
    {
        Construction six = lex_chain({"s1", "s2", "s3", "s4", "s5", "s6"});
        Construction off_one = six, off_two = six;
        off_one.slots[2] = slot_lex("changed");
        off_two.slots[2] = slot_lex("changed");
        off_two.slots[4] = slot_lex("also-changed");
        c.expect(std::abs(fuzzy_similarity(six, off_one) - 5.0 / 6.0) <= 1e-12,
                 "one differing slot is not 5/6");
        c.expect(fuzzy_similarity(six, off_one) >= 0.71, "5/6 fell below the match bar");
        c.expect(fuzzy_similarity(six, off_two) < 0.71, "4/6 reached the match bar");
        Constructicon ga, gb, gc;
        ga.constructions.insert(six);
        gb.constructions.insert(off_one);
        gc.constructions.insert(off_two);
        c.expect(fuzzy_jaccard(ga, gb).value == 1.0, "5/6 pair did not match");
        c.expect(fuzzy_jaccard(ga, gc).value == 0.0, "4/6 pair matched");
    }

    Rng rng(5005);
    int pairs = 0;
    for (int round = 0; round < 1200 && c.ok; ++round) {
        Constructicon a = random_grammar(rng, "x", 6);
        Constructicon b = random_grammar(rng, "x", 6);
        SimilarityScore ab = fuzzy_jaccard(a, b);
        SimilarityScore ba = fuzzy_jaccard(b, a);
        c.expect(ab.value == ba.value && ab.matched == ba.matched, "fuzzy asymmetry");
        c.expect(ab.value >= 0.0 && ab.value <= 1.0, "fuzzy out of range");
        c.expect(ab.value >= exact_jaccard(a, b) - 1e-12, "fuzzy below exact overlap");
        if (a.size() > 0)
            c.expect(fuzzy_jaccard(a, a).value == 1.0, "fuzzy identity violated");

        // Weighted variant over strictly positive background counts.
        std::map<Construction, std::uint64_t> counts;
        for (const auto& cxn : a.constructions) counts[cxn] = 1 + rng.below(9);
        for (const auto& cxn : b.constructions) counts[cxn] = 1 + rng.below(9);
        SimilarityScore wab = weighted_jaccard(a, b, counts);
        SimilarityScore wba = weighted_jaccard(b, a, counts);
        c.expect(wab.value == wba.value, "weighted asymmetry");
        c.expect(wab.value >= 0.0 && wab.value <= 1.0, "weighted out of range");
        if (a.size() > 0)
            c.expect(weighted_jaccard(a, a, counts).value == 1.0,
                     "weighted identity violated");

        // Disjoint lexical alphabets share nothing above the bar.
        Constructicon da = random_grammar(rng, "left", 4);
        Constructicon db = random_grammar(rng, "right", 4);
        Constructicon da_lex, db_lex;
        da_lex.meta.params.min_slots = 2;
        db_lex.meta.params.min_slots = 2;
        for (int i = 0; i < 3; ++i) {
            da_lex.constructions.insert(
                lex_chain({"la" + std::to_string(i), "lb" + std::to_string(i)}));
            db_lex.constructions.insert(
                lex_chain({"ra" + std::to_string(i), "rb" + std::to_string(i)}));
        }
        c.expect(fuzzy_jaccard(da_lex, db_lex).value == 0.0, "disjoint grammars matched");
        std::map<Construction, std::uint64_t> dcounts;
        for (const auto& cxn : da_lex.constructions) dcounts[cxn] = 2;
        for (const auto& cxn : db_lex.constructions) dcounts[cxn] = 2;
        c.expect(weighted_jaccard(da_lex, db_lex, dcounts).value == 0.0,
                 "disjoint weighted overlap nonzero");
        (void)da;
        (void)db;
        ++pairs;
    }
    std::printf("  6-slot rule plus %d random grammar pairs\n", pairs);
    if (!c.ok) std::printf("  first failure: %s\n", c.why.c_str());
    return c.ok;
}

// --------------------------------------------------------------------------
// 6. Unentrenchment: exact decay bookkeeping at both API levels.

RawSentence words(const std::vector<std::string>& ws) {
    RawSentence s;
    for (const auto& w : ws) s.tokens.push_back({w, Upos::X});
    return s;
}

bool criterion6() {
    Check c;

    // Direct activation bookkeeping: an always-observed construction holds
    // weight exactly 1.0; a never-observed one dies on its fifth miss.
    {
        Construction alive = lex_chain({"keep-a", "keep-b"});
        Construction doomed = lex_chain({"drop-a", "drop-b"});
        ActivationState state;
        state.weights[alive] = 1.0;
        state.weights[doomed] = 1.0;
        for (int step = 1; step <= 20 && c.ok; ++step) {
            unentrench_step(state, {alive});
            c.expect(state.weights.at(alive) == 1.0, "observed weight drifted from 1.0");
            if (step < 5) {
                c.expect(state.weights.count(doomed) == 1 &&
                             state.weights.at(doomed) == 1.0 - 0.25 * step,
                         "decay schedule broke at step " + std::to_string(step));
            } else {
                c.expect(state.weights.count(doomed) == 0 && state.removed.count(doomed) == 1,
                         "unobserved construction not removed at step 5");
            }
        }
    }

    // Protocol level: a planted-disappearance stream. P1 occurs in every
    // increment, P2 only in the first three, P3 never. The trace must equal
    // an independently simulated weight table, step for step.
    {
        Construction p1 = lex_chain({"p1a", "p1b"});
        Construction p2 = lex_chain({"p2a", "p2b"});
        Construction p3 = lex_chain({"p3a", "p3b"});
        Constructicon merged;
        merged.meta.params.min_slots = 2;
        merged.constructions = {p1, p2, p3};

        // Increment = 20 words = 4 sentences of 5 words.
        std::vector<std::pair<std::string, std::vector<RawSentence>>> streams(1);
        streams[0].first = "stream";
        int filler = 0;
        for (int inc = 1; inc <= 10; ++inc) {
            for (int s = 0; s < 4; ++s) {
                std::vector<std::string> ws;
                if (s == 0) {
                    ws = {"p1a", "p1b"};
                    if (inc <= 3) {
                        ws.push_back("p2a");
                        ws.push_back("p2b");
                        ws.push_back("u" + std::to_string(filler++));
                    } else {
                        for (int f = 0; f < 3; ++f)
                            ws.push_back("u" + std::to_string(filler++));
                    }
                } else {
                    for (int f = 0; f < 5; ++f) ws.push_back("u" + std::to_string(filler++));
                }
                streams[0].second.push_back(words(ws));
            }
        }
        UnentrenchParams params;
        params.increment = 20;
        params.increments = 10;
        UnentrenchResult result = run_unentrenchment(merged, streams, nullptr, params);

        // Hand simulation of the same schedule.
        std::map<std::string, double> weights{{"p1", 1.0}, {"p2", 1.0}, {"p3", 1.0}};
        std::vector<std::uint64_t> live_want;
        for (int inc = 1; inc <= 10; ++inc) {
            std::set<std::string> observed{"p1"};
            if (inc <= 3) observed.insert("p2");
            for (auto it = weights.begin(); it != weights.end();) {
                if (observed.count(it->first)) {
                    it->second = 1.0;
                    ++it;
                } else {
                    it->second -= 0.25;
                    if (it->second < 0.0) it = weights.erase(it);
                    else ++it;
                }
            }
            live_want.push_back(weights.size());
        }

        c.expect(result.trace.points.size() == live_want.size(), "trace length mismatch");
        for (std::size_t i = 0; i < live_want.size() && c.ok; ++i) {
            const PrunePoint& p = result.trace.points[i];
            c.expect(p.increment == i + 1 && p.words_seen == 20 * (i + 1),
                     "trace bookkeeping wrong at increment " + std::to_string(i + 1));
            c.expect(p.live == live_want[i],
                     "live count " + std::to_string(p.live) + " vs hand table " +
                         std::to_string(live_want[i]) + " at increment " +
                         std::to_string(i + 1));
        }
        c.expect(result.final_grammar.contains(p1), "always-observed construction dropped");
        c.expect(!result.final_grammar.contains(p2) && !result.final_grammar.contains(p3),
                 "disappeared constructions survived");
        for (std::size_t i = 1; i < result.trace.points.size(); ++i)
            c.expect(result.trace.points[i].live <= result.trace.points[i - 1].live,
                     "trace not monotone");
    }

    // Monotonicity holds under random observation schedules too.
    for (std::uint64_t seed = 0; seed < 10 && c.ok; ++seed) {
        Rng rng(6000 + seed);
        Constructicon merged;
        merged.meta.params.min_slots = 2;
        std::vector<Construction> cxns;
        for (int i = 0; i < 6; ++i) {
            cxns.push_back(lex_chain({"k" + std::to_string(i) + "a",
                                      "k" + std::to_string(i) + "b"}));
            merged.constructions.insert(cxns.back());
        }
        std::vector<std::pair<std::string, std::vector<RawSentence>>> streams(1);
        streams[0].first = "r";
        for (int s = 0; s < 120; ++s) {
            std::vector<std::string> ws;
            for (int i = 0; i < 6; ++i)
                if (rng.below(4) == 0) {
                    ws.push_back("k" + std::to_string(i) + "a");
                    ws.push_back("k" + std::to_string(i) + "b");
                }
            while (ws.size() < 6) ws.push_back("z" + std::to_string(rng.below(50)));
            streams[0].second.push_back(words(ws));
        }
        UnentrenchParams params;
        params.increment = 40;
        params.increments = 15;
        UnentrenchResult result = run_unentrenchment(merged, streams, nullptr, params);
        for (std::size_t i = 1; i < result.trace.points.size(); ++i)
            c.expect(result.trace.points[i].live <= result.trace.points[i - 1].live,
                     "random-schedule trace not monotone (seed " + std::to_string(seed) + ")");
    }
    std::printf("  decay table exact; planted trace equals hand simulation\n");
    if (!c.ok) std::printf("  first failure: %s\n", c.why.c_str());
    return c.ok;
}

// --------------------------------------------------------------------------
// 7. Determinism of the command-line learner on the bundled sample.

#ifndef CXGLAB_BIN
#define CXGLAB_BIN ""
#endif
#ifndef SAMPLE_DIR
#define SAMPLE_DIR ""
#endif

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSampleFlags =
    " --k 100 --seed 13 --thresholds 0.3,0.9"
    " --top-ns 25,50,75,100,150,200,300,400,600,800,1200,1600,2400,3200,-1";

bool criterion7() {
    Check c;
    fs::path sample(SAMPLE_DIR);
    if (!fs::exists(sample / "register_a.tagged")) {
        std::printf("  missing bundled sample at %s (generate with make_sample)\n",
                    sample.string().c_str());
        return false;
    }
    fs::path dir = fs::temp_directory_path() / "cxg-acceptance-7";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string base = std::string(CXGLAB_BIN) + " learn " +
                       (sample / "register_a.tagged").string() + " --embeddings " +
                       (sample / "embeddings.vec").string() + kSampleFlags;
    auto run = [&](const std::string& name, int jobs) {
        std::string cmd = base + " --jobs " + std::to_string(jobs) + " --out " +
                          (dir / name).string() + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    c.expect(run("g1.json", 1), "first learn run failed");
    c.expect(run("g2.json", 1), "second learn run failed");
    c.expect(run("g4.json", 4), "jobs-4 learn run failed");
    if (c.ok) {
        std::string g1 = slurp(dir / "g1.json");
        c.expect(!g1.empty(), "empty grammar file");
        c.expect(g1 == slurp(dir / "g2.json"), "reruns differ byte for byte");
        c.expect(g1 == slurp(dir / "g4.json"), "jobs 1 vs 4 differ byte for byte");
        Constructicon g = load_grammar(dir / "g1.json");
        c.expect(g.size() > 0, "learned grammar is empty");
        std::printf("  three runs byte-identical; %zu constructions\n", g.size());
    }
    if (!c.ok) std::printf("  first failure: %s\n", c.why.c_str());
    return c.ok;
}

// --------------------------------------------------------------------------
// 8. Directional replication on the bundled two-register sample.

bool criterion8() {
    auto start = std::chrono::steady_clock::now();
    Check c;
    fs::path sample(SAMPLE_DIR);
    if (!fs::exists(sample / "register_a.tagged")) {
        std::printf("  missing bundled sample at %s (generate with make_sample)\n",
                    sample.string().c_str());
        return false;
    }

    Corpus reg_a = load_corpus(sample / "register_a.tagged", CorpusFormat::tagged);
    Corpus reg_b = load_corpus(sample / "register_b.tagged", CorpusFormat::tagged);
    EmbeddingTable table = load_embeddings(sample / "embeddings.vec");
    SemanticLexicon lexicon = build_semantic_lexicon(table, 100, 13);

    LearnParams params;
    params.increment = 100000;
    params.max_words = 1000000;
    params.grid.thresholds = {0.3, 0.9};
    params.grid.top_ns = {25,  50,  75,  100,  150,  200,  300, 400,
                          600, 800, 1200, 1600, 2400, 3200, -1};
    params.jobs = 4;

    PrefixGrammars pa = learn_prefix_grammars(reg_a.sentences, &lexicon, params, "und", "a");
    PrefixGrammars pb = learn_prefix_grammars(reg_b.sentences, &lexicon, params, "und", "b");

    bool all_directions = true;
    for (const PrefixGrammars* p : {&pa, &pb}) {
        std::vector<GrowthPoint> lex_points, gram_points;
        for (std::size_t i = 0; i < p->words.size(); ++i) {
            lex_points.push_back(GrowthPoint{p->words[i], p->lexicon_sizes[i]});
            gram_points.push_back(
                GrowthPoint{p->words[i], p->selections[i].grammar.size()});
        }
        HeapsFit lex_fit = heaps_fit(lex_points);
        HeapsFit gram_fit = heaps_fit(gram_points);
        double lex_burst = initial_burst(lex_points);
        double gram_burst = initial_burst(gram_points);
        bool disjoint = ci_disjoint(lex_fit, gram_fit);
        bool burst_dir = gram_burst < lex_burst;
        std::printf("  register %s: lexicon alpha %.3f [%.3f, %.3f], grammar alpha %.3f "
                    "[%.3f, %.3f], %s\n",
                    p->register_label.c_str(), lex_fit.alpha, lex_fit.ci_low, lex_fit.ci_high,
                    gram_fit.alpha, gram_fit.ci_low, gram_fit.ci_high,
                    disjoint ? "disjoint" : "OVERLAP");
        std::printf("  register %s: initial burst lexicon %.1f%% vs grammar %.1f%% (%s)\n",
                    p->register_label.c_str(), lex_burst, gram_burst,
                    burst_dir ? "grammar steadier" : "WRONG DIRECTION");
        if (!disjoint) c.fail("alpha intervals overlap for register " + p->register_label);
        if (!burst_dir) c.fail("grammar burst not below lexicon burst for register " +
                               p->register_label);
        all_directions = all_directions && disjoint && burst_dir;
    }

    std::size_t increments = std::min(pa.selections.size(), pb.selections.size());
    std::vector<double> curve;
    for (std::size_t t = 0; t < increments; ++t)
        curve.push_back(
            fuzzy_jaccard(pa.selections[t].grammar, pb.selections[t].grammar, 0.71, 4).value);
    std::printf("  convergence:");
    for (double v : curve) std::printf(" %.3f", v);
    std::printf("\n");
    c.expect(increments >= 2, "need at least the 200k point");
    if (increments >= 2)
        c.expect(curve.back() >= curve[1],
                 "convergence at max exposure " + fmt(curve.back()) + " fell below the 200k value " +
                     fmt(curve[1]));

    double elapsed = seconds_since(start);
    c.expect(elapsed < 900.0, "runtime " + fmt(elapsed) + "s exceeds 15 minutes");
    std::printf("  %zu increments per register in %.1fs\n", increments, elapsed);
    if (!c.ok) std::printf("  first failure: %s\n", c.why.c_str());
    return c.ok;
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int number;
        const char* label;
        bool (*run)();
    };
    const Criterion battery[] = {
        {1, "adjacent-pair associations equal brute-force contingencies", criterion1},
        {2, "beam search equals exhaustive span enumeration", criterion2},
        {3, "description length: hand bits, dead weight, subset oracle", criterion3},
        {4, "growth-curve fitting: exact, noisy, and CI coverage", criterion4},
        {5, "similarity: 6-slot rule and metric properties", criterion5},
        {6, "unentrenchment matches the hand-simulated weight table", criterion6},
        {7, "command-line learner is byte-deterministic", criterion7},
        {8, "directional replication on the bundled sample", criterion8},
    };

    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > 8) {
            std::fprintf(stderr, "usage: %s [1-8]\n", argv[0]);
            return 2;
        }
    }

    bool all_ok = true;
    for (const Criterion& cr : battery) {
        if (only && cr.number != only) continue;
        bool ok = cr.run();
        std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", cr.number, cr.label);
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
