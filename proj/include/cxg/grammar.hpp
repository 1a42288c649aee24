#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cxg/annotate.hpp"
#include "cxg/error.hpp"
#include "cxg/parallel.hpp"
#include "cxg/slot.hpp"

namespace cxg {

// Settings a grammar was learned under; carried in its metadata so a stored
// grammar is reproducible.
struct GrammarParams {
    double threshold = 0.1;
    int min_slots = 3;
    int max_slots = 8;
    long long top_n = -1;  // -1 = unrestricted
    int k = 100;
    std::uint64_t seed = 13;
    std::uint64_t min_pair_count = 3;

    bool operator==(const GrammarParams&) const = default;
};

inline nlohmann::json to_json(const GrammarParams& p) {
    return nlohmann::json{
        {"threshold", p.threshold},   {"min_slots", p.min_slots},
        {"max_slots", p.max_slots},   {"top_n", p.top_n},
        {"k", p.k},                   {"seed", p.seed},
        {"min_pair_count", p.min_pair_count},
    };
}

inline GrammarParams params_from_json(const nlohmann::json& j) {
    GrammarParams p;
    p.threshold = j.value("threshold", p.threshold);
    p.min_slots = j.value("min_slots", p.min_slots);
    p.max_slots = j.value("max_slots", p.max_slots);
    p.top_n = j.value("top_n", p.top_n);
    p.k = j.value("k", p.k);
    p.seed = j.value("seed", p.seed);
    p.min_pair_count = j.value("min_pair_count", p.min_pair_count);
    return p;
}

// An ordered sequence of slot constraints. Ordering is lexicographic slot by
// slot (kind, then value), with a strict prefix sorting first.
struct Construction {
    std::vector<SlotConstraint> slots;

    std::size_t size() const { return slots.size(); }
    auto operator<=>(const Construction&) const = default;
};

struct ConstructiconMeta {
    std::string language = "und";
    std::string register_label;
    std::uint64_t exposure_words = 0;
    GrammarParams params;
    std::string created;  // empty unless a timestamp was explicitly requested
    std::string lexicon_digest;
};

// A learned grammar: a set of constructions plus provenance.
struct Constructicon {
    std::set<Construction> constructions;
    ConstructiconMeta meta;

    std::size_t size() const { return constructions.size(); }
    bool contains(const Construction& c) const { return constructions.count(c) > 0; }
};

namespace detail {

// Compiled slot: value pre-parsed for O(1) token tests. Unparseable SYN/SEM
// values (possible in hand-built constructions) compile to never-match.
struct CompiledSlot {
    SlotKind kind;
    std::string lex;
    Upos syn = Upos::X;
    std::int32_t sem = -2;
    bool never = false;

    static CompiledSlot compile(const SlotConstraint& s) {
        CompiledSlot c;
        c.kind = s.kind;
        switch (s.kind) {
            case SlotKind::lex: c.lex = s.value; break;
            case SlotKind::syn: {
                auto tag = parse_upos(s.value);
                if (tag)
                    c.syn = *tag;
                else
                    c.never = true;
                break;
            }
            case SlotKind::sem: {
                auto v = parse_sem_value(s.value);
                if (v)
                    c.sem = *v;
                else
                    c.never = true;
                break;
            }
        }
        return c;
    }
};

// Shared-prefix automaton over construction slot sequences. A token can
// satisfy at most one child per kind, so each step branches at most three
// ways regardless of grammar size.
class GrammarMatcher {
public:
    explicit GrammarMatcher(std::span<const Construction> ordered) { build(ordered); }
    explicit GrammarMatcher(const Constructicon& grammar) {
        std::vector<Construction> ordered(grammar.constructions.begin(),
                                          grammar.constructions.end());
        build(ordered);
        owned_ = std::move(ordered);
    }

    std::size_t size() const { return count_; }
    const Construction& at(std::size_t ordinal) const {
        return owned_.empty() ? *external_[ordinal] : owned_[ordinal];
    }

    // cb(ordinal, slot_count) for every construction matching at start.
    template <class Cb>
    void match_at(const AnnotatedSentence& sent, std::size_t start, Cb&& cb) const {
        if (nodes_.empty()) return;
        walk(0, sent, start, 0, cb);
    }

private:
    struct Node {
        std::unordered_map<std::string, std::int32_t> lex;
        std::array<std::int32_t, kUposCount> syn;
        std::unordered_map<std::int32_t, std::int32_t> sem;
        std::int32_t terminal = -1;
        Node() { syn.fill(-1); }
    };

    void build(std::span<const Construction> ordered) {
        count_ = ordered.size();
        nodes_.emplace_back();
        external_.reserve(ordered.size());
        for (std::size_t ord = 0; ord < ordered.size(); ++ord) {
            external_.push_back(&ordered[ord]);
            std::int32_t node = 0;
            for (const SlotConstraint& slot : ordered[ord].slots) {
                CompiledSlot c = CompiledSlot::compile(slot);
                // fresh() may reallocate nodes_: take no Node reference across it.
                std::int32_t next = -1;
                if (c.never) {
                    next = fresh();  // dead branch: reachable by no token
                    nodes_[static_cast<std::size_t>(node)].sem.emplace(-0x7fffffff, next);
                    node = next;
                    continue;
                }
                switch (c.kind) {
                    case SlotKind::lex: {
                        auto it = nodes_[static_cast<std::size_t>(node)].lex.find(c.lex);
                        if (it != nodes_[static_cast<std::size_t>(node)].lex.end())
                            next = it->second;
                        else {
                            next = fresh();
                            nodes_[static_cast<std::size_t>(node)].lex.emplace(c.lex, next);
                        }
                        break;
                    }
                    case SlotKind::syn: {
                        std::int32_t existing =
                            nodes_[static_cast<std::size_t>(node)].syn[static_cast<int>(c.syn)];
                        if (existing >= 0)
                            next = existing;
                        else {
                            next = fresh();
                            nodes_[static_cast<std::size_t>(node)].syn[static_cast<int>(c.syn)] =
                                next;
                        }
                        break;
                    }
                    case SlotKind::sem: {
                        auto it = nodes_[static_cast<std::size_t>(node)].sem.find(c.sem);
                        if (it != nodes_[static_cast<std::size_t>(node)].sem.end())
                            next = it->second;
                        else {
                            next = fresh();
                            nodes_[static_cast<std::size_t>(node)].sem.emplace(c.sem, next);
                        }
                        break;
                    }
                }
                node = next;
            }
            nodes_[static_cast<std::size_t>(node)].terminal = static_cast<std::int32_t>(ord);
        }
    }

    std::int32_t fresh() {
        nodes_.emplace_back();
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    template <class Cb>
    void walk(std::int32_t node, const AnnotatedSentence& sent, std::size_t pos,
              std::size_t depth, Cb&& cb) const {
        const Node& n = nodes_[static_cast<std::size_t>(node)];
        if (n.terminal >= 0) cb(static_cast<std::size_t>(n.terminal), depth);
        if (pos >= sent.size()) return;
        const AnnotatedToken& tok = sent.tokens[pos];
        if (!n.lex.empty()) {
            auto it = n.lex.find(tok.lex);
            if (it != n.lex.end()) walk(it->second, sent, pos + 1, depth + 1, cb);
        }
        std::int32_t syn_next = n.syn[static_cast<int>(tok.syn)];
        if (syn_next >= 0) walk(syn_next, sent, pos + 1, depth + 1, cb);
        if (tok.sem >= 0 && !n.sem.empty()) {
            auto it = n.sem.find(tok.sem);
            if (it != n.sem.end()) walk(it->second, sent, pos + 1, depth + 1, cb);
        }
    }

    std::vector<Node> nodes_;
    std::vector<Construction> owned_;
    std::vector<const Construction*> external_;
    std::size_t count_ = 0;
};

}  // namespace detail

struct MatchEvent {
    std::uint64_t sentence_index = 0;
    std::uint32_t start = 0;
    const Construction* construction = nullptr;
};

// Every (start, construction) pair where the construction's slots match the
// consecutive tokens beginning at start. Overlaps are all reported. Output
// order: start ascending, then construction order.
inline std::vector<MatchEvent> match_spans(const AnnotatedSentence& sentence,
                                           const Constructicon& grammar,
                                           std::uint64_t sentence_index = 0) {
    detail::GrammarMatcher matcher(grammar);
    std::vector<MatchEvent> events;
    std::vector<std::pair<std::size_t, std::size_t>> here;  // (ordinal, len)
    for (std::size_t start = 0; start < sentence.size(); ++start) {
        here.clear();
        matcher.match_at(sentence, start, [&](std::size_t ord, std::size_t len) {
            here.emplace_back(ord, len);
        });
        std::sort(here.begin(), here.end());
        for (auto [ord, len] : here)
            events.push_back(MatchEvent{sentence_index, static_cast<std::uint32_t>(start),
                                        &matcher.at(ord)});
    }
    // Rebind construction pointers into the grammar's own set so they outlive
    // the local matcher.
    for (auto& e : events) e.construction = &*grammar.constructions.find(*e.construction);
    return events;
}

namespace detail {

// Match totals per construction ordinal over a corpus; all overlapping
// occurrences count.
inline std::vector<std::uint64_t> count_matches(const GrammarMatcher& matcher,
                                                std::span<const AnnotatedSentence> corpus,
                                                int jobs = 1) {
    std::vector<std::vector<std::uint64_t>> blocks(
        static_cast<std::size_t>(jobs < 1 ? 1 : jobs),
        std::vector<std::uint64_t>(matcher.size(), 0));
    parallel_blocks(corpus.size(), jobs, [&](std::size_t b, std::size_t begin, std::size_t end) {
        auto& counts = blocks[b];
        for (std::size_t s = begin; s < end; ++s)
            for (std::size_t start = 0; start < corpus[s].size(); ++start)
                matcher.match_at(corpus[s], start,
                                 [&](std::size_t ord, std::size_t) { ++counts[ord]; });
    });
    std::vector<std::uint64_t> total(matcher.size(), 0);
    for (const auto& b : blocks)
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += b[i];
    return total;
}

}  // namespace detail

// Occurrence counts over a corpus, all overlapping matches included.
inline std::map<Construction, std::uint64_t> count_tokens(const Constructicon& grammar,
                                                          std::span<const AnnotatedSentence> corpus,
                                                          int jobs = 1) {
    std::vector<Construction> ordered(grammar.constructions.begin(), grammar.constructions.end());
    detail::GrammarMatcher matcher{std::span<const Construction>(ordered)};
    std::vector<std::uint64_t> counts = detail::count_matches(matcher, corpus, jobs);
    std::map<Construction, std::uint64_t> out;
    for (std::size_t i = 0; i < ordered.size(); ++i) out.emplace(ordered[i], counts[i]);
    return out;
}

// Union of constructions. Inputs must share a language and semantic lexicon;
// exposure is additive; the first grammar's params are carried.
inline Constructicon merge_grammars(std::span<const Constructicon> grammars) {
    if (grammars.empty()) throw std::invalid_argument("nothing to merge");
    Constructicon merged;
    merged.meta = grammars.front().meta;
    merged.meta.created.clear();
    merged.meta.exposure_words = 0;
    for (const auto& g : grammars) {
        if (g.meta.language != merged.meta.language)
            throw std::invalid_argument("cannot merge grammars for different languages: " +
                                        merged.meta.language + " vs " + g.meta.language);
        if (g.meta.lexicon_digest != merged.meta.lexicon_digest)
            throw std::invalid_argument("cannot merge grammars built on different semantic lexicons");
        merged.meta.exposure_words += g.meta.exposure_words;
        merged.constructions.insert(g.constructions.begin(), g.constructions.end());
    }
    merged.meta.register_label = "merged";
    return merged;
}

// Canonical text form: one header object, then one JSON array per
// construction in canonical order, newline-terminated. Key order inside
// objects is alphabetical, so equal grammars serialize to equal bytes.
inline std::string serialize(const Constructicon& grammar) {
    nlohmann::json header{
        {"type", "constructicon"},
        {"version", 1},
        {"language", grammar.meta.language},
        {"register", grammar.meta.register_label},
        {"exposure_words", grammar.meta.exposure_words},
        {"params", to_json(grammar.meta.params)},
        {"created", grammar.meta.created},
        {"lexicon_digest", grammar.meta.lexicon_digest},
    };
    std::string out = header.dump();
    out += '\n';
    for (const Construction& c : grammar.constructions) {
        nlohmann::json line = nlohmann::json::array();
        for (const SlotConstraint& s : c.slots)
            line.push_back({{"kind", std::string(to_string(s.kind))}, {"value", s.value}});
        out += line.dump();
        out += '\n';
    }
    return out;
}

inline Constructicon deserialize(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty grammar file", 0);
    ++line_no;

    Constructicon grammar;
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad grammar header: ") + e.what(), line_no);
    }
    if (!header.is_object() || header.value("type", "") != "constructicon")
        throw ParseError("not a constructicon file", line_no);
    if (header.value("version", 0) != 1)
        throw ParseError("unsupported constructicon version", line_no);
    grammar.meta.language = header.value("language", "und");
    grammar.meta.register_label = header.value("register", "");
    grammar.meta.exposure_words = header.value("exposure_words", std::uint64_t{0});
    grammar.meta.created = header.value("created", "");
    grammar.meta.lexicon_digest = header.value("lexicon_digest", "");
    if (header.contains("params")) grammar.meta.params = params_from_json(header["params"]);

    const int min_len = std::max(2, grammar.meta.params.min_slots);
    const int max_len = grammar.meta.params.max_slots;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json arr;
        try {
            arr = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad construction line: ") + e.what(), line_no);
        }
        if (!arr.is_array()) throw ParseError("construction line must be a JSON array", line_no);
        Construction c;
        for (const auto& item : arr) {
            if (!item.is_object() || !item.contains("kind") || !item.contains("value"))
                throw ParseError("slot must be an object with kind and value", line_no);
            auto kind = parse_slot_kind(item["kind"].get<std::string>());
            if (!kind) throw ParseError("unknown slot kind", line_no);
            std::string value = item["value"].get<std::string>();
            if (*kind == SlotKind::syn && !parse_upos(value))
                throw ParseError("unknown UPOS tag '" + value + "'", line_no);
            if (*kind == SlotKind::sem && !parse_sem_value(value))
                throw ParseError("SEM value must be a non-negative integer", line_no);
            c.slots.push_back(SlotConstraint{*kind, std::move(value)});
        }
        if (static_cast<int>(c.size()) < min_len || static_cast<int>(c.size()) > max_len)
            throw ParseError("construction length " + std::to_string(c.size()) +
                                 " outside [" + std::to_string(min_len) + ", " +
                                 std::to_string(max_len) + "]",
                             line_no);
        if (!grammar.constructions.insert(std::move(c)).second)
            throw ParseError("duplicate construction", line_no);
    }
    return grammar;
}

inline void save_grammar(const Constructicon& grammar, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write grammar file: " + path.string());
    std::string text = serialize(grammar);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ParseError("write failed: " + path.string());
}

inline Constructicon load_grammar(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open grammar file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

}  // namespace cxg
