#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cxg/error.hpp"

namespace cxg {

// Universal POS tag set. X doubles as the tag for untagged (plain) input.
enum class Upos : std::uint8_t {
    ADJ, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM,
    PART, PRON, PROPN, PUNCT, SCONJ, SYM, VERB, X,
};

inline constexpr int kUposCount = 17;

inline std::string_view to_string(Upos t) {
    static constexpr std::string_view names[kUposCount] = {
        "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
        "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
    };
    return names[static_cast<int>(t)];
}

inline std::optional<Upos> parse_upos(std::string_view s) {
    for (int i = 0; i < kUposCount; ++i)
        if (to_string(static_cast<Upos>(i)) == s) return static_cast<Upos>(i);
    return std::nullopt;
}

struct RawToken {
    std::string surface;
    Upos upos = Upos::X;
    bool operator==(const RawToken&) const = default;
};

struct RawSentence {
    std::vector<RawToken> tokens;
    std::uint64_t word_count() const { return tokens.size(); }
    bool operator==(const RawSentence&) const = default;
};

struct Corpus {
    std::vector<RawSentence> sentences;
    std::vector<std::string> warnings;

    std::uint64_t word_count() const {
        std::uint64_t n = 0;
        for (const auto& s : sentences) n += s.word_count();
        return n;
    }
};

enum class CorpusFormat { tagged, plain };

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline bool has_space(std::string_view s) {
    return s.find_first_of(" \t") != std::string_view::npos;
}

}  // namespace detail

// Tagged format: one "surface<TAB>UPOS" token per line, blank line ends a
// sentence. Plain format: one sentence per line, whitespace-separated tokens,
// every token tagged X (degraded lexicon-only mode, reported as a warning).
inline Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open corpus file: " + path.string());

    Corpus corpus;
    RawSentence current;
    std::string line;
    std::size_t line_no = 0;

    auto flush = [&] {
        if (!current.tokens.empty()) {
            corpus.sentences.push_back(std::move(current));
            current = {};
        }
    };

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::trim(line);
        if (format == CorpusFormat::tagged) {
            if (sv.empty()) {
                flush();
                continue;
            }
            std::size_t tab = sv.find('\t');
            if (tab == std::string_view::npos)
                throw ParseError("expected surface<TAB>UPOS", line_no);
            std::string_view surface = detail::trim(sv.substr(0, tab));
            std::string_view tag = detail::trim(sv.substr(tab + 1));
            if (surface.empty()) throw ParseError("empty surface form", line_no);
            if (detail::has_space(surface) || detail::has_space(tag))
                throw ParseError("expected exactly two tab-separated fields", line_no);
            std::optional<Upos> upos = parse_upos(tag);
            if (!upos) throw ParseError("unknown UPOS tag '" + std::string(tag) + "'", line_no);
            current.tokens.push_back({std::string(surface), *upos});
        } else {
            if (sv.empty()) continue;
            RawSentence sentence;
            std::size_t pos = 0;
            while (pos < sv.size()) {
                while (pos < sv.size() && (sv[pos] == ' ' || sv[pos] == '\t')) ++pos;
                std::size_t start = pos;
                while (pos < sv.size() && sv[pos] != ' ' && sv[pos] != '\t') ++pos;
                if (pos > start)
                    sentence.tokens.push_back({std::string(sv.substr(start, pos - start)), Upos::X});
            }
            if (!sentence.tokens.empty()) corpus.sentences.push_back(std::move(sentence));
        }
    }
    if (format == CorpusFormat::tagged) flush();

    if (corpus.sentences.empty())
        throw InsufficientDataError("corpus is empty: " + path.string());
    if (format == CorpusFormat::plain)
        corpus.warnings.push_back(
            "plain input has no POS layer; syntactic slots degraded to tag X (lexicon-only mode)");
    return corpus;
}

// Contiguous run of sentences covering words [start_word, end_word) of the
// source corpus, in corpus order.
struct CorpusSlice {
    std::string register_label;
    std::uint64_t start_word = 0;
    std::uint64_t end_word = 0;
    std::vector<RawSentence> sentences;

    std::uint64_t word_count() const { return end_word - start_word; }
};

// Cuts the corpus into exposure increments. Slice i (1-based) ends at the
// first sentence boundary at or past the absolute target i*increment, so
// sentences are never split. Returns min(floor(total/increment),
// floor(max_words/increment)) slices; words past the last target are unused.
inline std::vector<CorpusSlice> slice_increments(std::span<const RawSentence> sentences,
                                                 std::uint64_t increment,
                                                 std::uint64_t max_words,
                                                 std::string register_label = "") {
    if (increment == 0) throw std::invalid_argument("increment must be positive");
    if (max_words < increment)
        throw std::invalid_argument("max_words must be at least one increment");

    std::uint64_t total = 0;
    for (const auto& s : sentences) total += s.word_count();
    std::uint64_t n_slices = std::min(total / increment, max_words / increment);
    if (n_slices == 0)
        throw InsufficientDataError("corpus has " + std::to_string(total) +
                                    " words; at least " + std::to_string(increment) +
                                    " needed for one increment");

    std::vector<CorpusSlice> slices;
    slices.reserve(n_slices);
    std::uint64_t cumulative = 0;
    std::size_t next_sentence = 0;
    for (std::uint64_t i = 1; i <= n_slices; ++i) {
        CorpusSlice slice;
        slice.register_label = register_label;
        slice.start_word = cumulative;
        std::uint64_t target = i * increment;
        while (cumulative < target) {
            slice.sentences.push_back(sentences[next_sentence]);
            cumulative += sentences[next_sentence].word_count();
            ++next_sentence;
        }
        slice.end_word = cumulative;
        slices.push_back(std::move(slice));
    }
    return slices;
}

struct TrainTestSplit {
    std::vector<RawSentence> train;
    std::vector<RawSentence> test;
};

// Held-out stride for a test fraction: every stride-th sentence (1-based
// position) is test. Membership depends only on a sentence's absolute
// position, so extending the corpus never reassigns earlier sentences.
inline std::uint64_t test_stride(double test_fraction) {
    if (!(test_fraction > 0.0) || !(test_fraction <= 0.5))
        throw std::invalid_argument("test_fraction must be in (0, 0.5]");
    return static_cast<std::uint64_t>(1.0 / test_fraction);
}

inline bool is_test_sentence(std::size_t index_zero_based, std::uint64_t stride) {
    return (index_zero_based + 1) % stride == 0;
}

inline TrainTestSplit split_train_test(std::span<const RawSentence> sentences,
                                       double test_fraction = 0.1) {
    std::uint64_t stride = test_stride(test_fraction);
    if (sentences.size() < 10)
        throw InsufficientDataError("need at least 10 sentences to split, got " +
                                    std::to_string(sentences.size()));
    TrainTestSplit split;
    for (std::size_t i = 0; i < sentences.size(); ++i)
        (is_test_sentence(i, stride) ? split.test : split.train).push_back(sentences[i]);
    return split;
}

}  // namespace cxg
