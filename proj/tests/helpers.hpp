#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cxg/cxg.hpp"

namespace testutil {

inline std::filesystem::path write_temp_file(const std::string& stem,
                                             const std::string& content) {
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() / "cxg-tests";
    std::filesystem::create_directories(dir);
    auto path = dir / (stem + "-" + std::to_string(counter++) + ".tmp");
    std::ofstream out(path, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    return path;
}

// "the dog barked" -> one sentence of X-tagged tokens.
inline cxg::RawSentence sent(const std::string& space_separated,
                             cxg::Upos tag = cxg::Upos::X) {
    cxg::RawSentence s;
    std::istringstream in(space_separated);
    std::string w;
    while (in >> w) s.tokens.push_back({w, tag});
    return s;
}

inline std::vector<cxg::RawSentence> corpus_of(const std::vector<std::string>& sentences,
                                               cxg::Upos tag = cxg::Upos::X) {
    std::vector<cxg::RawSentence> out;
    for (const auto& s : sentences) out.push_back(sent(s, tag));
    return out;
}

// "the:DET:4 dog:NOUN cat:NOUN:7" -> annotated tokens; sem defaults to -1.
inline cxg::AnnotatedSentence asent(const std::string& spec) {
    cxg::AnnotatedSentence s;
    std::istringstream in(spec);
    std::string item;
    while (in >> item) {
        cxg::AnnotatedToken tok;
        auto first = item.find(':');
        auto second = item.find(':', first + 1);
        tok.lex = item.substr(0, first);
        std::string tag = item.substr(first + 1,
                                      second == std::string::npos ? std::string::npos
                                                                  : second - first - 1);
        tok.syn = cxg::parse_upos(tag).value();
        if (second != std::string::npos) tok.sem = std::stoi(item.substr(second + 1));
        s.tokens.push_back(std::move(tok));
    }
    return s;
}

inline std::vector<cxg::AnnotatedSentence> acorpus(const std::vector<std::string>& specs) {
    std::vector<cxg::AnnotatedSentence> out;
    for (const auto& s : specs) out.push_back(asent(s));
    return out;
}

// Constructions from the same compact syntax: "LEX:the SYN:NOUN SEM:4".
inline cxg::Construction cxn(const std::string& spec) {
    cxg::Construction c;
    std::istringstream in(spec);
    std::string item;
    while (in >> item) {
        auto colon = item.find(':');
        auto kind = cxg::parse_slot_kind(item.substr(0, colon)).value();
        c.slots.push_back(cxg::SlotConstraint{kind, item.substr(colon + 1)});
    }
    return c;
}

inline cxg::Constructicon grammar_of(const std::vector<std::string>& specs,
                                     int min_slots = 2) {
    cxg::Constructicon g;
    g.meta.params.min_slots = min_slots;
    for (const auto& s : specs) g.constructions.insert(cxn(s));
    return g;
}

// Random tagged corpus over a closed vocabulary: word w<i> gets a cycling
// UPOS tag so lexical and syntactic layers stay correlated but distinct.
inline std::vector<cxg::RawSentence> random_corpus(cxg::Rng& rng, std::size_t n_sentences,
                                                   int min_len, int max_len, int vocab) {
    static constexpr cxg::Upos tags[5] = {cxg::Upos::NOUN, cxg::Upos::VERB, cxg::Upos::DET,
                                          cxg::Upos::ADJ, cxg::Upos::ADP};
    std::vector<cxg::RawSentence> out;
    out.reserve(n_sentences);
    for (std::size_t i = 0; i < n_sentences; ++i) {
        auto len = static_cast<int>(
            rng.below(static_cast<std::uint64_t>(max_len - min_len + 1))) + min_len;
        cxg::RawSentence s;
        for (int t = 0; t < len; ++t) {
            auto w = rng.below(static_cast<std::uint64_t>(vocab));
            s.tokens.push_back({"w" + std::to_string(w), tags[w % 5]});
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace testutil
