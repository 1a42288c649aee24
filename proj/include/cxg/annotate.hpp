#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cxg/corpus.hpp"
#include "cxg/digest.hpp"
#include "cxg/error.hpp"
#include "cxg/parallel.hpp"
#include "cxg/rng.hpp"

namespace cxg {

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    return out;
}

// Word vectors, L2-normalized at load, flat row-major storage.
class EmbeddingTable {
public:
    std::size_t dim = 0;
    std::vector<std::string> words;
    std::vector<float> data;  // words.size() * dim
    std::vector<std::string> warnings;

    std::size_t size() const { return words.size(); }
    std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

// Text format: header "count dim", then one "word v1 .. vdim" row per line.
// Words are case-folded to match annotation-time lookups; when folding
// collides, the first row wins. Reading stops after max_vocab kept rows.
inline EmbeddingTable load_embeddings(const std::filesystem::path& path,
                                      std::size_t max_vocab = 50000) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open embeddings file: " + path.string());
    if (max_vocab == 0) throw std::invalid_argument("max_vocab must be positive");

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("missing embeddings header", 1);
    ++line_no;
    std::istringstream header(line);
    long long declared = 0, dim = 0;
    if (!(header >> declared >> dim) || declared <= 0 || dim < 2)
        throw ParseError("header must be '<count> <dim>' with count > 0 and dim >= 2", 1);

    EmbeddingTable table;
    table.dim = static_cast<std::size_t>(dim);
    std::unordered_map<std::string, std::size_t> seen;
    std::size_t duplicates = 0;

    while (table.size() < max_vocab && std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        std::istringstream row(line);
        std::string word;
        if (!(row >> word)) throw ParseError("missing word", line_no);
        std::vector<float> vec(table.dim);
        for (std::size_t d = 0; d < table.dim; ++d)
            if (!(row >> vec[d]))
                throw ParseError("expected " + std::to_string(table.dim) + " vector components",
                                 line_no);
        std::string trailing;
        if (row >> trailing)
            throw ParseError("expected " + std::to_string(table.dim) + " vector components",
                             line_no);

        word = ascii_lower(word);
        if (!seen.emplace(word, table.size()).second) {
            ++duplicates;
            continue;
        }
        double norm = 0.0;
        for (float v : vec) norm += static_cast<double>(v) * v;
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (float& v : vec) v = static_cast<float>(v / norm);
        table.words.push_back(std::move(word));
        table.data.insert(table.data.end(), vec.begin(), vec.end());
    }
    if (table.size() == 0) throw InsufficientDataError("embeddings file has no rows");
    if (duplicates > 0)
        table.warnings.push_back(std::to_string(duplicates) +
                                 " duplicate embedding rows skipped (first occurrence kept)");
    return table;
}

// Word -> cluster id map from k-means over the embedding table.
struct SemanticLexicon {
    std::int32_t k = 0;
    std::size_t dim = 0;
    std::unordered_map<std::string, std::int32_t> assignment;
    std::vector<float> centroids;  // k * dim
    std::string digest;            // content fingerprint, recorded in grammar metadata

    std::int32_t cluster_of(const std::string& lex) const {
        auto it = assignment.find(lex);
        return it == assignment.end() ? -1 : it->second;
    }
};

inline std::string lexicon_digest(std::int32_t k,
                                  const std::unordered_map<std::string, std::int32_t>& assignment) {
    std::vector<std::pair<std::string, std::int32_t>> items(assignment.begin(), assignment.end());
    std::sort(items.begin(), items.end());
    Fnv1a64 h;
    h.update_u64(static_cast<std::uint64_t>(k));
    for (const auto& [word, cluster] : items) {
        h.update(word);
        h.update("\x1f");
        h.update_u64(static_cast<std::uint64_t>(cluster));
        h.update("\x1e");
    }
    return h.hex();
}

namespace detail {

inline double dist2(std::span<const float> a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        double diff = static_cast<double>(a[d]) - b[d];
        s += diff * diff;
    }
    return s;
}

}  // namespace detail

// Lloyd's algorithm with k-means++ seeding. Sequential and free of std
// distribution objects so one seed gives one clustering on every platform.
// An emptied cluster is reseeded to the point farthest from its assigned
// centroid. iteration_objectives, when given, records the point-to-centroid
// squared-error sum after each assignment pass (non-increasing while no
// reseed happens).
inline SemanticLexicon build_semantic_lexicon(const EmbeddingTable& table, std::int32_t k,
                                              std::uint64_t seed,
                                              std::vector<std::string>* log = nullptr,
                                              std::vector<double>* iteration_objectives = nullptr) {
    if (k < 2) throw std::invalid_argument("k must be at least 2");
    const std::size_t n = table.size(), dim = table.dim;
    if (n < static_cast<std::size_t>(k))
        throw InsufficientDataError("need at least k=" + std::to_string(k) +
                                    " embedding rows, got " + std::to_string(n));

    Rng rng(seed);
    std::vector<double> centroids(static_cast<std::size_t>(k) * dim);
    auto centroid = [&](std::size_t c) { return centroids.data() + c * dim; };
    auto set_centroid = [&](std::size_t c, std::span<const float> v) {
        for (std::size_t d = 0; d < dim; ++d) centroid(c)[d] = v[d];
    };

    // k-means++ seeding.
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    set_centroid(0, table.row(rng.below(n)));
    for (std::size_t j = 1; j < static_cast<std::size_t>(k); ++j) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], detail::dist2(table.row(i), centroid(j - 1), dim));
            total += d2[i];
        }
        std::size_t pick;
        if (total > 0.0) {
            double r = rng.uniform01() * total, cum = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cum += d2[i];
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);
        }
        set_centroid(j, table.row(pick));
    }

    std::vector<std::int32_t> assign(n, 0);
    std::vector<double> sums(static_cast<std::size_t>(k) * dim);
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(k));

    auto assign_pass = [&] {
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::int32_t best_c = 0;
            for (std::int32_t c = 0; c < k; ++c) {
                double d = detail::dist2(table.row(i), centroid(static_cast<std::size_t>(c)), dim);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            assign[i] = best_c;
            objective += best;
        }
        return objective;
    };

    for (int iter = 0; iter < 100; ++iter) {
        double objective = assign_pass();
        if (iteration_objectives) iteration_objectives->push_back(objective);

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = table.row(i);
            auto c = static_cast<std::size_t>(assign[i]);
            ++counts[c];
            for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += row[d];
        }

        double max_shift2 = 0.0;
        std::vector<char> reseed_taken(n, 0);
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (counts[c] == 0) {
                // Farthest point from its current centroid, lowest index on ties.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (reseed_taken[i]) continue;
                    double d = detail::dist2(table.row(i),
                                             centroid(static_cast<std::size_t>(assign[i])), dim);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                reseed_taken[far] = 1;
                set_centroid(c, table.row(far));
                if (log)
                    log->push_back("iteration " + std::to_string(iter) + ": empty cluster " +
                                   std::to_string(c) + " reseeded to point " + std::to_string(far));
                max_shift2 = std::numeric_limits<double>::infinity();
                continue;
            }
            double shift2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                double mean = sums[c * dim + d] / static_cast<double>(counts[c]);
                double diff = mean - centroid(c)[d];
                shift2 += diff * diff;
                centroid(c)[d] = mean;
            }
            max_shift2 = std::max(max_shift2, shift2);
        }
        if (std::sqrt(max_shift2) < 1e-4) break;
    }
    assign_pass();  // restore nearest-centroid invariant for the final centroids

    SemanticLexicon lexicon;
    lexicon.k = k;
    lexicon.dim = dim;
    lexicon.centroids.resize(centroids.size());
    for (std::size_t i = 0; i < centroids.size(); ++i)
        lexicon.centroids[i] = static_cast<float>(centroids[i]);
    for (std::size_t i = 0; i < n; ++i) lexicon.assignment.emplace(table.words[i], assign[i]);
    lexicon.digest = lexicon_digest(k, lexicon.assignment);
    return lexicon;
}

// One token after the three-layer analysis: lexical (case-folded surface),
// syntactic (UPOS), semantic (cluster id, -1 when the word has no vector).
struct AnnotatedToken {
    std::string lex;
    Upos syn = Upos::X;
    std::int32_t sem = -1;
    bool operator==(const AnnotatedToken&) const = default;
};

struct AnnotatedSentence {
    std::vector<AnnotatedToken> tokens;
    std::size_t size() const { return tokens.size(); }
    bool operator==(const AnnotatedSentence&) const = default;
};

inline AnnotatedSentence annotate(const RawSentence& sentence,
                                  const SemanticLexicon* lexicon = nullptr) {
    AnnotatedSentence out;
    out.tokens.reserve(sentence.tokens.size());
    for (const auto& tok : sentence.tokens) {
        AnnotatedToken at;
        at.lex = ascii_lower(tok.surface);
        at.syn = tok.upos;
        at.sem = lexicon ? lexicon->cluster_of(at.lex) : -1;
        out.tokens.push_back(std::move(at));
    }
    return out;
}

inline std::vector<AnnotatedSentence> annotate_corpus(std::span<const RawSentence> sentences,
                                                      const SemanticLexicon* lexicon = nullptr,
                                                      int jobs = 1) {
    std::vector<AnnotatedSentence> out(sentences.size());
    parallel_blocks(sentences.size(), jobs, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = annotate(sentences[i], lexicon);
    });
    return out;
}

}  // namespace cxg
