// Deterministic synthetic corpus generator: two register-like tagged corpora,
// a background corpus, and embeddings for the shared vocabulary.
//
// Free text is Zipfian over a large vocabulary, so the lexicon grows
// sublinearly with a strong early burst. A fixed inventory of three-word
// chunks is planted with Zipf-1 usage over dedicated word ids: every chunk
// interior transition has an adjacent-pair association of exactly 1.0 in both
// directions, chunk frequency ranks are learnable at every scale, and the
// number of chunks above any fixed count grows near-linearly with exposure.
// Each register's top usage ranks are its own chunks; shared chunks enter at
// mid ranks in one common order, so cross-register grammar overlap rises
// with exposure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cxg/digest.hpp"
#include "cxg/rng.hpp"

namespace {

constexpr int kVocab = 200000;  // free-text ids [0, kVocab)
constexpr double kWordZipf = 1.25;
constexpr int kChunkLen = 3;
constexpr int kChunksPerRegister = 800;
constexpr int kSharedChunks = 2400;
constexpr int kTotalChunks = 2 * kChunksPerRegister + kSharedChunks;
constexpr double kChunkZipf = 1.0;
constexpr double kChunkRate = 0.121;  // chunk draws per slot; ~29% of tokens
constexpr int kEmbedUnigrams = 50000; // embedding rows: top free-text ids + all chunk ids
constexpr int kEmbedDim = 16;
constexpr int kClusters = 100;

// Chunk c owns ids [kVocab + 3c, kVocab + 3c + 3); chunk words never occur in
// free text, which pins their adjacent-pair associations at exactly 1.0.
int chunk_word(int chunk, int position) { return kVocab + kChunkLen * chunk + position; }

std::uint64_t id_hash(std::uint64_t id) {
    cxg::Fnv1a64 h;
    h.update_u64(id);
    return h.value();
}

// Pronounceable surface form: base-100 consonant-vowel syllables.
std::string surface(int id) {
    static const char* consonants = "bcdfghjklmnprstvwxyz";
    static const char* vowels = "aeiou";
    std::string out;
    int digits[3] = {id / 10000, (id / 100) % 100, id % 100};
    for (int d : digits) {
        out.push_back(consonants[d / 5]);
        out.push_back(vowels[d % 5]);
    }
    return out;
}

// Four high-mass tags. Every tag marginal stays above ~20% of positions, so
// no syntactic transition can be dominated by a single chunk and the grammar
// layer stays driven by lexical chunk structure, not tag-sequence artifacts.
const char* tag_of(int id) {
    std::uint64_t h = id_hash(static_cast<std::uint64_t>(id)) % 100;
    if (h < 35) return "NOUN";
    if (h < 60) return "VERB";
    if (h < 80) return "ADJ";
    return "ADP";
}

class Zipf {
public:
    Zipf(std::size_t n, double s) : cdf_(n) {
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            total += 1.0 / std::pow(static_cast<double>(r + 1), s);
            cdf_[r] = total;
        }
        for (double& c : cdf_) c /= total;
    }

    std::size_t operator()(cxg::Rng& rng) const {
        double u = rng.uniform01();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) --it;
        return static_cast<std::size_t>(it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

template <typename T>
void shuffle(std::vector<T>& v, cxg::Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.below(i)]);
}

// Usage-rank layout for one register: ranks 0-199 are its own chunks, ranks
// 200-1399 alternate own/shared, the tail is shared. Shared chunks sit at the
// same ranks in the same order for every register, so the shared fraction of
// any rank prefix grows with depth.
std::vector<int> ranked_chunks(int reg) {
    std::vector<int> ranked;
    ranked.reserve(kChunksPerRegister + kSharedChunks);
    int spec = reg * kChunksPerRegister;
    int shared = 2 * kChunksPerRegister;
    for (int rank = 0; rank < kChunksPerRegister + kSharedChunks; ++rank) {
        bool specific = rank < 200 || (rank < 1400 && (rank - 200) % 2 == 0);
        ranked.push_back(specific ? spec++ : shared++);
    }
    return ranked;
}

void write_embeddings(const std::filesystem::path& path, cxg::Rng& rng) {
    std::vector<std::vector<double>> centroids(kClusters, std::vector<double>(kEmbedDim));
    for (auto& c : centroids) {
        double norm = 0.0;
        for (double& x : c) {
            x = rng.normal();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (double& x : c) x /= norm;
    }

    std::vector<int> ids;
    ids.reserve(kEmbedUnigrams + kChunkLen * kTotalChunks);
    for (int id = 0; id < kEmbedUnigrams; ++id) ids.push_back(id);
    for (int c = 0; c < kTotalChunks; ++c)
        for (int pos = 0; pos < kChunkLen; ++pos) ids.push_back(chunk_word(c, pos));

    std::ofstream out(path, std::ios::binary);
    out << ids.size() << ' ' << kEmbedDim << '\n';
    for (int id : ids) {
        const auto& c = centroids[id_hash(static_cast<std::uint64_t>(id) + 0x5eed) % kClusters];
        out << surface(id);
        for (int d = 0; d < kEmbedDim; ++d) {
            double x = c[static_cast<std::size_t>(d)] + 0.15 * rng.normal();
            out << ' ' << x;
        }
        out << '\n';
    }
}

void write_corpus(const std::filesystem::path& path, const std::vector<int>& ranked,
                  std::uint64_t words_target, cxg::Rng& rng) {
    Zipf word_dist(kVocab, kWordZipf);
    Zipf chunk_dist(ranked.size(), kChunkZipf);

    std::ofstream out(path, std::ios::binary);
    std::uint64_t emitted = 0;
    std::string buffer;
    auto emit = [&](int id) {
        buffer += surface(id);
        buffer += '\t';
        buffer += tag_of(id);
        buffer += '\n';
        ++emitted;
    };
    while (emitted < words_target) {
        std::uint64_t len = 8 + rng.below(13);
        std::uint64_t start = emitted;
        while (emitted - start < len) {
            if (rng.uniform01() < kChunkRate) {
                int chunk = ranked[chunk_dist(rng)];
                for (int pos = 0; pos < kChunkLen; ++pos) emit(chunk_word(chunk, pos));
            } else {
                emit(static_cast<int>(word_dist(rng)));
            }
        }
        buffer += '\n';
        if (buffer.size() > (1u << 20)) {
            out << buffer;
            buffer.clear();
        }
    }
    out << buffer;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generate the bundled synthetic sample: two tagged registers, "
                 "a background corpus, and embeddings"};
    std::string out_dir;
    std::uint64_t seed = 13;
    std::uint64_t register_words = 1050000;
    std::uint64_t background_words = 525000;
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--register-words", register_words, "words per register corpus");
    app.add_option("--background-words", background_words, "words in the background corpus");
    CLI11_PARSE(app, argc, argv);

    std::filesystem::create_directories(out_dir);
    std::filesystem::path dir(out_dir);

    // The background mixes every chunk; its rank order comes from the master
    // stream. Each output file then uses its own stream so files are
    // independent of one another.
    cxg::Rng master(seed);
    std::vector<int> all(kTotalChunks);
    for (int c = 0; c < kTotalChunks; ++c) all[static_cast<std::size_t>(c)] = c;
    shuffle(all, master);

    cxg::Rng rng_a(seed ^ 0xa001);
    cxg::Rng rng_b(seed ^ 0xb002);
    cxg::Rng rng_bg(seed ^ 0xc003);
    cxg::Rng rng_emb(seed ^ 0xd004);

    write_corpus(dir / "register_a.tagged", ranked_chunks(0), register_words, rng_a);
    write_corpus(dir / "register_b.tagged", ranked_chunks(1), register_words, rng_b);
    write_corpus(dir / "background.tagged", all, background_words, rng_bg);
    write_embeddings(dir / "embeddings.vec", rng_emb);

    std::cout << "wrote " << (dir / "register_a.tagged").string() << " ("
              << register_words << " words)\n"
              << "wrote " << (dir / "register_b.tagged").string() << " ("
              << register_words << " words)\n"
              << "wrote " << (dir / "background.tagged").string() << " ("
              << background_words << " words)\n"
              << "wrote " << (dir / "embeddings.vec").string() << " ("
              << (kEmbedUnigrams + kChunkLen * kTotalChunks) << " words, dim "
              << kEmbedDim << ")\n";
    return 0;
}
