// Command-line front end: wires corpora, embeddings, induction, selection,
// and the exposure experiments into reproducible runs. Every file-producing
// subcommand writes a <output>.manifest.json recording the command, resolved
// parameters, and input digests; re-running with identical inputs reproduces
// the output bytes (the optional --timestamp flag is the one exception, since
// it stamps wall-clock time into grammar metadata).

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cxg/cxg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cxg;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

std::string iso_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write output: " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ParseError("write failed: " + path.string());
}

// Flags shared by every subcommand that learns grammars from corpora.
struct LearnOptions {
    std::string embeddings;
    bool plain = false;
    int k = 100;
    std::uint64_t seed = 13;
    int jobs = 1;
    bool same_layer_only = false;
    double test_fraction = 0.1;
    std::uint64_t increment = 100000;
    std::uint64_t max_words = 2000000;
    int min_slots = 3;
    int max_slots = 8;
    std::uint64_t min_pair_count = 3;
    std::vector<double> thresholds;
    std::vector<long long> top_ns;
    std::string language = "und";
};

void add_learn_flags(CLI::App* cmd, LearnOptions& o, bool with_increments) {
    cmd->add_option("--embeddings", o.embeddings, "word vectors (text: 'count dim' header)");
    cmd->add_flag("--plain", o.plain,
                  "corpora are plain text, one sentence per line (lexicon-only mode)");
    cmd->add_option("--k", o.k, "semantic cluster count");
    cmd->add_option("--seed", o.seed, "seed for clustering and any sampling");
    cmd->add_option("--jobs", o.jobs, "worker cap; results do not depend on it");
    cmd->add_flag("--same-layer-only", o.same_layer_only,
                  "restrict associations to within-layer transitions");
    cmd->add_option("--test-fraction", o.test_fraction, "held-out sentence fraction");
    cmd->add_option("--min-slots", o.min_slots, "minimum construction length");
    cmd->add_option("--max-slots", o.max_slots, "maximum construction length");
    cmd->add_option("--min-pair-count", o.min_pair_count, "pair count floor for associations");
    cmd->add_option("--thresholds", o.thresholds, "selection grid thresholds")->delimiter(',');
    cmd->add_option("--top-ns", o.top_ns, "selection grid stack cutoffs (-1 = all)")
        ->delimiter(',');
    cmd->add_option("--language", o.language, "language label for grammar metadata");
    if (with_increments) {
        cmd->add_option("--increment", o.increment, "exposure increment in words");
        cmd->add_option("--max-words", o.max_words, "exposure cap in words");
    }
}

LearnParams to_params(const LearnOptions& o) {
    LearnParams p;
    p.increment = o.increment;
    p.max_words = o.max_words;
    p.test_fraction = o.test_fraction;
    if (!o.thresholds.empty()) p.grid.thresholds = o.thresholds;
    if (!o.top_ns.empty()) p.grid.top_ns = o.top_ns;
    p.base.min_slots = o.min_slots;
    p.base.max_slots = o.max_slots;
    p.base.min_pair_count = o.min_pair_count;
    p.base.k = o.k;
    p.base.seed = o.seed;
    p.same_layer_only = o.same_layer_only;
    p.jobs = o.jobs;
    if (const char* cache = std::getenv("CXGLAB_CACHE")) p.matrix_cache_dir = cache;
    return p;
}

json params_json(const LearnOptions& o, const LearnParams& p) {
    return json{{"embeddings", o.embeddings},
                {"plain", o.plain},
                {"k", o.k},
                {"jobs", o.jobs},
                {"same_layer_only", o.same_layer_only},
                {"test_fraction", o.test_fraction},
                {"increment", o.increment},
                {"max_words", o.max_words},
                {"min_slots", o.min_slots},
                {"max_slots", o.max_slots},
                {"min_pair_count", o.min_pair_count},
                {"thresholds", p.grid.thresholds},
                {"top_ns", p.grid.top_ns},
                {"language", o.language}};
}

Corpus load_input_corpus(const std::string& path, bool plain) {
    Corpus corpus = load_corpus(path, plain ? CorpusFormat::plain : CorpusFormat::tagged);
    print_warnings(corpus.warnings);
    return corpus;
}

std::optional<SemanticLexicon> load_lexicon(const LearnOptions& o) {
    if (o.embeddings.empty()) return std::nullopt;
    EmbeddingTable table = load_embeddings(o.embeddings);
    print_warnings(table.warnings);
    return build_semantic_lexicon(table, o.k, o.seed);
}

// Tagged corpora carry all three layers and need vectors for the semantic
// one; plain corpora run the degraded lexicon-only path.
void check_embedding_mode(const LearnOptions& o) {
    if (!o.plain && o.embeddings.empty())
        throw CLI::ValidationError("tagged corpora require --embeddings; "
                                   "pass --plain for the lexicon-only path");
    if (o.plain && !o.embeddings.empty())
        throw CLI::ValidationError("--plain corpora have no tagged layers; drop --embeddings");
}

std::pair<std::string, std::string> split_labeled(const std::string& spec) {
    std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
        throw ParseError("expected label=path, got '" + spec + "'");
    return {spec.substr(0, eq), spec.substr(eq + 1)};
}

json fit_json(const HeapsFit& f) {
    return json{{"alpha", f.alpha},     {"log_k", f.log_k}, {"alpha_se", f.alpha_se},
                {"ci_low", f.ci_low},   {"ci_high", f.ci_high},
                {"rss", f.rss},         {"n", f.n}};
}

json growth_summary(const std::vector<GrowthPoint>& points, const std::optional<HeapsFit>& fit) {
    json out;
    out["fit"] = fit ? fit_json(*fit) : json(nullptr);
    if (points.size() >= 2 && points.back().count > 0)
        out["initial_burst"] = initial_burst(points);
    else
        out["initial_burst"] = nullptr;
    return out;
}

fs::path fits_path(const fs::path& out) {
    fs::path p = out;
    p.replace_extension();
    p += ".fits.json";
    return p;
}

std::string slot_spec(const SlotConstraint& s) {
    return std::string(to_string(s.kind)) + ":" + s.value;
}

// ---------------------------------------------------------------------------

struct LearnCmd {
    std::string corpus, out, register_label;
    LearnOptions opts;
    bool timestamp = false;

    int run() {
        check_embedding_mode(opts);
        Corpus corpus_data = load_input_corpus(corpus, opts.plain);
        std::optional<SemanticLexicon> lexicon = load_lexicon(opts);
        LearnParams params = to_params(opts);
        std::vector<AnnotatedSentence> annotated =
            annotate_corpus(corpus_data.sentences, lexicon ? &*lexicon : nullptr, opts.jobs);

        SelectionResult sel =
            learn_grammar(annotated, params, opts.language, register_label,
                          corpus_data.word_count(), lexicon ? lexicon->digest : "");
        print_warnings(sel.warnings);
        if (timestamp) sel.grammar.meta.created = iso_now();
        save_grammar(sel.grammar, out);

        RunManifest manifest;
        manifest.command = "learn";
        manifest.seed = opts.seed;
        manifest.params = params_json(opts, params);
        manifest.params["register"] = register_label;
        manifest.params["timestamp"] = timestamp;
        manifest.add_input(corpus);
        if (!opts.embeddings.empty()) manifest.add_input(opts.embeddings);
        manifest.outputs = {out};
        manifest.write(out);

        std::cout << "wrote " << out << " (" << sel.grammar.size() << " constructions, "
                  << fmt(sel.score.total_bits()) << " bits vs " << fmt(sel.baseline.total_bits())
                  << " baseline)\n";
        return 0;
    }
};

struct GrowthCmd {
    std::string corpus, out, register_label;
    LearnOptions opts;

    int run() {
        check_embedding_mode(opts);
        Corpus corpus_data = load_input_corpus(corpus, opts.plain);
        std::optional<SemanticLexicon> lexicon = load_lexicon(opts);
        LearnParams params = to_params(opts);

        GrowthRun growth = run_growth(corpus_data.sentences, lexicon ? &*lexicon : nullptr,
                                      params, opts.language, register_label);
        print_warnings(growth.warnings);

        std::string csv = "register,words,lexicon,grammar\n";
        for (std::size_t i = 0; i < growth.lexicon_points.size(); ++i) {
            csv += growth.register_label + "," +
                   std::to_string(growth.lexicon_points[i].words) + "," +
                   std::to_string(growth.lexicon_points[i].count) + "," +
                   std::to_string(growth.grammar_points[i].count) + "\n";
        }
        write_text(out, csv);

        json fits{{"register", growth.register_label},
                  {"lexicon", growth_summary(growth.lexicon_points, growth.lexicon_fit)},
                  {"grammar", growth_summary(growth.grammar_points, growth.grammar_fit)},
                  {"warnings", growth.warnings}};
        fs::path fits_file = fits_path(out);
        write_text(fits_file, fits.dump(2) + "\n");

        RunManifest manifest;
        manifest.command = "growth";
        manifest.seed = opts.seed;
        manifest.params = params_json(opts, params);
        manifest.params["register"] = register_label;
        manifest.add_input(corpus);
        if (!opts.embeddings.empty()) manifest.add_input(opts.embeddings);
        manifest.outputs = {out, fits_file.string()};
        manifest.write(out);

        std::cout << "wrote " << out << " (" << growth.lexicon_points.size()
                  << " increments) and " << fits_file.string() << "\n";
        return 0;
    }
};

struct ConvergeCmd {
    std::vector<std::string> register_specs;
    std::string out, mode = "fuzzy", background;
    double fuzzy_threshold = 0.71;
    LearnOptions opts;

    int run() {
        check_embedding_mode(opts);
        if (mode != "fuzzy" && mode != "weighted")
            throw CLI::ValidationError("--mode must be fuzzy or weighted");
        ConvergenceMode cmode =
            mode == "fuzzy" ? ConvergenceMode::fuzzy : ConvergenceMode::weighted;
        if (cmode == ConvergenceMode::weighted && background.empty())
            throw CLI::ValidationError("weighted convergence requires --background");

        std::map<std::string, std::vector<RawSentence>> registers;
        std::vector<std::string> corpus_paths;
        for (const auto& spec : register_specs) {
            auto [label, path] = split_labeled(spec);
            if (registers.count(label)) throw ParseError("duplicate register label: " + label);
            registers[label] = load_input_corpus(path, opts.plain).sentences;
            corpus_paths.push_back(path);
        }
        std::optional<SemanticLexicon> lexicon = load_lexicon(opts);
        LearnParams params = to_params(opts);

        std::vector<AnnotatedSentence> background_annotated;
        if (!background.empty()) {
            Corpus bg = load_input_corpus(background, opts.plain);
            background_annotated =
                annotate_corpus(bg.sentences, lexicon ? &*lexicon : nullptr, opts.jobs);
        }

        ConvergenceRun run = run_convergence(registers, lexicon ? &*lexicon : nullptr, params,
                                             cmode, fuzzy_threshold, background_annotated);
        print_warnings(run.warnings);

        std::string csv = "register_a,register_b,words,value\n";
        for (const auto& pair : run.pairs)
            for (const auto& point : pair.points)
                csv += pair.register_a + "," + pair.register_b + "," +
                       std::to_string(point.words) + "," + fmt(point.value) + "\n";
        write_text(out, csv);

        RunManifest manifest;
        manifest.command = "converge";
        manifest.seed = opts.seed;
        manifest.params = params_json(opts, params);
        manifest.params["mode"] = mode;
        manifest.params["fuzzy_threshold"] = fuzzy_threshold;
        manifest.params["registers"] = register_specs;
        for (const auto& path : corpus_paths) manifest.add_input(path);
        if (!background.empty()) manifest.add_input(background);
        if (!opts.embeddings.empty()) manifest.add_input(opts.embeddings);
        manifest.outputs = {out};
        manifest.write(out);

        std::cout << "wrote " << out << " (" << run.pairs.size() << " register pairs)\n";
        return 0;
    }
};

struct PruneCmd {
    std::string grammar_path, out, save_grammar_path;
    std::vector<std::string> register_specs;
    double decay = 0.25;
    std::uint64_t increment = 100000;
    std::uint32_t increments = 20;
    LearnOptions opts;

    int run() {
        Constructicon merged = load_grammar(grammar_path);
        std::vector<std::pair<std::string, std::vector<RawSentence>>> streams;
        std::vector<std::string> corpus_paths;
        for (const auto& spec : register_specs) {
            auto [label, path] = split_labeled(spec);
            streams.emplace_back(label, load_input_corpus(path, opts.plain).sentences);
            corpus_paths.push_back(path);
        }
        std::optional<SemanticLexicon> lexicon = load_lexicon(opts);

        UnentrenchParams params;
        params.decay = decay;
        params.increment = increment;
        params.increments = increments;
        params.jobs = opts.jobs;
        UnentrenchResult result =
            run_unentrenchment(merged, streams, lexicon ? &*lexicon : nullptr, params);
        print_warnings(result.warnings);

        std::string csv = "increment,words_seen,live\n";
        for (const PrunePoint& p : result.trace.points)
            csv += std::to_string(p.increment) + "," + std::to_string(p.words_seen) + "," +
                   std::to_string(p.live) + "\n";
        write_text(out, csv);

        json fits;
        try {
            fits = json{{"fit", fit_json(forgetting_fit(result.trace))}};
        } catch (const std::exception& e) {
            fits = json{{"fit", nullptr}, {"reason", e.what()}};
        }
        fits["warnings"] = result.warnings;
        fs::path fits_file = fits_path(out);
        write_text(fits_file, fits.dump(2) + "\n");

        RunManifest manifest;
        manifest.command = "prune";
        manifest.seed = opts.seed;
        manifest.params = json{{"decay", decay},
                               {"increment", increment},
                               {"increments", increments},
                               {"jobs", opts.jobs},
                               {"k", opts.k},
                               {"plain", opts.plain},
                               {"registers", register_specs}};
        manifest.add_input(grammar_path);
        for (const auto& path : corpus_paths) manifest.add_input(path);
        if (!opts.embeddings.empty()) manifest.add_input(opts.embeddings);
        manifest.outputs = {out, fits_file.string()};
        if (!save_grammar_path.empty()) {
            save_grammar(result.final_grammar, save_grammar_path);
            manifest.outputs.push_back(save_grammar_path);
        }
        manifest.write(out);

        std::cout << "wrote " << out << " (" << result.trace.points.size() << " increments, "
                  << result.final_grammar.size() << " constructions live)\n";
        return 0;
    }
};

struct CompareCmd {
    std::string grammar_a, grammar_b, out, mode = "fuzzy", background;
    double fuzzy_threshold = 0.71;
    LearnOptions opts;

    int run() {
        if (mode != "fuzzy" && mode != "weighted")
            throw CLI::ValidationError("--mode must be fuzzy or weighted");
        Constructicon a = load_grammar(grammar_a);
        Constructicon b = load_grammar(grammar_b);

        SimilarityScore score;
        if (mode == "fuzzy") {
            score = fuzzy_jaccard(a, b, fuzzy_threshold, opts.jobs);
        } else {
            if (background.empty())
                throw CLI::ValidationError("weighted comparison requires --background");
            std::optional<SemanticLexicon> lexicon = load_lexicon(opts);
            Corpus bg = load_input_corpus(background, opts.plain);
            std::vector<AnnotatedSentence> annotated =
                annotate_corpus(bg.sentences, lexicon ? &*lexicon : nullptr, opts.jobs);
            score = weighted_jaccard(a, b, annotated, opts.jobs);
        }
        if (score.degenerate)
            std::cerr << "warning: degenerate comparison (empty grammars or zero-weight union)\n";

        json result{{"mode", mode},           {"value", score.value},
                    {"matched", score.matched}, {"degenerate", score.degenerate},
                    {"grammar_a", grammar_a}, {"grammar_b", grammar_b},
                    {"size_a", a.size()},     {"size_b", b.size()}};
        if (mode == "fuzzy") result["fuzzy_threshold"] = fuzzy_threshold;

        if (out.empty()) {
            std::cout << result.dump(2) << "\n";
            return 0;
        }
        write_text(out, result.dump(2) + "\n");

        RunManifest manifest;
        manifest.command = "compare";
        manifest.seed = opts.seed;
        manifest.params = json{{"mode", mode},
                               {"fuzzy_threshold", fuzzy_threshold},
                               {"jobs", opts.jobs},
                               {"k", opts.k},
                               {"plain", opts.plain}};
        manifest.add_input(grammar_a);
        manifest.add_input(grammar_b);
        if (!background.empty()) manifest.add_input(background);
        if (!opts.embeddings.empty()) manifest.add_input(opts.embeddings);
        manifest.outputs = {out};
        manifest.write(out);
        std::cout << "wrote " << out << "\n";
        return 0;
    }
};

struct FitCmd {
    std::string csv_path, out;
    double level = 0.95;

    int run() {
        std::ifstream in(csv_path);
        if (!in) throw ParseError("cannot open points file: " + csv_path);
        std::vector<GrowthPoint> points;
        std::string line;
        while (std::getline(in, line)) {
            for (char& c : line)
                if (c == ',' || c == '\t' || c == '\r') c = ' ';
            std::istringstream row(line);
            std::uint64_t w = 0, v = 0;
            if (row >> w >> v) points.push_back(GrowthPoint{w, v});
        }
        HeapsFit fit = heaps_fit(points, level);
        json result = fit_json(fit);
        result["level"] = level;
        if (points.size() >= 2 && points.back().count > 0)
            result["initial_burst"] = initial_burst(points);

        if (out.empty()) {
            std::cout << result.dump(2) << "\n";
            return 0;
        }
        write_text(out, result.dump(2) + "\n");

        RunManifest manifest;
        manifest.command = "fit";
        manifest.params = json{{"level", level}};
        manifest.add_input(csv_path);
        manifest.outputs = {out};
        manifest.write(out);
        std::cout << "wrote " << out << "\n";
        return 0;
    }
};

struct MergeCmd {
    std::vector<std::string> grammar_paths;
    std::string out;

    int run() {
        std::vector<Constructicon> grammars;
        for (const auto& path : grammar_paths) grammars.push_back(load_grammar(path));
        Constructicon merged = merge_grammars(grammars);
        save_grammar(merged, out);

        RunManifest manifest;
        manifest.command = "merge";
        manifest.params = json{{"grammars", grammar_paths}};
        for (const auto& path : grammar_paths) manifest.add_input(path);
        manifest.outputs = {out};
        manifest.write(out);

        std::cout << "wrote " << out << " (" << merged.size() << " constructions)\n";
        return 0;
    }
};

// Plain-text interchange: a "# meta<TAB>{json}" header line, then one
// construction per line, slots tab-separated as KIND:value.
constexpr const char* kMetaPrefix = "# meta\t";

struct ExportCmd {
    std::string grammar_path, out;

    int run() {
        Constructicon g = load_grammar(grammar_path);
        json meta{{"language", g.meta.language},
                  {"register", g.meta.register_label},
                  {"exposure_words", g.meta.exposure_words},
                  {"lexicon_digest", g.meta.lexicon_digest},
                  {"created", g.meta.created},
                  {"params", to_json(g.meta.params)}};
        std::string text = std::string(kMetaPrefix) + meta.dump() + "\n";
        for (const Construction& c : g.constructions) {
            for (std::size_t i = 0; i < c.slots.size(); ++i) {
                if (i) text += '\t';
                text += slot_spec(c.slots[i]);
            }
            text += '\n';
        }
        if (out.empty()) {
            std::cout << text;
            return 0;
        }
        write_text(out, text);

        RunManifest manifest;
        manifest.command = "export";
        manifest.add_input(grammar_path);
        manifest.outputs = {out};
        manifest.write(out);
        std::cout << "wrote " << out << " (" << g.size() << " constructions)\n";
        return 0;
    }
};

struct ImportCmd {
    std::string text_path, out, language, register_label;

    int run() {
        std::ifstream in(text_path);
        if (!in) throw ParseError("cannot open construction listing: " + text_path);

        Constructicon g;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line.rfind(kMetaPrefix, 0) == 0) {
                json meta = json::parse(line.substr(std::string(kMetaPrefix).size()), nullptr,
                                        false);
                if (meta.is_discarded())
                    throw ParseError("bad meta header", line_no);
                g.meta.language = meta.value("language", g.meta.language);
                g.meta.register_label = meta.value("register", g.meta.register_label);
                g.meta.exposure_words = meta.value("exposure_words", g.meta.exposure_words);
                g.meta.lexicon_digest = meta.value("lexicon_digest", g.meta.lexicon_digest);
                g.meta.created = meta.value("created", g.meta.created);
                if (meta.contains("params")) g.meta.params = params_from_json(meta["params"]);
                continue;
            }
            if (line[0] == '#') continue;

            Construction c;
            std::istringstream row(line);
            std::string field;
            while (std::getline(row, field, '\t')) {
                if (field.empty()) continue;
                std::size_t colon = field.find(':');
                if (colon == std::string::npos)
                    throw ParseError("slot must be KIND:value, got '" + field + "'", line_no);
                auto kind = parse_slot_kind(field.substr(0, colon));
                if (!kind) throw ParseError("unknown slot kind in '" + field + "'", line_no);
                std::string value = field.substr(colon + 1);
                if (*kind == SlotKind::lex) {
                    if (value.empty()) throw ParseError("empty word form", line_no);
                    value = ascii_lower(value);
                } else if (*kind == SlotKind::syn) {
                    if (!parse_upos(value))
                        throw ParseError("unknown tag '" + value + "'", line_no);
                } else if (!parse_sem_value(value)) {
                    throw ParseError("bad cluster id '" + value + "'", line_no);
                }
                c.slots.push_back(SlotConstraint{*kind, std::move(value)});
            }
            if (g.constructions.count(c))
                throw ParseError("duplicate construction", line_no);
            g.constructions.insert(std::move(c));
        }
        if (!language.empty()) g.meta.language = language;
        if (!register_label.empty()) g.meta.register_label = register_label;

        // serialize/deserialize round trip enforces the grammar-file
        // validation rules (slot bounds, tag and cluster syntax).
        Constructicon checked = deserialize(serialize(g));
        save_grammar(checked, out);

        RunManifest manifest;
        manifest.command = "import";
        manifest.params = json{{"language", language}, {"register", register_label}};
        manifest.add_input(text_path);
        manifest.outputs = {out};
        manifest.write(out);

        std::cout << "wrote " << out << " (" << checked.size() << " constructions)\n";
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"usage-based construction grammar laboratory"};
    app.require_subcommand(1);

    LearnCmd learn;
    CLI::App* learn_cmd = app.add_subcommand("learn", "learn one grammar from a corpus");
    learn_cmd->add_option("corpus", learn.corpus, "input corpus")->required();
    learn_cmd->add_option("--out", learn.out, "grammar file to write")->required();
    learn_cmd->add_option("--register", learn.register_label, "register label for metadata");
    learn_cmd->add_flag("--timestamp", learn.timestamp,
                        "stamp wall-clock creation time into grammar metadata");
    add_learn_flags(learn_cmd, learn.opts, false);

    GrowthCmd growth;
    CLI::App* growth_cmd =
        app.add_subcommand("growth", "inventory growth across exposure increments");
    growth_cmd->add_option("corpus", growth.corpus, "input corpus")->required();
    growth_cmd->add_option("--out", growth.out, "points CSV to write")->required();
    growth_cmd->add_option("--register", growth.register_label, "register label");
    add_learn_flags(growth_cmd, growth.opts, true);

    ConvergeCmd converge;
    CLI::App* converge_cmd =
        app.add_subcommand("converge", "cross-register similarity at matched exposure");
    converge_cmd->add_option("--register", converge.register_specs, "label=path (repeat)")
        ->required()
        ->expected(-2);
    converge_cmd->add_option("--out", converge.out, "points CSV to write")->required();
    converge_cmd->add_option("--mode", converge.mode, "fuzzy or weighted");
    converge_cmd->add_option("--fuzzy-threshold", converge.fuzzy_threshold,
                             "slot-overlap bar for a fuzzy match");
    converge_cmd->add_option("--background", converge.background,
                             "background corpus for weighted mode");
    add_learn_flags(converge_cmd, converge.opts, true);

    PruneCmd prune;
    CLI::App* prune_cmd =
        app.add_subcommand("prune", "decay unobserved constructions over fresh exposure");
    prune_cmd->add_option("grammar", prune.grammar_path, "grammar file to erode")->required();
    prune_cmd->add_option("--register", prune.register_specs, "label=path fresh stream (repeat)")
        ->required()
        ->expected(-1);
    prune_cmd->add_option("--out", prune.out, "trace CSV to write")->required();
    prune_cmd->add_option("--decay", prune.decay, "weight lost per unobserved increment");
    prune_cmd->add_option("--increment", prune.increment, "fresh words per step");
    prune_cmd->add_option("--increments", prune.increments, "number of steps");
    prune_cmd->add_option("--save-grammar", prune.save_grammar_path,
                          "write the surviving grammar here");
    add_learn_flags(prune_cmd, prune.opts, false);

    CompareCmd compare;
    CLI::App* compare_cmd = app.add_subcommand("compare", "similarity of two grammar files");
    compare_cmd->add_option("grammar_a", compare.grammar_a, "first grammar")->required();
    compare_cmd->add_option("grammar_b", compare.grammar_b, "second grammar")->required();
    compare_cmd->add_option("--out", compare.out, "result JSON (default: stdout)");
    compare_cmd->add_option("--mode", compare.mode, "fuzzy or weighted");
    compare_cmd->add_option("--fuzzy-threshold", compare.fuzzy_threshold,
                            "slot-overlap bar for a fuzzy match");
    compare_cmd->add_option("--background", compare.background,
                            "background corpus for weighted mode");
    add_learn_flags(compare_cmd, compare.opts, false);

    FitCmd fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "power-law fit of growth points");
    fit_cmd->add_option("points", fit.csv_path, "CSV of words,count rows")->required();
    fit_cmd->add_option("--out", fit.out, "result JSON (default: stdout)");
    fit_cmd->add_option("--level", fit.level, "confidence level");

    MergeCmd merge;
    CLI::App* merge_cmd = app.add_subcommand("merge", "union of grammar files");
    merge_cmd->add_option("grammars", merge.grammar_paths, "grammar files")
        ->required()
        ->expected(-2);
    merge_cmd->add_option("--out", merge.out, "merged grammar file")->required();

    ExportCmd export_;
    CLI::App* export_cmd =
        app.add_subcommand("export", "grammar file to tab-separated construction listing");
    export_cmd->add_option("grammar", export_.grammar_path, "grammar file")->required();
    export_cmd->add_option("--out", export_.out, "listing to write (default: stdout)");

    ImportCmd import_;
    CLI::App* import_cmd =
        app.add_subcommand("import", "construction listing back to a grammar file");
    import_cmd->add_option("listing", import_.text_path, "tab-separated listing")->required();
    import_cmd->add_option("--out", import_.out, "grammar file to write")->required();
    import_cmd->add_option("--language", import_.language, "override language label");
    import_cmd->add_option("--register", import_.register_label, "override register label");

    CLI11_PARSE(app, argc, argv);

    try {
        if (learn_cmd->parsed()) return learn.run();
        if (growth_cmd->parsed()) return growth.run();
        if (converge_cmd->parsed()) return converge.run();
        if (prune_cmd->parsed()) return prune.run();
        if (compare_cmd->parsed()) return compare.run();
        if (fit_cmd->parsed()) return fit.run();
        if (merge_cmd->parsed()) return merge.run();
        if (export_cmd->parsed()) return export_.run();
        if (import_cmd->parsed()) return import_.run();
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
