// unitlab: evaluation toolkit for discrete speech units — quantization,
// zero-shot probes, unit language modeling, and generation metrics.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "unitlab/abx.hpp"
#include "unitlab/editdist.hpp"
#include "unitlab/error.hpp"
#include "unitlab/format.hpp"
#include "unitlab/genmetrics.hpp"
#include "unitlab/io.hpp"
#include "unitlab/ngram.hpp"
#include "unitlab/quantizer.hpp"
#include "unitlab/rng.hpp"
#include "unitlab/synth.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace unitlab;

std::string fmt(double v) { return formatDouble(v); }

// Results go to a file or stdout; every text output ends with a config
// record so runs are self-describing. Execution-only knobs (threads, quiet)
// are excluded: they must not change output bytes.
void writeResult(const std::string& out_path, const std::string& body, const json& config) {
    std::string content = body + "# config: " + config.dump() + "\n";
    if (out_path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + out_path + " for writing");
    out << content;
    if (!out) fail(ErrorKind::Io, "short write to " + out_path);
}

std::vector<double> parseGrid(const std::string& grid_str) {
    if (grid_str == "default" || grid_str.empty()) return defaultTemperatureGrid();
    std::vector<double> grid;
    std::stringstream ss(grid_str);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) grid.push_back(std::stod(tok));
    return grid;
}

std::string gridToString(const std::vector<double>& grid) {
    std::string s;
    for (std::size_t i = 0; i < grid.size(); ++i) s += (i ? "," : "") + fmt(grid[i]);
    return s;
}

std::vector<FrameMatrix> loadFramesFromManifest(const std::string& manifest_path,
                                                std::vector<ManifestEntry>* entries_out = nullptr) {
    auto entries = readManifest(manifest_path);
    std::vector<FrameMatrix> frames;
    frames.reserve(entries.size());
    for (const ManifestEntry& e : entries)
        frames.push_back(readFrameMatrix(resolveFramePath(manifest_path, e.frame_path), e.utt_id));
    if (entries_out) *entries_out = std::move(entries);
    return frames;
}

void attachDurations(std::vector<UnitSequence>& seqs, const std::string& manifest_path) {
    auto entries = readManifest(manifest_path);
    std::map<std::string, double> durations;
    for (const ManifestEntry& e : entries) durations[e.utt_id] = e.duration_s;
    for (UnitSequence& us : seqs) {
        auto found = durations.find(us.utt_id);
        require(found != durations.end(), ErrorKind::Domain,
                "no manifest entry (duration) for utterance '" + us.utt_id + "'");
        us.duration_s = found->second;
    }
}

int rangeField(const json& j, const std::string& key, int index, int fallback) {
    if (!j.contains(key)) return fallback;
    const json& r = j.at(key);
    require(r.is_array() && r.size() == 2, ErrorKind::Format,
            "synth config: '" + key + "' must be a [min, max] pair");
    return r.at(static_cast<std::size_t>(index)).get<int>();
}

template <typename T>
T jsonField(const json& j, const std::string& key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void checkKeys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items())
        require(allowed.count(key) > 0, ErrorKind::Format,
                "synth config: unknown key '" + key + "' in " + where);
}

// ---------------------------------------------------------------------------

struct QuantizeTrainArgs {
    std::string manifest, codebook, out = "-";
    int k = 100, max_iter = 300, threads = 0;
    double rel_tol = 1e-6;
    std::uint64_t seed = 0;
};

void runQuantizeTrain(const QuantizeTrainArgs& a) {
    auto frames = loadFramesFromManifest(a.manifest);
    KMeansOptions opts;
    opts.max_iter = a.max_iter;
    opts.rel_tol = a.rel_tol;
    opts.threads = a.threads;
    Codebook cb = trainCodebook(frames, a.k, a.seed, opts);
    writeCodebook(a.codebook, cb);
    std::string body = "K\tD\tinertia\titerations\n" + std::to_string(cb.k()) + "\t" +
                       std::to_string(cb.dim()) + "\t" + fmt(cb.inertia) + "\t" +
                       std::to_string(cb.iterations_run) + "\n";
    json cfg{{"subcommand", "quantize-train"}, {"manifest", a.manifest},
             {"codebook", a.codebook},         {"k", a.k},
             {"seed", a.seed},                 {"max_iter", a.max_iter},
             {"rel_tol", a.rel_tol}};
    writeResult(a.out, body, cfg);
}

struct QuantizeEncodeArgs {
    std::string manifest, codebook, out;
    int threads = 0;
};

void runQuantizeEncode(const QuantizeEncodeArgs& a) {
    auto frames = loadFramesFromManifest(a.manifest);
    Codebook cb = readCodebook(a.codebook);
    std::vector<UnitSequence> seqs;
    seqs.reserve(frames.size());
    for (const FrameMatrix& fm : frames) seqs.push_back(encode(fm, cb, a.threads));
    std::ostringstream body;
    writeUnitFile(body, seqs);
    json cfg{{"subcommand", "quantize-encode"},
             {"manifest", a.manifest},
             {"codebook", a.codebook},
             {"k", cb.k()}};
    writeResult(a.out, body.str(), cfg);
}

struct DedupArgs {
    std::string in, out;
};

void runDedup(const DedupArgs& a) {
    auto seqs = readUnitFile(a.in);
    for (UnitSequence& us : seqs) us = dedup(us);
    std::ostringstream body;
    writeUnitFile(body, seqs);
    json cfg{{"subcommand", "dedup"}, {"in", a.in}};
    writeResult(a.out, body.str(), cfg);
}

struct BitrateArgs {
    std::string units, manifest, out = "-";
    bool raw = false;
};

void runBitrate(const BitrateArgs& a) {
    auto seqs = readUnitFile(a.units);
    attachDurations(seqs, a.manifest);
    double b = bitrate(seqs, !a.raw);
    std::uint64_t n_symbols = 0;
    double total_duration = 0.0;
    for (const UnitSequence& us : seqs) {
        n_symbols += a.raw ? us.units.size() : dedup(us).units.size();
        total_duration += *us.duration_s;
    }
    std::string body = "bitrate_bits_per_s\tn_symbols\ttotal_duration_s\tpost_dedup\n" + fmt(b) +
                       "\t" + std::to_string(n_symbols) + "\t" + fmt(total_duration) + "\t" +
                       (a.raw ? "false" : "true") + "\n";
    json cfg{{"subcommand", "bitrate"},
             {"units", a.units},
             {"manifest", a.manifest},
             {"post_dedup", !a.raw}};
    writeResult(a.out, body, cfg);
}

struct AbxArgs {
    std::string items, manifest, out = "-";
    std::string mode = "within", metric = "angular";
    std::int64_t max_triples = 5000;
    std::uint64_t seed = 0;
    int threads = 0;
};

void runAbx(const AbxArgs& a) {
    AbxItemSet items = readAbxItemFile(a.items);
    auto frames = loadFramesFromManifest(a.manifest);
    AbxOptions opts;
    opts.metric = frameMetricFromString(a.metric);
    opts.max_triples_per_cell = a.max_triples;
    opts.seed = a.seed;
    opts.threads = a.threads;
    AbxResult res = abxScore(items, frames, abxModeFromString(a.mode), opts);
    std::ostringstream body;
    body << "# speaker_config\tcontext\tphone_a\tphone_b\tscore\tn_triples\n";
    for (const AbxCellScore& c : res.cells)
        body << c.speaker_config << '\t' << c.context << '\t' << c.phone_a << '\t' << c.phone_b
             << '\t' << fmt(c.score) << '\t' << c.n_triples << '\n';
    body << toString(res.mode) << '\t' << fmt(res.error_rate) << '\t' << res.n_triples << '\n';
    json cfg{{"subcommand", "abx"},   {"items", a.items},           {"manifest", a.manifest},
             {"mode", a.mode},        {"metric", a.metric},         {"max_triples", a.max_triples},
             {"seed", a.seed}};
    writeResult(a.out, body.str(), cfg);
}

struct LmTrainArgs {
    std::string units, model;
    int order = 5;
    std::string smoothing = "absolute-discount";
    double discount = 0.75, add_k = 1.0;
    bool no_dedup = false;
    bool quiet = false;
};

void runLmTrain(const LmTrainArgs& a) {
    auto corpus = readUnitFile(a.units);
    NGramOptions opts;
    opts.order = a.order;
    opts.smoothing = smoothingFromString(a.smoothing);
    opts.discount = a.discount;
    opts.add_k = a.add_k;
    opts.dedup = !a.no_dedup;
    NGramModel model = trainNGram(corpus, opts);
    model.save(a.model);
    json cfg{{"subcommand", "lm train"}, {"units", a.units},       {"model", a.model},
             {"order", a.order},         {"smoothing", a.smoothing}, {"discount", a.discount},
             {"add_k", a.add_k},         {"dedup", !a.no_dedup}};
    if (!a.quiet)
        std::cout << "# trained order-" << a.order << " model on " << corpus.size()
                  << " utterances; vocab " << model.vocabulary().size() << "\n"
                  << "# config: " << cfg.dump() << "\n";
}

struct LmScoreArgs {
    std::string model, units, out = "-";
    std::string apply_dedup = "auto";  // auto|on|off
};

void runLmScore(const LmScoreArgs& a) {
    NGramModel model = NGramModel::load(a.model);
    auto corpus = readUnitFile(a.units);
    std::optional<bool> dd;
    if (a.apply_dedup == "on") dd = true;
    else if (a.apply_dedup == "off") dd = false;
    else require(a.apply_dedup == "auto", ErrorKind::Domain,
                 "lm score: --apply-dedup must be auto|on|off");
    std::ostringstream body;
    body << "# utt_id\ttotal_logprob\ttoken_count\tperplexity\n";
    for (const UnitSequence& us : corpus) {
        LogProbReport rep = scoreSequence(model, us, dd);
        body << us.utt_id << '\t' << fmt(rep.total_logprob) << '\t' << rep.token_count << '\t'
             << fmt(rep.perplexity) << '\n';
    }
    json cfg{{"subcommand", "lm score"},
             {"model", a.model},
             {"units", a.units},
             {"apply_dedup", a.apply_dedup}};
    writeResult(a.out, body.str(), cfg);
}

struct LmSampleArgs {
    std::string model, out, prompt_file;
    double temperature = 1.0;
    int n = 1, max_len = 100;
    std::uint64_t seed = 0;
};

void runLmSample(const LmSampleArgs& a) {
    NGramModel model = NGramModel::load(a.model);
    std::vector<UnitSequence> out_seqs;
    if (!a.prompt_file.empty()) {
        auto prompts = readUnitFile(a.prompt_file);
        for (std::size_t i = 0; i < prompts.size(); ++i) {
            UnitSequence us = sample(model, a.temperature, a.max_len,
                                     deriveSeed(a.seed, {static_cast<std::uint64_t>(i)}),
                                     &prompts[i].units);
            us.utt_id = prompts[i].utt_id;
            if (us.units.empty()) continue;  // empty continuation has no unit-file row
            out_seqs.push_back(std::move(us));
        }
    } else {
        for (int i = 0; i < a.n; ++i) {
            UnitSequence us = sample(model, a.temperature, a.max_len,
                                     deriveSeed(a.seed, {static_cast<std::uint64_t>(i)}));
            char id[32];
            std::snprintf(id, sizeof(id), "sample%04d", i);
            us.utt_id = id;
            if (us.units.empty()) continue;
            out_seqs.push_back(std::move(us));
        }
    }
    std::ostringstream body;
    writeUnitFile(body, out_seqs);
    json cfg{{"subcommand", "lm sample"}, {"model", a.model},
             {"temperature", a.temperature}, {"seed", a.seed},
             {"n", a.n},                   {"max_len", a.max_len},
             {"prompt_file", a.prompt_file}};
    writeResult(a.out, body.str(), cfg);
}

struct LmPairsArgs {
    std::string model, pairs, out = "-";
    std::string normalize = "per-token";
};

void runLmPairs(const LmPairsArgs& a) {
    NGramModel model = NGramModel::load(a.model);
    PairSet pairs = readPairFile(a.pairs);
    PairAccuracyResult res = pairAccuracy(model, pairs, pairNormalizeFromString(a.normalize));
    std::string body = "accuracy\terror_rate\tn_pairs\n" + fmt(res.accuracy) + "\t" +
                       fmt(res.error_rate) + "\t" + std::to_string(res.n_pairs) + "\n";
    json cfg{{"subcommand", "lm pairs"},
             {"model", a.model},
             {"pairs", a.pairs},
             {"normalize", a.normalize}};
    writeResult(a.out, body, cfg);
}

struct GenSweepArgs {
    std::string gen_model, samples_manifest, ref_model, out = "-";
    std::string grid = "default";
    int samples_per_temp = 500, max_len = 100, threads = 0;
    std::uint64_t seed = 0;
};

void runGenSweep(const GenSweepArgs& a) {
    require(a.gen_model.empty() != a.samples_manifest.empty(), ErrorKind::Domain,
            "gen sweep: pass exactly one of --gen-model / --samples-manifest");
    NGramModel ref = NGramModel::load(a.ref_model);
    SweepCurve curve;
    if (!a.gen_model.empty()) {
        NGramModel gen = NGramModel::load(a.gen_model);
        std::vector<double> grid = parseGrid(a.grid);
        SweepOptions opts;
        opts.samples_per_temp = a.samples_per_temp;
        opts.max_len = a.max_len;
        opts.seed = a.seed;
        opts.threads = a.threads;
        curve = temperatureSweep(gen, ref, grid, opts);
        curve.generator_id = a.gen_model;
    } else {
        // one `<temperature>\t<units-file>` row per line, paths relative to
        // the manifest
        std::ifstream in(a.samples_manifest);
        if (!in) fail(ErrorKind::Io, "cannot open " + a.samples_manifest);
        std::vector<std::pair<double, std::vector<UnitSequence>>> samples;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ss(line);
            double tau;
            std::string path;
            if (!(ss >> tau >> path))
                fail(ErrorKind::Format, a.samples_manifest + ":" + std::to_string(lineno) +
                                            ": expected `<temperature>\\t<units-file>`");
            auto resolved = resolveFramePath(a.samples_manifest, path);
            samples.emplace_back(tau, readUnitFile(resolved));
        }
        curve = sweepFromSamples(samples, ref);
        curve.generator_id = a.samples_manifest;
    }
    curve.reference_id = a.ref_model;
    std::ostringstream body;
    writeSweepTsv(body, curve);
    json cfg{{"subcommand", "gen sweep"},
             {"gen_model", a.gen_model},
             {"samples_manifest", a.samples_manifest},
             {"ref_model", a.ref_model},
             {"grid", a.gen_model.empty() ? std::string("external") : gridToString(parseGrid(a.grid))},
             {"samples_per_temp", a.samples_per_temp},
             {"max_len", a.max_len},
             {"seed", a.seed}};
    writeResult(a.out, body.str(), cfg);
}

struct GenAucArgs {
    std::string sweep, out = "-";
    double oracle_ppx = 0.0, oracle_vert = 0.0;
};

void runGenAuc(const GenAucArgs& a) {
    SweepCurve curve = readSweepTsv(a.sweep);
    OraclePoint oracle{a.oracle_ppx, a.oracle_vert};
    Anchors anchors = findAnchors(curve, oracle);
    auto cell = [](const std::optional<double>& v) {
        return v ? fmt(*v) : std::string("NOT-COMPUTABLE");
    };
    std::string auc_str = "NOT-COMPUTABLE";
    if (anchors.t_at_oracle_ppx && anchors.t_at_oracle_vert)
        auc_str = fmt(aucBetweenAnchors(curve, oracle));
    std::string body =
        "t_at_oracle_ppx\tt_at_oracle_vert\tppx_at_oracle_vert\tvert_at_oracle_ppx\tauc\n" +
        cell(anchors.t_at_oracle_ppx) + "\t" + cell(anchors.t_at_oracle_vert) + "\t" +
        cell(anchors.ppx_at_oracle_vert) + "\t" + cell(anchors.vert_at_oracle_ppx) + "\t" +
        auc_str + "\n";
    json cfg{{"subcommand", "gen auc"},
             {"sweep", a.sweep},
             {"oracle_ppx", a.oracle_ppx},
             {"oracle_vert", a.oracle_vert}};
    writeResult(a.out, body, cfg);
}

struct GenPickTempArgs {
    std::string gen_model, prompts, references, out = "-";
    std::string grid = "default", aggregate = "mean";
    int n_continuations = 10;
    std::uint64_t seed = 0;
};

void runGenPickTemp(const GenPickTempArgs& a) {
    NGramModel gen = NGramModel::load(a.gen_model);
    auto prompts = readUnitFile(a.prompts);
    auto refs_units = readUnitFile(a.references);
    require(prompts.size() == refs_units.size(), ErrorKind::Domain,
            "gen pick-temp: prompts and references must have the same number of utterances");
    std::vector<TokenSeq> references;
    references.reserve(refs_units.size());
    for (const UnitSequence& us : refs_units) references.push_back(us.units);
    std::vector<double> grid = parseGrid(a.grid);
    PickTempOptions opts;
    opts.n_continuations = a.n_continuations;
    opts.seed = a.seed;
    if (a.aggregate == "max") opts.aggregate = ContinuationAggregate::Max;
    else require(a.aggregate == "mean", ErrorKind::Domain,
                 "gen pick-temp: --aggregate must be mean|max");
    PickTempResult res = selectContinuationTemperature(gen, prompts, references, grid, opts);
    std::ostringstream body;
    body << "# temperature\tmean_bleu2\n";
    for (const auto& [tau, score] : res.score_per_temp)
        body << fmt(tau) << '\t' << fmt(score) << '\n';
    body << "selected\t" << fmt(res.selected_temperature) << '\n';
    json cfg{{"subcommand", "gen pick-temp"},
             {"gen_model", a.gen_model},
             {"prompts", a.prompts},
             {"references", a.references},
             {"grid", gridToString(grid)},
             {"n_continuations", a.n_continuations},
             {"aggregate", a.aggregate},
             {"seed", a.seed}};
    writeResult(a.out, body.str(), cfg);
}

struct ErArgs {
    std::string ref, hyp, out = "-";
    std::string level = "word";
    bool normalize = false;
};

void runEr(const ErArgs& a) {
    auto refs = readTranscriptFile(a.ref);
    auto hyps = readTranscriptFile(a.hyp);
    ErrorRateReport rep = errorRate(refs, hyps, transcriptLevelFromString(a.level), a.normalize);
    std::string body = "rate\tS\tI\tD\tN\n" + fmt(rep.rate) + "\t" +
                       std::to_string(rep.substitutions) + "\t" + std::to_string(rep.insertions) +
                       "\t" + std::to_string(rep.deletions) + "\t" +
                       std::to_string(rep.ref_token_count) + "\n";
    json cfg{{"subcommand", "er"},   {"level", a.level},        {"ref", a.ref},
             {"hyp", a.hyp},         {"normalize", a.normalize}};
    writeResult(a.out, body, cfg);
}

struct SynthMakeArgs {
    std::string config, out_dir;
};

void runSynthMake(const SynthMakeArgs& a) {
    std::ifstream in(a.config);
    if (!in) fail(ErrorKind::Io, "cannot open " + a.config);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Format, a.config + ": " + e.what());
    }
    checkKeys(j, {"corpus", "lexicon"}, "top level");

    SynthConfig cfg;
    if (j.contains("corpus")) {
        const json& c = j.at("corpus");
        checkKeys(c,
                  {"n_phones", "embed_dim", "frames_per_phone", "n_speakers",
                   "speaker_offset_scale", "within_class_noise", "n_utterances",
                   "phones_per_utterance", "frame_period_ms", "phone_mean_scale", "seed"},
                  "corpus");
        cfg.n_phones = jsonField(c, "n_phones", cfg.n_phones);
        cfg.embed_dim = jsonField(c, "embed_dim", cfg.embed_dim);
        cfg.frames_per_phone_min = rangeField(c, "frames_per_phone", 0, cfg.frames_per_phone_min);
        cfg.frames_per_phone_max = rangeField(c, "frames_per_phone", 1, cfg.frames_per_phone_max);
        cfg.n_speakers = jsonField(c, "n_speakers", cfg.n_speakers);
        cfg.speaker_offset_scale = jsonField(c, "speaker_offset_scale", cfg.speaker_offset_scale);
        cfg.within_class_noise = jsonField(c, "within_class_noise", cfg.within_class_noise);
        cfg.n_utterances = jsonField(c, "n_utterances", cfg.n_utterances);
        cfg.phones_per_utterance_min =
            rangeField(c, "phones_per_utterance", 0, cfg.phones_per_utterance_min);
        cfg.phones_per_utterance_max =
            rangeField(c, "phones_per_utterance", 1, cfg.phones_per_utterance_max);
        cfg.frame_period_ms = jsonField(c, "frame_period_ms", cfg.frame_period_ms);
        cfg.phone_mean_scale = jsonField(c, "phone_mean_scale", cfg.phone_mean_scale);
        cfg.seed = jsonField(c, "seed", cfg.seed);
    }

    std::filesystem::create_directories(a.out_dir);
    SynthCorpus corpus = makeSyntheticCorpus(cfg);
    writeCorpus(corpus, a.out_dir);

    json resolved{{"corpus",
                   {{"n_phones", cfg.n_phones},
                    {"embed_dim", cfg.embed_dim},
                    {"frames_per_phone", {cfg.frames_per_phone_min, cfg.frames_per_phone_max}},
                    {"n_speakers", cfg.n_speakers},
                    {"speaker_offset_scale", cfg.speaker_offset_scale},
                    {"within_class_noise", cfg.within_class_noise},
                    {"n_utterances", cfg.n_utterances},
                    {"phones_per_utterance",
                     {cfg.phones_per_utterance_min, cfg.phones_per_utterance_max}},
                    {"frame_period_ms", cfg.frame_period_ms},
                    {"phone_mean_scale", cfg.phone_mean_scale},
                    {"seed", cfg.seed}}}};

    if (j.contains("lexicon")) {
        const json& l = j.at("lexicon");
        checkKeys(l,
                  {"n_words", "vocab_size", "word_len", "n_train_utterances",
                   "words_per_utterance", "seed"},
                  "lexicon");
        LexiconConfig lex;
        lex.n_words = jsonField(l, "n_words", lex.n_words);
        lex.vocab_size = jsonField(l, "vocab_size", lex.vocab_size);
        lex.word_len_min = rangeField(l, "word_len", 0, lex.word_len_min);
        lex.word_len_max = rangeField(l, "word_len", 1, lex.word_len_max);
        lex.n_train_utterances = jsonField(l, "n_train_utterances", lex.n_train_utterances);
        lex.words_per_utterance_min =
            rangeField(l, "words_per_utterance", 0, lex.words_per_utterance_min);
        lex.words_per_utterance_max =
            rangeField(l, "words_per_utterance", 1, lex.words_per_utterance_max);
        lex.seed = jsonField(l, "seed", lex.seed);
        LexiconBench bench = makeLexiconBench(lex);
        writeUnitFile(std::filesystem::path(a.out_dir) / "lm_corpus.units", bench.train_corpus);
        writePairFile(std::filesystem::path(a.out_dir) / "pairs.tsv", bench.pairs);
        resolved["lexicon"] = {{"n_words", lex.n_words},
                               {"vocab_size", lex.vocab_size},
                               {"word_len", {lex.word_len_min, lex.word_len_max}},
                               {"n_train_utterances", lex.n_train_utterances},
                               {"words_per_utterance",
                                {lex.words_per_utterance_min, lex.words_per_utterance_max}},
                               {"seed", lex.seed}};
    }

    std::ofstream cfg_out(std::filesystem::path(a.out_dir) / "synth_config.json",
                          std::ios::binary | std::ios::trunc);
    cfg_out << resolved.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"unitlab: evaluation toolkit for discrete speech units"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress informational notes");

    QuantizeTrainArgs qt;
    auto* c_qt = app.add_subcommand("quantize-train", "train a k-means codebook on frame matrices");
    c_qt->add_option("--manifest", qt.manifest, "manifest TSV of frame files")->required();
    c_qt->add_option("--codebook", qt.codebook, "output codebook path")->required();
    c_qt->add_option("--k", qt.k, "number of units");
    c_qt->add_option("--seed", qt.seed, "RNG seed");
    c_qt->add_option("--max-iter", qt.max_iter, "Lloyd iteration cap");
    c_qt->add_option("--rel-tol", qt.rel_tol, "relative inertia stopping tolerance");
    c_qt->add_option("--threads", qt.threads, "thread cap (0 = all cores)");
    c_qt->add_option("--out", qt.out, "summary TSV ('-' for stdout)");

    QuantizeEncodeArgs qe;
    auto* c_qe = app.add_subcommand("quantize-encode", "encode frames to unit sequences");
    c_qe->add_option("--manifest", qe.manifest)->required();
    c_qe->add_option("--codebook", qe.codebook)->required();
    c_qe->add_option("--out", qe.out, "output unit file")->required();
    c_qe->add_option("--threads", qe.threads);

    DedupArgs dd;
    auto* c_dd = app.add_subcommand("dedup", "collapse sequential unit repetitions");
    c_dd->add_option("--in", dd.in, "input unit file")->required();
    c_dd->add_option("--out", dd.out, "output unit file")->required();

    BitrateArgs br;
    auto* c_br = app.add_subcommand("bitrate", "unit bitrate in bits/second");
    c_br->add_option("--units", br.units)->required();
    c_br->add_option("--manifest", br.manifest, "manifest TSV carrying durations")->required();
    c_br->add_flag("--raw", br.raw, "skip dedup before computing the rate");
    c_br->add_option("--out", br.out);

    AbxArgs abx;
    auto* c_abx = app.add_subcommand("abx", "ABX phone discriminability over triphone items");
    c_abx->add_option("--items", abx.items, "ABX item file")->required();
    c_abx->add_option("--manifest", abx.manifest)->required();
    c_abx->add_option("--mode", abx.mode, "within|across");
    c_abx->add_option("--metric", abx.metric, "angular|euclidean");
    c_abx->add_option("--max-triples", abx.max_triples, "per-cell triple cap");
    c_abx->add_option("--seed", abx.seed);
    c_abx->add_option("--threads", abx.threads);
    c_abx->add_option("--out", abx.out);

    auto* c_lm = app.add_subcommand("lm", "n-gram unit language model");
    c_lm->require_subcommand(1);

    LmTrainArgs lt;
    auto* c_lt = c_lm->add_subcommand("train", "train an n-gram model on a unit corpus");
    c_lt->add_option("--units", lt.units)->required();
    c_lt->add_option("--model", lt.model, "output model path")->required();
    c_lt->add_option("--order", lt.order);
    c_lt->add_option("--smoothing", lt.smoothing, "absolute-discount|add-k");
    c_lt->add_option("--discount", lt.discount);
    c_lt->add_option("--add-k", lt.add_k);
    c_lt->add_flag("--no-dedup", lt.no_dedup, "train on raw sequences");

    LmScoreArgs ls;
    auto* c_ls = c_lm->add_subcommand("score", "per-utterance log probability and perplexity");
    c_ls->add_option("--model", ls.model)->required();
    c_ls->add_option("--units", ls.units)->required();
    c_ls->add_option("--apply-dedup", ls.apply_dedup, "auto|on|off");
    c_ls->add_option("--out", ls.out);

    LmSampleArgs lsm;
    auto* c_lsm = c_lm->add_subcommand("sample", "temperature sampling");
    c_lsm->add_option("--model", lsm.model)->required();
    c_lsm->add_option("--temperature", lsm.temperature);
    c_lsm->add_option("--seed", lsm.seed);
    c_lsm->add_option("--n", lsm.n, "number of unconditional samples");
    c_lsm->add_option("--max-len", lsm.max_len);
    c_lsm->add_option("--prompt-file", lsm.prompt_file, "unit file; one continuation per prompt");
    c_lsm->add_option("--out", lsm.out, "output unit file")->required();

    LmPairsArgs lp;
    auto* c_lp = c_lm->add_subcommand("pairs", "spot-the-word / acceptability pair scoring");
    c_lp->add_option("--model", lp.model)->required();
    c_lp->add_option("--pairs", lp.pairs, "pair TSV")->required();
    c_lp->add_option("--normalize", lp.normalize, "total|per-token");
    c_lp->add_option("--out", lp.out);

    auto* c_gen = app.add_subcommand("gen", "generation quality/diversity metrics");
    c_gen->require_subcommand(1);

    GenSweepArgs gs;
    auto* c_gs = c_gen->add_subcommand("sweep", "temperature sweep: median PPX and VERT per tau");
    c_gs->add_option("--gen-model", gs.gen_model, "generator model (sampled)");
    c_gs->add_option("--samples-manifest", gs.samples_manifest,
                     "externally generated samples: `<temperature>\\t<units-file>` rows");
    c_gs->add_option("--ref-model", gs.ref_model, "reference model for perplexity")->required();
    c_gs->add_option("--grid", gs.grid, "comma-separated temperatures or 'default'");
    c_gs->add_option("--samples-per-temp", gs.samples_per_temp);
    c_gs->add_option("--max-len", gs.max_len);
    c_gs->add_option("--seed", gs.seed);
    c_gs->add_option("--threads", gs.threads);
    c_gs->add_option("--out", gs.out);

    GenAucArgs ga;
    auto* c_ga = c_gen->add_subcommand("auc", "oracle anchors and AUC from a sweep TSV");
    c_ga->add_option("--sweep", ga.sweep, "sweep TSV")->required();
    c_ga->add_option("--oracle-ppx", ga.oracle_ppx, "oracle median perplexity")->required();
    c_ga->add_option("--oracle-vert", ga.oracle_vert, "oracle VERT (fraction)")->required();
    c_ga->add_option("--out", ga.out);

    GenPickTempArgs gp;
    auto* c_gp = c_gen->add_subcommand("pick-temp", "continuation-based temperature selection");
    c_gp->add_option("--gen-model", gp.gen_model)->required();
    c_gp->add_option("--prompts", gp.prompts, "unit file of prompts")->required();
    c_gp->add_option("--references", gp.references, "unit file of aligned references")->required();
    c_gp->add_option("--grid", gp.grid);
    c_gp->add_option("--n-continuations", gp.n_continuations);
    c_gp->add_option("--aggregate", gp.aggregate, "mean|max over continuations per prompt");
    c_gp->add_option("--seed", gp.seed);
    c_gp->add_option("--out", gp.out);

    ErArgs er;
    auto* c_er = app.add_subcommand("er", "transcript error rate (PER/CER/WER)");
    c_er->add_option("--level", er.level, "phone|char|word");
    c_er->add_option("--ref", er.ref, "reference transcript TSV")->required();
    c_er->add_option("--hyp", er.hyp, "hypothesis transcript TSV")->required();
    c_er->add_flag("--normalize", er.normalize, "case-fold and strip punctuation first");
    c_er->add_option("--out", er.out);

    auto* c_synth = app.add_subcommand("synth", "synthetic ground-truth corpora");
    c_synth->require_subcommand(1);
    SynthMakeArgs sm;
    auto* c_sm = c_synth->add_subcommand("make", "generate a synthetic corpus");
    c_sm->add_option("--config", sm.config, "JSON config")->required();
    c_sm->add_option("--out", sm.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // exit 0 with help text
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage error
    }

    lt.quiet = quiet;
    try {
        if (*c_qt) runQuantizeTrain(qt);
        else if (*c_qe) runQuantizeEncode(qe);
        else if (*c_dd) runDedup(dd);
        else if (*c_br) runBitrate(br);
        else if (*c_abx) runAbx(abx);
        else if (*c_lt) runLmTrain(lt);
        else if (*c_ls) runLmScore(ls);
        else if (*c_lsm) runLmSample(lsm);
        else if (*c_lp) runLmPairs(lp);
        else if (*c_gs) runGenSweep(gs);
        else if (*c_ga) runGenAuc(ga);
        else if (*c_gp) runGenPickTemp(gp);
        else if (*c_er) runEr(er);
        else if (*c_sm) runSynthMake(sm);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
