#include "unitlab/synth.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <set>

#include "unitlab/error.hpp"
#include "unitlab/io.hpp"
#include "unitlab/rng.hpp"

namespace unitlab {
namespace {

double f32exact(double v) { return static_cast<double>(static_cast<float>(v)); }

int rangeDraw(Rng& rng, int lo, int hi) {
    return lo + static_cast<int>(rng.integer(static_cast<std::uint64_t>(hi - lo + 1)));
}

}  // namespace

SynthCorpus makeSyntheticCorpus(const SynthConfig& cfg) {
    require(cfg.n_phones >= 1 && cfg.embed_dim >= 1 && cfg.n_speakers >= 1 &&
                cfg.n_utterances >= 1,
            ErrorKind::Domain, "makeSyntheticCorpus: counts must be >= 1");
    require(cfg.frames_per_phone_min >= 1 && cfg.frames_per_phone_max >= cfg.frames_per_phone_min,
            ErrorKind::Domain, "makeSyntheticCorpus: bad frames_per_phone range");
    require(cfg.phones_per_utterance_min >= 1 &&
                cfg.phones_per_utterance_max >= cfg.phones_per_utterance_min,
            ErrorKind::Domain, "makeSyntheticCorpus: bad phones_per_utterance range");
    require(cfg.within_class_noise >= 0.0, ErrorKind::Domain,
            "makeSyntheticCorpus: sigma must be >= 0");
    require(cfg.frame_period_ms > 0.0, ErrorKind::Domain,
            "makeSyntheticCorpus: frame period must be positive");

    Rng rng(deriveSeed(cfg.seed, {0xc0f1}));
    SynthCorpus corpus;

    corpus.phone_means.resize(cfg.n_phones, cfg.embed_dim);
    for (int p = 0; p < cfg.n_phones; ++p)
        for (int d = 0; d < cfg.embed_dim; ++d)
            corpus.phone_means(p, d) = f32exact(cfg.phone_mean_scale * rng.gaussian());

    corpus.speaker_offsets.resize(cfg.n_speakers, cfg.embed_dim);
    for (int s = 0; s < cfg.n_speakers; ++s)
        for (int d = 0; d < cfg.embed_dim; ++d)
            corpus.speaker_offsets(s, d) = f32exact(cfg.speaker_offset_scale * rng.gaussian());

    // Overlap warning only; separation is the caller's choice.
    double min_dist = std::numeric_limits<double>::infinity();
    for (int p = 0; p < cfg.n_phones; ++p)
        for (int q = p + 1; q < cfg.n_phones; ++q)
            min_dist = std::min(min_dist,
                                (corpus.phone_means.row(p) - corpus.phone_means.row(q)).norm());
    if (cfg.n_phones > 1 && min_dist < 6.0 * cfg.within_class_noise)
        std::cerr << "warning: phone clusters may overlap (min mean distance " << min_dist
                  << " vs sigma " << cfg.within_class_noise << ")\n";

    double period_s = cfg.frame_period_ms / 1000.0;
    for (int u = 0; u < cfg.n_utterances; ++u) {
        std::string utt_id = "u" + std::to_string(u);
        int speaker = u % cfg.n_speakers;
        int n_ph = rangeDraw(rng, cfg.phones_per_utterance_min, cfg.phones_per_utterance_max);

        std::vector<int> phones(static_cast<std::size_t>(n_ph));
        std::vector<int> lengths(static_cast<std::size_t>(n_ph));
        int total_frames = 0;
        for (int i = 0; i < n_ph; ++i) {
            phones[static_cast<std::size_t>(i)] =
                static_cast<int>(rng.integer(static_cast<std::uint64_t>(cfg.n_phones)));
            lengths[static_cast<std::size_t>(i)] =
                rangeDraw(rng, cfg.frames_per_phone_min, cfg.frames_per_phone_max);
            total_frames += lengths[static_cast<std::size_t>(i)];
        }

        FrameMatrix fm;
        fm.utt_id = utt_id;
        fm.frame_period_ms = cfg.frame_period_ms;
        fm.data.resize(total_frames, cfg.embed_dim);
        UnitSequence gold;
        gold.utt_id = utt_id;
        Transcript tr;
        tr.utt_id = utt_id;

        int frame = 0;
        std::vector<int> starts(static_cast<std::size_t>(n_ph));
        for (int i = 0; i < n_ph; ++i) {
            starts[static_cast<std::size_t>(i)] = frame;
            int phone = phones[static_cast<std::size_t>(i)];
            tr.tokens.push_back("p" + std::to_string(phone));
            for (int f = 0; f < lengths[static_cast<std::size_t>(i)]; ++f, ++frame) {
                for (int d = 0; d < cfg.embed_dim; ++d) {
                    double v = corpus.phone_means(phone, d) + corpus.speaker_offsets(speaker, d) +
                               cfg.within_class_noise * rng.gaussian();
                    fm.data(frame, d) = f32exact(v);
                }
                gold.units.push_back(phone);
            }
        }
        gold.duration_s = fm.durationS();

        // interior triphones
        for (int i = 1; i + 1 < n_ph; ++i) {
            AbxItem item;
            item.utt_id = utt_id;
            item.onset_s = starts[static_cast<std::size_t>(i)] * period_s;
            item.offset_s = (starts[static_cast<std::size_t>(i)] +
                             lengths[static_cast<std::size_t>(i)]) *
                            period_s;
            item.center_phone = "p" + std::to_string(phones[static_cast<std::size_t>(i)]);
            item.prev_phone = "p" + std::to_string(phones[static_cast<std::size_t>(i - 1)]);
            item.next_phone = "p" + std::to_string(phones[static_cast<std::size_t>(i + 1)]);
            item.speaker = "spk" + std::to_string(speaker);
            corpus.items.items.push_back(std::move(item));
        }

        ManifestEntry entry;
        entry.utt_id = utt_id;
        entry.speaker = "spk" + std::to_string(speaker);
        entry.duration_s = fm.durationS();
        corpus.manifest.push_back(std::move(entry));
        corpus.frames.push_back(std::move(fm));
        corpus.gold_units.push_back(std::move(gold));
        corpus.transcripts.push_back(std::move(tr));
    }
    return corpus;
}

void writeCorpus(SynthCorpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "frames");
    for (std::size_t i = 0; i < corpus.frames.size(); ++i) {
        std::string rel = "frames/" + corpus.frames[i].utt_id + ".gslf";
        writeFrameMatrix(dir / rel, corpus.frames[i]);
        corpus.manifest[i].frame_path = rel;
    }
    writeManifest(dir / "manifest.tsv", corpus.manifest);
    writeUnitFile(dir / "gold_units.units", corpus.gold_units);
    writeTranscriptFile(dir / "transcripts.tsv", corpus.transcripts);
    writeAbxItemFile(dir / "items.item", corpus.items);
}

LexiconBench makeLexiconBench(const LexiconConfig& cfg) {
    require(cfg.n_words >= 1 && cfg.vocab_size >= 3, ErrorKind::Domain,
            "makeLexiconBench: need n_words >= 1 and vocab_size >= 3");
    require(cfg.word_len_min >= 2 && cfg.word_len_max >= cfg.word_len_min, ErrorKind::Domain,
            "makeLexiconBench: bad word length range");
    require(cfg.n_train_utterances >= 1 && cfg.words_per_utterance_min >= 1 &&
                cfg.words_per_utterance_max >= cfg.words_per_utterance_min,
            ErrorKind::Domain, "makeLexiconBench: bad corpus shape");

    Rng rng(deriveSeed(cfg.seed, {0x1e71c0}));
    LexiconBench bench;

    // Distinct words without adjacent repeats, so dedup leaves them intact.
    std::set<std::vector<std::int32_t>> seen;
    while (static_cast<int>(bench.words.size()) < cfg.n_words) {
        int len = rangeDraw(rng, cfg.word_len_min, cfg.word_len_max);
        std::vector<std::int32_t> word;
        word.reserve(static_cast<std::size_t>(len));
        while (static_cast<int>(word.size()) < len) {
            std::int32_t unit =
                static_cast<std::int32_t>(rng.integer(static_cast<std::uint64_t>(cfg.vocab_size)));
            if (!word.empty() && word.back() == unit) continue;
            word.push_back(unit);
        }
        if (seen.insert(word).second) bench.words.push_back(std::move(word));
    }

    for (int u = 0; u < cfg.n_train_utterances; ++u) {
        UnitSequence us;
        us.utt_id = "w" + std::to_string(u);
        int n_words = rangeDraw(rng, cfg.words_per_utterance_min, cfg.words_per_utterance_max);
        for (int i = 0; i < n_words; ++i) {
            const auto& word =
                bench.words[rng.integer(static_cast<std::uint64_t>(bench.words.size()))];
            for (std::int32_t unit : word) {
                if (!us.units.empty() && us.units.back() == unit) continue;  // keep dedup a no-op
                us.units.push_back(unit);
            }
        }
        bench.train_corpus.push_back(std::move(us));
    }

    // Pseudoword: substitute one interior unit with a unit that keeps the
    // string free of adjacent repeats and distinct from every real word.
    for (std::size_t w = 0; w < bench.words.size(); ++w) {
        const auto& word = bench.words[w];
        std::vector<std::int32_t> pseudo;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            pseudo = word;
            std::size_t pos = 1 + rng.integer(word.size() - 1);
            std::int32_t unit =
                static_cast<std::int32_t>(rng.integer(static_cast<std::uint64_t>(cfg.vocab_size)));
            if (unit == word[pos]) continue;
            if (pos > 0 && pseudo[pos - 1] == unit) continue;
            if (pos + 1 < pseudo.size() && pseudo[pos + 1] == unit) continue;
            pseudo[pos] = unit;
            if (seen.count(pseudo)) continue;
            break;
        }
        require(pseudo != word, ErrorKind::Domain, "makeLexiconBench: failed to build pseudoword");
        UnitPair pair;
        pair.pair_id = "pair" + std::to_string(w);
        pair.positive = word;
        pair.negative = pseudo;
        bench.pairs.pairs.push_back(std::move(pair));
    }
    return bench;
}

}  // namespace unitlab
