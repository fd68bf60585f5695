#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "unitlab/types.hpp"

namespace unitlab {

// Synthetic ground-truth corpus: each phone is a Gaussian cluster mean in
// R^D, each speaker an additive offset, utterances are random phone strings
// rendered as per-frame samples mean + offset + noise.
struct SynthConfig {
    int n_phones = 8;
    int embed_dim = 8;
    int frames_per_phone_min = 3;
    int frames_per_phone_max = 8;
    int n_speakers = 2;
    double speaker_offset_scale = 1.0;
    double within_class_noise = 0.1;  // sigma
    int n_utterances = 50;
    int phones_per_utterance_min = 4;
    int phones_per_utterance_max = 10;
    double frame_period_ms = 10.0;
    double phone_mean_scale = 5.0;  // cluster separation knob
    std::uint64_t seed = 0;
};

struct SynthCorpus {
    std::vector<FrameMatrix> frames;       // one per utterance, f32-exact values
    std::vector<UnitSequence> gold_units;  // per-frame phone IDs
    std::vector<Transcript> transcripts;   // phone-name tokens ("p0", "p1", ...)
    AbxItemSet items;                      // all interior triphones
    std::vector<ManifestEntry> manifest;   // frame_path filled by writeCorpus
    Matrix phone_means;                    // n_phones x D
    Matrix speaker_offsets;                // n_speakers x D
};

SynthCorpus makeSyntheticCorpus(const SynthConfig& cfg);

// Writes every corpus-io format under `dir`: frames/<utt>.gslf, manifest.tsv,
// gold_units.units, transcripts.tsv, items.item.
void writeCorpus(SynthCorpus& corpus, const std::filesystem::path& dir);

// Word-lexicon benchmark for spot-the-word: a lexicon of unit strings, a
// training corpus of word concatenations, and word/pseudoword pairs (one unit
// of each word substituted, avoiding adjacent repeats).
struct LexiconConfig {
    int n_words = 200;
    int vocab_size = 30;
    int word_len_min = 3;
    int word_len_max = 6;
    int n_train_utterances = 400;
    int words_per_utterance_min = 3;
    int words_per_utterance_max = 8;
    std::uint64_t seed = 0;
};

struct LexiconBench {
    std::vector<std::vector<std::int32_t>> words;
    std::vector<UnitSequence> train_corpus;
    PairSet pairs;  // one pair per word: (word, pseudoword)
};

LexiconBench makeLexiconBench(const LexiconConfig& cfg);

}  // namespace unitlab
