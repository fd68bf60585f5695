#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unitlab/ngram.hpp"
#include "unitlab/types.hpp"

namespace unitlab {

using TokenSeq = std::vector<std::int32_t>;

// Maps string tokens to dense integer IDs so text corpora can run through the
// integer-token metric core.
std::vector<TokenSeq> internTokens(const std::vector<std::vector<std::string>>& corpus);

// Within-utterance repetition: for each k in [1, n], the fraction of k-gram
// occurrences whose k-gram appears elsewhere in the utterance; geometric mean
// over k. Utterances shorter than k contribute 0 for that k.
double autoBleu(std::span<const std::int32_t> u, int n);
double meanAutoBleu(const std::vector<TokenSeq>& corpus, int n);

// Smoothed sentence BLEU-n: clipped modified precision, add-1 smoothing on
// orders >= 2, brevity penalty against the closest reference length.
double sentenceBleu(std::span<const std::int32_t> hyp, const std::vector<TokenSeq>& refs, int n);

// Mean over utterances of sentence BLEU-n against the rest of the corpus.
double selfBleu(const std::vector<TokenSeq>& corpus, int n);

// sqrt(selfBleu(corpus, 2) * meanAutoBleu(corpus, 2)); lower = more diverse.
double vert(const std::vector<TokenSeq>& corpus, int n = 2);

// Median over utterances of per-utterance perplexity under the reference.
double corpusPerplexity(const NGramModel& ref, const std::vector<UnitSequence>& corpus);

struct SweepPoint {
    double temperature = 0.0;
    double median_ppx = 1.0;
    double vert = 0.0;
    std::int64_t n_samples = 0;
};

struct SweepCurve {
    std::vector<SweepPoint> points;  // temperatures strictly increasing
    std::string generator_id;
    std::string reference_id;
};

// The temperature grid used for sweeps: 0.3..1.4 in steps of 0.1, then 1.5,
// 1.7, 1.9, 2.1, 2.3, 2.5, 3.0.
const std::vector<double>& defaultTemperatureGrid();

struct SweepOptions {
    int samples_per_temp = 500;
    int max_len = 100;
    std::uint64_t seed = 0;
    int threads = 0;
};

// Samples `samples_per_temp` utterances per temperature from `gen`, scoring
// median perplexity under `ref` and VERT. Deterministic given the seed.
SweepCurve temperatureSweep(const NGramModel& gen, const NGramModel& ref,
                            std::span<const double> grid, const SweepOptions& opts = {});

// Same curve from externally generated samples (one corpus per temperature).
SweepCurve sweepFromSamples(const std::vector<std::pair<double, std::vector<UnitSequence>>>& samples,
                            const NGramModel& ref);

struct OraclePoint {
    double ppx = 1.0;   // oracle-text median perplexity
    double vert = 0.0;  // oracle-text VERT, as a fraction
};

// Crossing temperatures by piecewise-linear interpolation (log-perplexity or
// VERT against temperature); unset fields mean NOT-COMPUTABLE (crossing not
// bracketed by the grid).
struct Anchors {
    std::optional<double> t_at_oracle_ppx;
    std::optional<double> t_at_oracle_vert;
    std::optional<double> ppx_at_oracle_vert;
    std::optional<double> vert_at_oracle_ppx;
};

Anchors findAnchors(const SweepCurve& curve, const OraclePoint& oracle);

// Excess area above the oracle: axes normalized by the oracle values, then
// integral of max(y - 1, 0) dx along the curve between the two anchor
// temperatures (anchor endpoints interpolated in). Errors if either anchor is
// NOT-COMPUTABLE.
double aucBetweenAnchors(const SweepCurve& curve, const OraclePoint& oracle);

enum class ContinuationAggregate { Mean, Max };

struct PickTempOptions {
    int n_continuations = 10;
    std::uint64_t seed = 0;
    ContinuationAggregate aggregate = ContinuationAggregate::Mean;
};

struct PickTempResult {
    double selected_temperature = 0.0;
    std::vector<std::pair<double, double>> score_per_temp;  // (temperature, BLEU-2)
};

// For each grid temperature, samples length-matched continuations of every
// prompt and scores BLEU-2 against the aligned reference; returns the argmax
// temperature (lowest on ties).
PickTempResult selectContinuationTemperature(const NGramModel& gen,
                                             const std::vector<UnitSequence>& prompts,
                                             const std::vector<TokenSeq>& references,
                                             std::span<const double> grid,
                                             const PickTempOptions& opts = {});

// Sweep TSV: `temperature\tmedian_ppx\tvert\tn_samples` rows; '#' lines
// skipped on read.
void writeSweepTsv(std::ostream& out, const SweepCurve& curve);
SweepCurve readSweepTsv(const std::filesystem::path& path);

}  // namespace unitlab
