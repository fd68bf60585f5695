#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "unitlab/types.hpp"

namespace unitlab {

// Sentinels; BOS only ever appears in contexts, EOS only as a predicted event.
inline constexpr std::int32_t kBos = -1;
inline constexpr std::int32_t kEos = -2;

enum class Smoothing { AbsoluteDiscount, AddK };

Smoothing smoothingFromString(const std::string& name);
std::string toString(Smoothing s);

struct NGramOptions {
    int order = 5;
    Smoothing smoothing = Smoothing::AbsoluteDiscount;
    double discount = 0.75;  // absolute-discount mass in (0,1)
    double add_k = 1.0;      // add-k pseudo-count, > 0
    bool dedup = true;       // collapse unit repetitions before counting
};

struct LogProbReport {
    double total_logprob = 0.0;      // nats; includes the terminal EOS event
    std::vector<double> per_token;   // one entry per content token plus EOS
    std::int64_t token_count = 0;    // content tokens only
    double perplexity = 1.0;         // exp(-total / max(token_count, 1))
};

// Interpolated back-off n-gram model over unit IDs. Both smoothers ground out
// in a uniform distribution over vocabulary + EOS, so every token has positive
// probability and every conditional sums to one.
class NGramModel {
  public:
    int order() const { return order_; }
    Smoothing smoothing() const { return smoothing_; }
    double discount() const { return discount_; }
    double addK() const { return add_k_; }
    bool dedupApplied() const { return dedup_; }
    std::uint64_t trainingTokens() const { return training_tokens_; }
    const std::vector<std::int32_t>& vocabulary() const { return vocab_; }

    // vocabulary in ascending ID order, then EOS; the axis used by
    // nextTokenDistribution.
    const std::vector<std::int32_t>& predTokens() const { return pred_tokens_; }

    // ln P(token | context); context is clipped to the last order-1 entries.
    // Tokens outside the vocabulary get the smoothing floor.
    double tokenLogProb(std::span<const std::int32_t> context, std::int32_t token) const;

    // Full conditional over predTokens(); sums to 1 within 1e-12.
    std::vector<double> nextTokenDistribution(std::span<const std::int32_t> context) const;

    void save(const std::filesystem::path& path) const;
    static NGramModel load(const std::filesystem::path& path);

  private:
    struct ContextStats {
        std::uint64_t total = 0;
        std::vector<std::pair<std::int32_t, std::uint64_t>> counts;  // sorted by token
        std::uint64_t countOf(std::int32_t token) const;
    };

    static std::string contextKey(std::span<const std::int32_t> ctx);
    const ContextStats* findContext(int level, std::span<const std::int32_t> ctx) const;

    int order_ = 1;
    Smoothing smoothing_ = Smoothing::AbsoluteDiscount;
    double discount_ = 0.75;
    double add_k_ = 1.0;
    bool dedup_ = true;
    std::uint64_t training_tokens_ = 0;
    std::vector<std::int32_t> vocab_;
    std::vector<std::int32_t> pred_tokens_;
    std::unordered_map<std::int32_t, std::size_t> pred_index_;
    // tables_[L]: contexts of length L, L in [0, order).
    std::vector<std::unordered_map<std::string, ContextStats>> tables_;

    friend NGramModel trainNGram(const std::vector<UnitSequence>&, const NGramOptions&);
};

NGramModel trainNGram(const std::vector<UnitSequence>& corpus, const NGramOptions& opts = {});

// Chain-rule log probability with BOS padding and EOS termination. When
// apply_dedup is unset the model's training-time convention is used.
LogProbReport scoreSequence(const NGramModel& model, std::span<const std::int32_t> units,
                            std::optional<bool> apply_dedup = std::nullopt);
LogProbReport scoreSequence(const NGramModel& model, const UnitSequence& units,
                            std::optional<bool> apply_dedup = std::nullopt);

// Temperature sampling: draws from P(w|context)^(1/tau), renormalized, until
// EOS or max_len tokens. Prompt tokens are conditioned on but not emitted.
UnitSequence sample(const NGramModel& model, double temperature, int max_len, std::uint64_t seed,
                    const std::vector<std::int32_t>* prompt = nullptr);

// Exactly `len` tokens; EOS is excluded from the candidate set. Used for
// length-matched continuations.
std::vector<std::int32_t> sampleFixedLength(const NGramModel& model, double temperature, int len,
                                            std::uint64_t seed,
                                            std::span<const std::int32_t> prompt = {});

enum class PairNormalize { Total, PerToken };

PairNormalize pairNormalizeFromString(const std::string& name);

struct PairAccuracyResult {
    double accuracy = 0.0;
    double error_rate = 0.0;
    std::int64_t n_pairs = 0;
};

// Spot-the-word / acceptability scoring: fraction of pairs whose positive
// member outscores the negative one (ties count 0.5).
PairAccuracyResult pairAccuracy(const NGramModel& model, const PairSet& pairs,
                                PairNormalize normalize = PairNormalize::PerToken);

// p_i -> p_i^(1/tau), renormalized.
std::vector<double> applyTemperature(const std::vector<double>& probs, double temperature);

}  // namespace unitlab
