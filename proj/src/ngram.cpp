#include "unitlab/ngram.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "unitlab/error.hpp"
#include "unitlab/quantizer.hpp"
#include "unitlab/rng.hpp"

namespace unitlab {
namespace {

constexpr char kModelMagic[4] = {'G', 'S', 'L', 'M'};
constexpr std::uint16_t kModelVersion = 1;

std::span<const std::int32_t> clipContext(std::span<const std::int32_t> ctx, int order) {
    std::size_t max_len = static_cast<std::size_t>(order - 1);
    if (ctx.size() <= max_len) return ctx;
    return ctx.subspan(ctx.size() - max_len);
}

}  // namespace

Smoothing smoothingFromString(const std::string& name) {
    if (name == "absolute-discount") return Smoothing::AbsoluteDiscount;
    if (name == "add-k") return Smoothing::AddK;
    fail(ErrorKind::Domain, "unknown smoothing '" + name + "' (absolute-discount|add-k)");
}

std::string toString(Smoothing s) {
    return s == Smoothing::AbsoluteDiscount ? "absolute-discount" : "add-k";
}

std::uint64_t NGramModel::ContextStats::countOf(std::int32_t token) const {
    auto it = std::lower_bound(counts.begin(), counts.end(), token,
                               [](const auto& entry, std::int32_t t) { return entry.first < t; });
    if (it != counts.end() && it->first == token) return it->second;
    return 0;
}

std::string NGramModel::contextKey(std::span<const std::int32_t> ctx) {
    std::string key;
    key.resize(ctx.size() * 4);
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        std::uint32_t v = static_cast<std::uint32_t>(ctx[i]);
        for (int b = 0; b < 4; ++b) key[i * 4 + static_cast<std::size_t>(b)] = static_cast<char>((v >> (8 * b)) & 0xff);
    }
    return key;
}

const NGramModel::ContextStats* NGramModel::findContext(int level,
                                                        std::span<const std::int32_t> ctx) const {
    const auto& table = tables_[static_cast<std::size_t>(level)];
    auto found = table.find(contextKey(ctx.subspan(ctx.size() - static_cast<std::size_t>(level))));
    return found == table.end() ? nullptr : &found->second;
}

double NGramModel::tokenLogProb(std::span<const std::int32_t> context, std::int32_t token) const {
    std::span<const std::int32_t> ctx = clipContext(context, order_);
    double p = 1.0 / static_cast<double>(pred_tokens_.size());
    for (int level = 0; level <= static_cast<int>(ctx.size()); ++level) {
        const ContextStats* stats = findContext(level, ctx);
        if (stats == nullptr || stats->total == 0) continue;
        double total = static_cast<double>(stats->total);
        double c = static_cast<double>(stats->countOf(token));
        if (smoothing_ == Smoothing::AbsoluteDiscount) {
            double lambda = discount_ * static_cast<double>(stats->counts.size()) / total;
            p = std::max(c - discount_, 0.0) / total + lambda * p;
        } else {
            double alpha = add_k_ * static_cast<double>(pred_tokens_.size());
            p = (c + alpha * p) / (total + alpha);
        }
    }
    return std::log(p);
}

std::vector<double> NGramModel::nextTokenDistribution(std::span<const std::int32_t> context) const {
    std::span<const std::int32_t> ctx = clipContext(context, order_);
    const std::size_t v = pred_tokens_.size();
    std::vector<double> p(v, 1.0 / static_cast<double>(v));
    for (int level = 0; level <= static_cast<int>(ctx.size()); ++level) {
        const ContextStats* stats = findContext(level, ctx);
        if (stats == nullptr || stats->total == 0) continue;
        double total = static_cast<double>(stats->total);
        if (smoothing_ == Smoothing::AbsoluteDiscount) {
            double lambda = discount_ * static_cast<double>(stats->counts.size()) / total;
            for (double& x : p) x *= lambda;
            for (const auto& [token, count] : stats->counts)
                p[pred_index_.at(token)] += (static_cast<double>(count) - discount_) / total;
        } else {
            double alpha = add_k_ * static_cast<double>(v);
            double denom = total + alpha;
            for (double& x : p) x = alpha * x / denom;
            for (const auto& [token, count] : stats->counts)
                p[pred_index_.at(token)] += static_cast<double>(count) / denom;
        }
    }
    return p;
}

NGramModel trainNGram(const std::vector<UnitSequence>& corpus, const NGramOptions& opts) {
    require(!corpus.empty(), ErrorKind::Domain, "trainNGram: empty corpus");
    require(opts.order >= 1, ErrorKind::Domain, "trainNGram: order must be >= 1");
    if (opts.smoothing == Smoothing::AbsoluteDiscount)
        require(opts.discount > 0.0 && opts.discount < 1.0, ErrorKind::Domain,
                "trainNGram: discount must lie in (0,1)");
    else
        require(opts.add_k > 0.0, ErrorKind::Domain, "trainNGram: add_k must be positive");

    NGramModel model;
    model.order_ = opts.order;
    model.smoothing_ = opts.smoothing;
    model.discount_ = opts.discount;
    model.add_k_ = opts.add_k;
    model.dedup_ = opts.dedup;

    std::set<std::int32_t> vocab;
    std::vector<std::unordered_map<std::string, std::unordered_map<std::int32_t, std::uint64_t>>>
        counting(static_cast<std::size_t>(opts.order));

    for (const UnitSequence& us : corpus) {
        std::vector<std::int32_t> tokens =
            opts.dedup ? dedup(std::span<const std::int32_t>(us.units)) : us.units;
        for (std::int32_t u : tokens) {
            require(u >= 0, ErrorKind::Domain, "trainNGram: negative unit ID in " + us.utt_id);
            vocab.insert(u);
        }
        model.training_tokens_ += tokens.size();

        std::vector<std::int32_t> padded(static_cast<std::size_t>(opts.order - 1), kBos);
        padded.insert(padded.end(), tokens.begin(), tokens.end());
        padded.push_back(kEos);
        std::size_t history = static_cast<std::size_t>(opts.order - 1);
        for (std::size_t pos = history; pos < padded.size(); ++pos) {
            std::int32_t token = padded[pos];
            for (std::size_t level = 0; level <= history; ++level) {
                std::span<const std::int32_t> ctx(padded.data() + pos - level, level);
                ++counting[level][NGramModel::contextKey(ctx)][token];
            }
        }
    }

    model.vocab_.assign(vocab.begin(), vocab.end());
    model.pred_tokens_ = model.vocab_;
    model.pred_tokens_.push_back(kEos);
    for (std::size_t i = 0; i < model.pred_tokens_.size(); ++i)
        model.pred_index_[model.pred_tokens_[i]] = i;

    model.tables_.resize(static_cast<std::size_t>(opts.order));
    for (std::size_t level = 0; level < counting.size(); ++level) {
        for (auto& [key, token_counts] : counting[level]) {
            NGramModel::ContextStats stats;
            stats.counts.assign(token_counts.begin(), token_counts.end());
            std::sort(stats.counts.begin(), stats.counts.end());
            for (const auto& [token, count] : stats.counts) stats.total += count;
            model.tables_[level].emplace(key, std::move(stats));
        }
    }
    return model;
}

LogProbReport scoreSequence(const NGramModel& model, std::span<const std::int32_t> units,
                            std::optional<bool> apply_dedup) {
    bool do_dedup = apply_dedup.value_or(model.dedupApplied());
    std::vector<std::int32_t> tokens = do_dedup ? dedup(units)
                                                : std::vector<std::int32_t>(units.begin(), units.end());
    std::size_t history = static_cast<std::size_t>(model.order() - 1);
    std::vector<std::int32_t> padded(history, kBos);
    padded.insert(padded.end(), tokens.begin(), tokens.end());
    padded.push_back(kEos);

    LogProbReport report;
    report.token_count = static_cast<std::int64_t>(tokens.size());
    for (std::size_t pos = history; pos < padded.size(); ++pos) {
        std::span<const std::int32_t> ctx(padded.data() + pos - history, history);
        double lp = model.tokenLogProb(ctx, padded[pos]);
        report.per_token.push_back(lp);
        report.total_logprob += lp;
    }
    report.perplexity =
        std::exp(-report.total_logprob / static_cast<double>(std::max<std::int64_t>(report.token_count, 1)));
    return report;
}

LogProbReport scoreSequence(const NGramModel& model, const UnitSequence& units,
                            std::optional<bool> apply_dedup) {
    return scoreSequence(model, std::span<const std::int32_t>(units.units), apply_dedup);
}

std::vector<double> applyTemperature(const std::vector<double>& probs, double temperature) {
    require(temperature > 0.0, ErrorKind::Domain, "applyTemperature: temperature must be > 0");
    if (temperature == 1.0) return probs;
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        logs[i] = std::log(probs[i]) / temperature;
        max_log = std::max(max_log, logs[i]);
    }
    std::vector<double> out(probs.size());
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        out[i] = std::exp(logs[i] - max_log);
        total += out[i];
    }
    for (double& x : out) x /= total;
    return out;
}

namespace {

// Shared sampler; caches the temperature-scaled conditional per context.
class Sampler {
  public:
    Sampler(const NGramModel& model, double temperature) : model_(model), temperature_(temperature) {}

    const std::vector<double>& distribution(std::span<const std::int32_t> ctx) {
        std::string key(reinterpret_cast<const char*>(ctx.data()), ctx.size() * 4);
        auto found = cache_.find(key);
        if (found != cache_.end()) return found->second;
        std::vector<double> probs = applyTemperature(model_.nextTokenDistribution(ctx), temperature_);
        return cache_.emplace(std::move(key), std::move(probs)).first->second;
    }

  private:
    const NGramModel& model_;
    double temperature_;
    std::unordered_map<std::string, std::vector<double>> cache_;
};

std::vector<std::int32_t> sampleImpl(const NGramModel& model, double temperature, int len,
                                     std::uint64_t seed, std::span<const std::int32_t> prompt,
                                     bool stop_at_eos) {
    require(temperature > 0.0, ErrorKind::Domain, "sample: temperature must be > 0");
    require(len >= 1, ErrorKind::Domain, "sample: max_len must be >= 1");
    Rng rng(seed);
    Sampler sampler(model, temperature);
    std::size_t history = static_cast<std::size_t>(model.order() - 1);
    std::vector<std::int32_t> window(history, kBos);
    for (std::int32_t t : prompt) {
        window.push_back(t);
        if (window.size() > history) window.erase(window.begin());
    }
    const auto& pred = model.predTokens();
    std::size_t eos_index = pred.size() - 1;
    std::vector<std::int32_t> out;
    std::vector<double> no_eos;
    for (int t = 0; t < len; ++t) {
        const std::vector<double>* probs = &sampler.distribution(window);
        if (!stop_at_eos) {
            no_eos = *probs;
            no_eos[eos_index] = 0.0;
            probs = &no_eos;
        }
        std::size_t pick = rng.categorical(*probs);
        if (stop_at_eos && pick == eos_index) break;
        std::int32_t token = pred[pick];
        out.push_back(token);
        if (history > 0) {
            window.push_back(token);
            window.erase(window.begin());
        }
    }
    return out;
}

}  // namespace

UnitSequence sample(const NGramModel& model, double temperature, int max_len, std::uint64_t seed,
                    const std::vector<std::int32_t>* prompt) {
    UnitSequence us;
    us.units = sampleImpl(model, temperature, max_len, seed,
                          prompt ? std::span<const std::int32_t>(*prompt)
                                 : std::span<const std::int32_t>(),
                          /*stop_at_eos=*/true);
    return us;
}

std::vector<std::int32_t> sampleFixedLength(const NGramModel& model, double temperature, int len,
                                            std::uint64_t seed,
                                            std::span<const std::int32_t> prompt) {
    return sampleImpl(model, temperature, len, seed, prompt, /*stop_at_eos=*/false);
}

PairNormalize pairNormalizeFromString(const std::string& name) {
    if (name == "total") return PairNormalize::Total;
    if (name == "per-token") return PairNormalize::PerToken;
    fail(ErrorKind::Domain, "unknown normalization '" + name + "' (total|per-token)");
}

PairAccuracyResult pairAccuracy(const NGramModel& model, const PairSet& pairs,
                                PairNormalize normalize) {
    require(!pairs.pairs.empty(), ErrorKind::Domain, "pairAccuracy: empty pair set");
    auto score = [&](const std::vector<std::int32_t>& seq) {
        LogProbReport rep = scoreSequence(model, std::span<const std::int32_t>(seq));
        if (normalize == PairNormalize::Total) return rep.total_logprob;
        return rep.total_logprob / static_cast<double>(rep.per_token.size());
    };
    double sum = 0.0;
    for (const UnitPair& pair : pairs.pairs) {
        require(!pair.positive.empty() && !pair.negative.empty(), ErrorKind::EmptyField,
                "pairAccuracy: empty member in pair '" + pair.pair_id + "'");
        double sp = score(pair.positive);
        double sn = score(pair.negative);
        sum += sp > sn ? 1.0 : (sp < sn ? 0.0 : 0.5);
    }
    PairAccuracyResult res;
    res.n_pairs = static_cast<std::int64_t>(pairs.pairs.size());
    res.accuracy = sum / static_cast<double>(res.n_pairs);
    res.error_rate = 1.0 - res.accuracy;
    return res;
}

// -- serialization ------------------------------------------------------------

void NGramModel::save(const std::filesystem::path& path) const {
    std::string buf;
    buf.append(kModelMagic, 4);
    auto put16 = [&](std::uint16_t v) {
        for (int i = 0; i < 2; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    auto put32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    auto put64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    auto putF64 = [&](double v) { put64(std::bit_cast<std::uint64_t>(v)); };

    put16(kModelVersion);
    put16(static_cast<std::uint16_t>(order_));
    buf.push_back(smoothing_ == Smoothing::AbsoluteDiscount ? 0 : 1);
    putF64(discount_);
    putF64(add_k_);
    buf.push_back(dedup_ ? 1 : 0);
    put32(static_cast<std::uint32_t>(vocab_.size()));
    for (std::int32_t v : vocab_) put32(static_cast<std::uint32_t>(v));
    put64(training_tokens_);
    for (const auto& table : tables_) {
        put64(table.size());
        // deterministic on-disk order
        std::map<std::string, const ContextStats*> sorted;
        for (const auto& [key, stats] : table) sorted[key] = &stats;
        for (const auto& [key, stats] : sorted) {
            put32(static_cast<std::uint32_t>(key.size() / 4));
            buf.append(key);
            put32(static_cast<std::uint32_t>(stats->counts.size()));
            for (const auto& [token, count] : stats->counts) {
                put32(static_cast<std::uint32_t>(token));
                put64(count);
            }
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string data = std::move(ss).str();
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
        if (pos + n > data.size()) fail(ErrorKind::Truncated, path.string() + ": truncated model");
    };
    auto byte = [&]() {
        need(1);
        return static_cast<unsigned char>(data[pos++]);
    };
    auto get16 = [&]() {
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(byte()) << (8 * i);
        return v;
    };
    auto get32 = [&]() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
        return v;
    };
    auto get64 = [&]() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
        return v;
    };

    need(4);
    if (std::memcmp(data.data(), kModelMagic, 4) != 0)
        fail(ErrorKind::BadMagic, path.string() + ": bad magic (expected GSLM)");
    pos = 4;
    if (get16() != kModelVersion)
        fail(ErrorKind::BadVersion, path.string() + ": unsupported model version");

    NGramModel model;
    model.order_ = get16();
    require(model.order_ >= 1, ErrorKind::Format, path.string() + ": bad order");
    model.smoothing_ = byte() == 0 ? Smoothing::AbsoluteDiscount : Smoothing::AddK;
    model.discount_ = std::bit_cast<double>(get64());
    model.add_k_ = std::bit_cast<double>(get64());
    model.dedup_ = byte() != 0;
    std::uint32_t vocab_size = get32();
    model.vocab_.reserve(vocab_size);
    for (std::uint32_t i = 0; i < vocab_size; ++i)
        model.vocab_.push_back(static_cast<std::int32_t>(get32()));
    model.training_tokens_ = get64();
    model.pred_tokens_ = model.vocab_;
    model.pred_tokens_.push_back(kEos);
    for (std::size_t i = 0; i < model.pred_tokens_.size(); ++i)
        model.pred_index_[model.pred_tokens_[i]] = i;
    model.tables_.resize(static_cast<std::size_t>(model.order_));
    for (auto& table : model.tables_) {
        std::uint64_t n_ctx = get64();
        for (std::uint64_t c = 0; c < n_ctx; ++c) {
            std::uint32_t ctx_len = get32();
            need(ctx_len * 4);
            std::string key = data.substr(pos, ctx_len * 4);
            pos += ctx_len * 4;
            ContextStats stats;
            std::uint32_t n_entries = get32();
            stats.counts.reserve(n_entries);
            for (std::uint32_t e = 0; e < n_entries; ++e) {
                std::int32_t token = static_cast<std::int32_t>(get32());
                std::uint64_t count = get64();
                stats.counts.emplace_back(token, count);
                stats.total += count;
            }
            table.emplace(std::move(key), std::move(stats));
        }
    }
    if (pos != data.size()) fail(ErrorKind::Format, path.string() + ": trailing bytes");
    return model;
}

}  // namespace unitlab
