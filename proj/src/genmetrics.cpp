#include "unitlab/genmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "unitlab/error.hpp"
#include "unitlab/format.hpp"
#include "unitlab/parallel.hpp"
#include "unitlab/rng.hpp"

namespace unitlab {
namespace {

std::string gramKey(std::span<const std::int32_t> u, std::size_t pos, int k) {
    std::string key(static_cast<std::size_t>(k) * 4, '\0');
    for (int i = 0; i < k; ++i) {
        std::uint32_t v = static_cast<std::uint32_t>(u[pos + static_cast<std::size_t>(i)]);
        for (int b = 0; b < 4; ++b)
            key[static_cast<std::size_t>(i) * 4 + static_cast<std::size_t>(b)] =
                static_cast<char>((v >> (8 * b)) & 0xff);
    }
    return key;
}

using GramCounts = std::unordered_map<std::string, std::int64_t>;

GramCounts countGrams(std::span<const std::int32_t> u, int k) {
    GramCounts counts;
    if (u.size() < static_cast<std::size_t>(k)) return counts;
    for (std::size_t pos = 0; pos + static_cast<std::size_t>(k) <= u.size(); ++pos)
        ++counts[gramKey(u, pos, k)];
    return counts;
}

double brevityPenalty(std::int64_t hyp_len, std::int64_t ref_len) {
    if (hyp_len >= ref_len) return 1.0;
    return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
}

// Closest reference length; ties go to the shorter reference.
std::int64_t closestRefLength(std::int64_t hyp_len, std::span<const std::int64_t> ref_lens) {
    std::int64_t best = ref_lens[0];
    for (std::int64_t r : ref_lens) {
        std::int64_t d = std::llabs(r - hyp_len), bd = std::llabs(best - hyp_len);
        if (d < bd || (d == bd && r < best)) best = r;
    }
    return best;
}

double piecewiseLinear(std::span<const double> xs, std::span<const double> ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (x >= xs[i] && x <= xs[i + 1]) {
            double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
            return ys[i] + t * (ys[i + 1] - ys[i]);
        }
    }
    return ys.back();
}

// First crossing of target, scanning segments left to right; exact grid hits
// are returned as-is.
std::optional<double> firstCrossing(std::span<const double> xs, std::span<const double> ys,
                                    double target) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (ys[i] == target) return xs[i];
        if (i + 1 < xs.size() && (ys[i] - target) * (ys[i + 1] - target) < 0.0) {
            double t = (target - ys[i]) / (ys[i + 1] - ys[i]);
            return xs[i] + t * (xs[i + 1] - xs[i]);
        }
    }
    return std::nullopt;
}

void validateCurve(const SweepCurve& curve, std::size_t min_points) {
    require(curve.points.size() >= min_points, ErrorKind::Domain,
            "sweep curve needs at least " + std::to_string(min_points) + " points");
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const SweepPoint& p = curve.points[i];
        require(p.median_ppx > 0.0 && std::isfinite(p.median_ppx), ErrorKind::Domain,
                "sweep curve: perplexity must be positive and finite");
        require(std::isfinite(p.vert), ErrorKind::Domain, "sweep curve: non-finite VERT");
        if (i > 0)
            require(curve.points[i - 1].temperature < p.temperature, ErrorKind::Domain,
                    "sweep curve: temperatures must be strictly increasing");
    }
}

void validateGrid(std::span<const double> grid) {
    require(!grid.empty(), ErrorKind::Domain, "temperature grid must be non-empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        require(grid[i] > 0.0, ErrorKind::Domain, "temperatures must be positive");
        if (i > 0)
            require(grid[i - 1] < grid[i], ErrorKind::Domain,
                    "temperature grid must be strictly increasing");
    }
}

}  // namespace

std::vector<TokenSeq> internTokens(const std::vector<std::vector<std::string>>& corpus) {
    std::unordered_map<std::string, std::int32_t> ids;
    std::vector<TokenSeq> out;
    out.reserve(corpus.size());
    for (const auto& utt : corpus) {
        TokenSeq seq;
        seq.reserve(utt.size());
        for (const std::string& tok : utt) {
            auto [it, inserted] = ids.emplace(tok, static_cast<std::int32_t>(ids.size()));
            seq.push_back(it->second);
        }
        out.push_back(std::move(seq));
    }
    return out;
}

double autoBleu(std::span<const std::int32_t> u, int n) {
    require(n >= 1, ErrorKind::Domain, "autoBleu: n must be >= 1");
    require(!u.empty(), ErrorKind::EmptyField, "autoBleu: empty utterance");
    double log_sum = 0.0;
    for (int k = 1; k <= n; ++k) {
        std::int64_t occurrences = static_cast<std::int64_t>(u.size()) - k + 1;
        if (occurrences <= 0) return 0.0;
        GramCounts counts = countGrams(u, k);
        std::int64_t repeated = 0;
        for (const auto& [gram, c] : counts)
            if (c >= 2) repeated += c;
        if (repeated == 0) return 0.0;
        log_sum += std::log(static_cast<double>(repeated) / static_cast<double>(occurrences));
    }
    return std::exp(log_sum / n);
}

double meanAutoBleu(const std::vector<TokenSeq>& corpus, int n) {
    require(!corpus.empty(), ErrorKind::Domain, "meanAutoBleu: empty corpus");
    double sum = 0.0;
    for (const TokenSeq& u : corpus) sum += autoBleu(u, n);
    return sum / static_cast<double>(corpus.size());
}

double sentenceBleu(std::span<const std::int32_t> hyp, const std::vector<TokenSeq>& refs, int n) {
    require(n >= 1, ErrorKind::Domain, "sentenceBleu: n must be >= 1");
    require(!refs.empty(), ErrorKind::Domain, "sentenceBleu: no references");
    if (hyp.empty()) return 0.0;
    double log_sum = 0.0;
    for (int k = 1; k <= n; ++k) {
        std::int64_t den = static_cast<std::int64_t>(hyp.size()) - k + 1;
        if (den <= 0) return 0.0;
        GramCounts hyp_counts = countGrams(hyp, k);
        std::vector<GramCounts> ref_counts;
        ref_counts.reserve(refs.size());
        for (const TokenSeq& r : refs) ref_counts.push_back(countGrams(r, k));
        std::int64_t num = 0;
        for (const auto& [gram, c] : hyp_counts) {
            std::int64_t best_ref = 0;
            for (const GramCounts& rc : ref_counts) {
                auto found = rc.find(gram);
                if (found != rc.end()) best_ref = std::max(best_ref, found->second);
            }
            num += std::min(c, best_ref);
        }
        // add-1 smoothing on orders >= 2 only; zero unigram overlap stays zero
        if (k == 1) {
            if (num == 0) return 0.0;
            log_sum += std::log(static_cast<double>(num) / static_cast<double>(den));
        } else {
            log_sum += std::log(static_cast<double>(num + 1) / static_cast<double>(den + 1));
        }
    }
    std::vector<std::int64_t> ref_lens;
    ref_lens.reserve(refs.size());
    for (const TokenSeq& r : refs) ref_lens.push_back(static_cast<std::int64_t>(r.size()));
    std::int64_t r = closestRefLength(static_cast<std::int64_t>(hyp.size()), ref_lens);
    return brevityPenalty(static_cast<std::int64_t>(hyp.size()), r) * std::exp(log_sum / n);
}

double selfBleu(const std::vector<TokenSeq>& corpus, int n) {
    require(n >= 1, ErrorKind::Domain, "selfBleu: n must be >= 1");
    require(corpus.size() >= 2, ErrorKind::Domain, "selfBleu: corpus must have >= 2 utterances");

    // Per order: per-utterance gram counts plus the top-two counts per gram,
    // so clipping against "all other utterances" is O(grams) per hypothesis.
    struct Top2 {
        std::int64_t best = 0;
        std::int64_t second = 0;
        std::size_t owner = 0;
    };
    std::vector<std::vector<GramCounts>> per_utt(static_cast<std::size_t>(n));
    std::vector<std::unordered_map<std::string, Top2>> top(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        auto& utt_counts = per_utt[static_cast<std::size_t>(k - 1)];
        auto& gram_top = top[static_cast<std::size_t>(k - 1)];
        utt_counts.reserve(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            utt_counts.push_back(countGrams(corpus[i], k));
            for (const auto& [gram, c] : utt_counts.back()) {
                Top2& t = gram_top[gram];
                if (c > t.best) {
                    t.second = t.best;
                    t.best = c;
                    t.owner = i;
                } else if (c > t.second) {
                    t.second = c;
                }
            }
        }
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const std::int64_t hyp_len = static_cast<std::int64_t>(corpus[i].size());
        double bleu = 0.0;
        if (hyp_len > 0) {
            double log_sum = 0.0;
            bool zero = false;
            for (int k = 1; k <= n && !zero; ++k) {
                std::int64_t den = hyp_len - k + 1;
                if (den <= 0) {
                    zero = true;
                    break;
                }
                std::int64_t num = 0;
                for (const auto& [gram, c] : per_utt[static_cast<std::size_t>(k - 1)][i]) {
                    const Top2& t = top[static_cast<std::size_t>(k - 1)].at(gram);
                    std::int64_t max_other = t.owner == i ? t.second : t.best;
                    num += std::min(c, max_other);
                }
                if (k == 1) {
                    if (num == 0) {
                        zero = true;
                        break;
                    }
                    log_sum += std::log(static_cast<double>(num) / static_cast<double>(den));
                } else {
                    log_sum += std::log(static_cast<double>(num + 1) / static_cast<double>(den + 1));
                }
            }
            if (!zero) {
                std::int64_t best_r = -1;
                for (std::size_t j = 0; j < corpus.size(); ++j) {
                    if (j == i) continue;
                    std::int64_t r = static_cast<std::int64_t>(corpus[j].size());
                    if (best_r < 0) {
                        best_r = r;
                        continue;
                    }
                    std::int64_t d = std::llabs(r - hyp_len), bd = std::llabs(best_r - hyp_len);
                    if (d < bd || (d == bd && r < best_r)) best_r = r;
                }
                bleu = brevityPenalty(hyp_len, best_r) * std::exp(log_sum / n);
            }
        }
        sum += bleu;
    }
    return sum / static_cast<double>(corpus.size());
}

double vert(const std::vector<TokenSeq>& corpus, int n) {
    return std::sqrt(selfBleu(corpus, n) * meanAutoBleu(corpus, n));
}

double corpusPerplexity(const NGramModel& ref, const std::vector<UnitSequence>& corpus) {
    require(!corpus.empty(), ErrorKind::Domain, "corpusPerplexity: empty corpus");
    std::vector<double> ppx;
    ppx.reserve(corpus.size());
    for (const UnitSequence& us : corpus) ppx.push_back(scoreSequence(ref, us).perplexity);
    std::sort(ppx.begin(), ppx.end());
    std::size_t m = ppx.size();
    if (m % 2 == 1) return ppx[m / 2];
    return 0.5 * (ppx[m / 2 - 1] + ppx[m / 2]);
}

const std::vector<double>& defaultTemperatureGrid() {
    static const std::vector<double> grid = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2,
                                             1.3, 1.4, 1.5, 1.7, 1.9, 2.1, 2.3, 2.5, 3.0};
    return grid;
}

SweepCurve temperatureSweep(const NGramModel& gen, const NGramModel& ref,
                            std::span<const double> grid, const SweepOptions& opts) {
    validateGrid(grid);
    require(opts.samples_per_temp >= 1, ErrorKind::Domain, "samples_per_temp must be >= 1");
    require(opts.max_len >= 1, ErrorKind::Domain, "max_len must be >= 1");

    SweepCurve curve;
    curve.points.resize(grid.size());
    parallelChunks(grid.size(), 1, opts.threads, [&](std::size_t ti, std::size_t, std::size_t) {
        double tau = grid[ti];
        std::vector<UnitSequence> samples;
        std::vector<TokenSeq> tokens;
        samples.reserve(static_cast<std::size_t>(opts.samples_per_temp));
        for (int i = 0; i < opts.samples_per_temp; ++i) {
            UnitSequence us;
            for (int retry = 0; retry < 1000; ++retry) {
                us = sample(gen, tau, opts.max_len,
                            deriveSeed(opts.seed, {static_cast<std::uint64_t>(ti),
                                                   static_cast<std::uint64_t>(i),
                                                   static_cast<std::uint64_t>(retry)}));
                if (!us.units.empty()) break;
            }
            require(!us.units.empty(), ErrorKind::Domain,
                    "temperatureSweep: generator keeps producing empty samples");
            us.utt_id = "t" + std::to_string(ti) + "_s" + std::to_string(i);
            tokens.push_back(us.units);
            samples.push_back(std::move(us));
        }
        SweepPoint& p = curve.points[ti];
        p.temperature = tau;
        p.n_samples = opts.samples_per_temp;
        p.median_ppx = corpusPerplexity(ref, samples);
        p.vert = opts.samples_per_temp >= 2 ? vert(tokens, 2) : meanAutoBleu(tokens, 2);
    });
    return curve;
}

SweepCurve sweepFromSamples(const std::vector<std::pair<double, std::vector<UnitSequence>>>& samples,
                            const NGramModel& ref) {
    require(!samples.empty(), ErrorKind::Domain, "sweepFromSamples: empty sample set");
    SweepCurve curve;
    for (const auto& [tau, corpus] : samples) {
        require(!corpus.empty(), ErrorKind::Domain, "sweepFromSamples: empty corpus for a temperature");
        std::vector<TokenSeq> tokens;
        tokens.reserve(corpus.size());
        for (const UnitSequence& us : corpus) tokens.push_back(us.units);
        SweepPoint p;
        p.temperature = tau;
        p.n_samples = static_cast<std::int64_t>(corpus.size());
        p.median_ppx = corpusPerplexity(ref, corpus);
        p.vert = corpus.size() >= 2 ? vert(tokens, 2) : meanAutoBleu(tokens, 2);
        curve.points.push_back(p);
    }
    validateCurve(curve, 1);
    return curve;
}

Anchors findAnchors(const SweepCurve& curve, const OraclePoint& oracle) {
    validateCurve(curve, 2);
    require(oracle.ppx > 0.0 && std::isfinite(oracle.ppx), ErrorKind::Domain,
            "findAnchors: oracle perplexity must be positive");
    require(std::isfinite(oracle.vert), ErrorKind::Domain, "findAnchors: non-finite oracle VERT");

    std::vector<double> ts, log_ppx, verts;
    for (const SweepPoint& p : curve.points) {
        ts.push_back(p.temperature);
        log_ppx.push_back(std::log(p.median_ppx));
        verts.push_back(p.vert);
    }
    Anchors a;
    a.t_at_oracle_ppx = firstCrossing(ts, log_ppx, std::log(oracle.ppx));
    a.t_at_oracle_vert = firstCrossing(ts, verts, oracle.vert);
    if (a.t_at_oracle_ppx) a.vert_at_oracle_ppx = piecewiseLinear(ts, verts, *a.t_at_oracle_ppx);
    if (a.t_at_oracle_vert)
        a.ppx_at_oracle_vert = std::exp(piecewiseLinear(ts, log_ppx, *a.t_at_oracle_vert));
    return a;
}

double aucBetweenAnchors(const SweepCurve& curve, const OraclePoint& oracle) {
    require(oracle.vert > 0.0, ErrorKind::Domain,
            "aucBetweenAnchors: oracle VERT must be positive for axis normalization");
    Anchors a = findAnchors(curve, oracle);
    require(a.t_at_oracle_ppx.has_value() && a.t_at_oracle_vert.has_value(), ErrorKind::Domain,
            "aucBetweenAnchors: anchor NOT-COMPUTABLE (oracle not bracketed by the curve); "
            "report NOT-COMPUTABLE instead of a value");

    std::vector<double> ts, log_ppx, verts;
    for (const SweepPoint& p : curve.points) {
        ts.push_back(p.temperature);
        log_ppx.push_back(std::log(p.median_ppx));
        verts.push_back(p.vert);
    }
    double t0 = std::min(*a.t_at_oracle_ppx, *a.t_at_oracle_vert);
    double t1 = std::max(*a.t_at_oracle_ppx, *a.t_at_oracle_vert);

    // Polyline in normalized (x, y) = (PPX/oracle, VERT/oracle) space:
    // interpolated endpoints plus the grid points strictly inside the span.
    auto pointAt = [&](double t) {
        double x = std::exp(piecewiseLinear(ts, log_ppx, t)) / oracle.ppx;
        double y = piecewiseLinear(ts, verts, t) / oracle.vert;
        return std::pair<double, double>(x, y);
    };
    std::vector<std::pair<double, double>> poly;
    poly.push_back(pointAt(t0));
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i] > t0 && ts[i] < t1)
            poly.emplace_back(curve.points[i].median_ppx / oracle.ppx,
                              curve.points[i].vert / oracle.vert);
    if (t1 > t0) poly.push_back(pointAt(t1));

    double area = 0.0;
    auto excess = [](double y) { return y > 1.0 ? y - 1.0 : 0.0; };
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        auto [x0, y0] = poly[i];
        auto [x1, y1] = poly[i + 1];
        // split at the y = 1 crossing so the trapezoid rule stays exact on
        // piecewise-linear curves
        if ((y0 - 1.0) * (y1 - 1.0) < 0.0) {
            double f = (1.0 - y0) / (y1 - y0);
            double xm = x0 + f * (x1 - x0);
            area += 0.5 * (excess(y0) + 0.0) * (xm - x0);
            area += 0.5 * (0.0 + excess(y1)) * (x1 - xm);
        } else {
            area += 0.5 * (excess(y0) + excess(y1)) * (x1 - x0);
        }
    }
    return area;
}

PickTempResult selectContinuationTemperature(const NGramModel& gen,
                                             const std::vector<UnitSequence>& prompts,
                                             const std::vector<TokenSeq>& references,
                                             std::span<const double> grid,
                                             const PickTempOptions& opts) {
    validateGrid(grid);
    require(!prompts.empty(), ErrorKind::Domain, "selectContinuationTemperature: no prompts");
    require(prompts.size() == references.size(), ErrorKind::Domain,
            "selectContinuationTemperature: prompts and references must be aligned");
    require(opts.n_continuations >= 1, ErrorKind::Domain, "n_continuations must be >= 1");
    for (const TokenSeq& ref : references)
        require(!ref.empty(), ErrorKind::EmptyField,
                "selectContinuationTemperature: empty reference");

    PickTempResult result;
    for (std::size_t ti = 0; ti < grid.size(); ++ti) {
        double tau = grid[ti];
        double prompt_sum = 0.0;
        for (std::size_t i = 0; i < prompts.size(); ++i) {
            std::vector<TokenSeq> ref_one{references[i]};
            int len = static_cast<int>(references[i].size());
            double sum_j = 0.0, max_j = 0.0;
            for (int j = 0; j < opts.n_continuations; ++j) {
                TokenSeq cont = sampleFixedLength(
                    gen, tau, len,
                    deriveSeed(opts.seed, {static_cast<std::uint64_t>(ti),
                                           static_cast<std::uint64_t>(i),
                                           static_cast<std::uint64_t>(j)}),
                    prompts[i].units);
                double b = sentenceBleu(cont, ref_one, 2);
                sum_j += b;
                max_j = std::max(max_j, b);
            }
            prompt_sum += opts.aggregate == ContinuationAggregate::Max
                              ? max_j
                              : sum_j / static_cast<double>(opts.n_continuations);
        }
        result.score_per_temp.emplace_back(tau, prompt_sum / static_cast<double>(prompts.size()));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.score_per_temp.size(); ++i)
        if (result.score_per_temp[i].second > result.score_per_temp[best].second) best = i;
    result.selected_temperature = result.score_per_temp[best].first;
    return result;
}

void writeSweepTsv(std::ostream& out, const SweepCurve& curve) {
    out << "# temperature\tmedian_ppx\tvert\tn_samples\n";
    for (const SweepPoint& p : curve.points)
        out << formatDouble(p.temperature) << '\t' << formatDouble(p.median_ppx) << '\t'
            << formatDouble(p.vert) << '\t' << p.n_samples << '\n';
}

SweepCurve readSweepTsv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    SweepCurve curve;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        SweepPoint p;
        if (!(ss >> p.temperature >> p.median_ppx >> p.vert >> p.n_samples))
            fail(ErrorKind::Format, path.string() + ":" + std::to_string(lineno) +
                                        ": expected `temperature\\tmedian_ppx\\tvert\\tn_samples`");
        curve.points.push_back(p);
    }
    validateCurve(curve, 1);
    return curve;
}

}  // namespace unitlab
